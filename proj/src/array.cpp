#include "wiom/array.hpp"

#include "wiom/error.hpp"
#include "wiom/pose.hpp"

#include <cmath>
#include <stdexcept>

namespace wiom {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// Keeps every port weakly excited from every direction so response columns
// never vanish (a dead column would make the matched filter blind there).
constexpr double kPatternFloor = 1e-3;

} // namespace

double ArrayGeometry::wavelength() const { return kSpeedOfLight / carrier_frequency; }

void ArrayGeometry::validate() const {
    if (rings < 1 || elements_per_ring < 1)
        throw ConfigError("array needs at least one ring and one element per ring");
    if (polarizations < 1 || polarizations > 2)
        throw ConfigError("polarizations must be 1 or 2");
    if (!(ring_radius > 0.0) || !(ring_spacing > 0.0))
        throw ConfigError("ring radius and spacing must be positive");
    if (!(carrier_frequency > 0.0)) throw ConfigError("carrier frequency must be positive");
    if (!(directivity_exponent >= 0.0)) throw ConfigError("directivity exponent must be >= 0");
}

Eigen::VectorXcd array_response(const ArrayGeometry& geo, double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi))
        throw std::domain_error("array_response: non-finite angle");
    if (theta < 0.0 || theta > M_PI)
        throw std::domain_error("array_response: theta outside [0, pi]");
    phi = normalize_angle(phi);

    const double k = 2.0 * M_PI / geo.wavelength();
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    // Incoming direction in the vehicle frame basis (forward, right, up); the
    // azimuth is a compass-style angle, clockwise positive from forward.
    const double df = st * std::cos(phi);
    const double dr = st * std::sin(phi);

    Eigen::VectorXcd a(geo.ports());
    const double z0 = -0.5 * (geo.rings - 1) * geo.ring_spacing;
    for (int r = 0; r < geo.rings; ++r) {
        const double z = z0 + r * geo.ring_spacing;
        for (int e = 0; e < geo.elements_per_ring; ++e) {
            const double pe = 2.0 * M_PI * e / geo.elements_per_ring;
            const double nf = std::cos(pe); // element boresight normal (horizontal)
            const double nr = std::sin(pe);
            const double px = geo.ring_radius * nf;
            const double py = geo.ring_radius * nr;

            double gain = 1.0;
            if (geo.directivity_exponent > 0.0) {
                double c = df * nf + dr * nr; // cos of angle off element boresight
                double lobe = c > 0.0 ? std::pow(c, geo.directivity_exponent) : 0.0;
                gain = kPatternFloor + (1.0 - kPatternFloor) * lobe;
            }
            const double phase = k * (df * px + dr * py + ct * z);
            const std::complex<double> v = gain * std::exp(std::complex<double>(0.0, phase));
            for (int p = 0; p < geo.polarizations; ++p) {
                // Second polarization is modelled as a quadrature copy of the
                // co-polarized port; it keeps dual-port datasets full rank
                // without introducing a second pattern model.
                a(geo.port_index(r, e, p)) = (p == 0) ? v : v * std::complex<double>(0.0, 1.0);
            }
        }
    }
    return a;
}

AngleGrid AngleGrid::from_steps(double delta_theta, double delta_phi) {
    if (!(delta_theta > 0.0) || !(delta_phi > 0.0))
        throw ConfigError("angle grid steps must be positive");
    const double nt = M_PI / delta_theta;
    const double np = 2.0 * M_PI / delta_phi;
    const double rt = std::round(nt);
    const double rp = std::round(np);
    if (std::abs(nt - rt) > 1e-6 * (1.0 + nt))
        throw ConfigError("delta_theta must divide pi");
    if (std::abs(np - rp) > 1e-6 * (1.0 + np))
        throw ConfigError("delta_phi must divide 2*pi");
    AngleGrid g;
    g.delta_theta = delta_theta;
    g.delta_phi = delta_phi;
    g.n_theta = static_cast<int>(rt) + 1; // includes both poles
    g.n_phi = static_cast<int>(rp);
    return g;
}

AntennaMatrix build_antenna_matrix(const ArrayGeometry& geo, double delta_theta,
                                   double delta_phi) {
    geo.validate();
    AntennaMatrix am;
    am.grid = AngleGrid::from_steps(delta_theta, delta_phi);
    am.entries.resize(geo.ports(), am.grid.columns());
    for (int a = 0; a < am.grid.n_theta; ++a) {
        const double theta = std::min(am.grid.theta(a), M_PI);
        for (int b = 0; b < am.grid.n_phi; ++b) {
            am.entries.col(a * am.grid.n_phi + b) = array_response(geo, theta, am.grid.phi(b));
        }
    }
    return am;
}

DelayMatrix build_delay_matrix(const std::vector<double>& subcarrier_frequencies, double tau_step,
                               int taps) {
    if (subcarrier_frequencies.empty()) throw ConfigError("delay matrix needs subcarriers");
    for (std::size_t s = 1; s < subcarrier_frequencies.size(); ++s) {
        if (!(subcarrier_frequencies[s] > subcarrier_frequencies[s - 1]))
            throw ConfigError("subcarrier frequencies must be strictly increasing");
    }
    if (!(tau_step > 0.0)) throw ConfigError("tau_step must be positive");
    if (taps < 1) throw ConfigError("delay matrix needs at least one tap");

    DelayMatrix dm;
    dm.tau_step = tau_step;
    dm.frequencies = subcarrier_frequencies;
    const int s_count = static_cast<int>(subcarrier_frequencies.size());
    dm.entries.resize(s_count, taps);
    for (int s = 0; s < s_count; ++s) {
        const double w = 2.0 * M_PI * subcarrier_frequencies[s] * tau_step;
        for (int t = 0; t < taps; ++t) {
            dm.entries(s, t) = std::exp(std::complex<double>(0.0, w * t));
        }
    }
    return dm;
}

} // namespace wiom
