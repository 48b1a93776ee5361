#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace wiom {

// Stacked uniform circular array with dual-polarized patch ports.
// Port ordering contract: ring-major, element-within-ring next, polarization
// fastest, i.e. port = (ring * elements_per_ring + element) * polarizations + pol.
struct ArrayGeometry {
    int rings = 4;             // stacked rings (vertical axis)
    int elements_per_ring = 16;
    int polarizations = 2;
    double ring_radius = 0.14;        // metres
    double ring_spacing = 0.06;       // metres between adjacent rings
    double carrier_frequency = 2.66e9; // Hz, sets the phase wavelength
    double directivity_exponent = 2.0; // cosine-power element pattern, 0 = isotropic

    int ports() const { return polarizations * rings * elements_per_ring; }
    double wavelength() const;
    int port_index(int ring, int element, int pol) const {
        return (ring * elements_per_ring + element) * polarizations + pol;
    }
    void validate() const; // throws ConfigError
};

// Steering/response vector of the array for a plane wave arriving from polar
// angle theta (radians from zenith, [0, pi]) and azimuth phi (radians,
// vehicle frame, clockwise positive from forward; wrapped modulo 2*pi).
// Throws std::domain_error for theta outside [0, pi] or non-finite angles.
Eigen::VectorXcd array_response(const ArrayGeometry& geo, double theta, double phi);

// Regular angle grid: theta_a = a * delta_theta for a in [0, n_theta),
// phi_b = -pi + b * delta_phi for b in [0, n_phi). Column index = a * n_phi + b.
struct AngleGrid {
    double delta_theta = 0.0; // radians
    double delta_phi = 0.0;   // radians
    int n_theta = 0;
    int n_phi = 0;

    // Validates that delta_theta divides pi and delta_phi divides 2*pi.
    static AngleGrid from_steps(double delta_theta, double delta_phi); // throws ConfigError
    double theta(int a) const { return a * delta_theta; }
    double phi(int b) const { return -M_PI + b * delta_phi; }
    int columns() const { return n_theta * n_phi; }
};

// Antenna response matrix A: ports x (n_theta * n_phi), column g = a * n_phi + b
// holding array_response(theta_a, phi_b).
struct AntennaMatrix {
    Eigen::MatrixXcd entries;
    AngleGrid grid;
};

AntennaMatrix build_antenna_matrix(const ArrayGeometry& geo, double delta_theta, double delta_phi);

// Delay dictionary D: subcarriers x taps, D(s, t) = exp(+j 2 pi f_s tau_step t)
// with f_s the baseband-centred subcarrier frequencies. Matched filtering uses
// D as stored (it already carries the conjugated delay response).
struct DelayMatrix {
    Eigen::MatrixXcd entries;
    double tau_step = 0.0;
    std::vector<double> frequencies;
};

DelayMatrix build_delay_matrix(const std::vector<double>& subcarrier_frequencies, double tau_step,
                               int taps); // throws ConfigError

} // namespace wiom
