#include "wiom/array.hpp"
#include "wiom/error.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace wiom;
using doctest::Approx;

namespace {

ArrayGeometry tiny_isotropic() {
    ArrayGeometry g;
    g.rings = 1;
    g.elements_per_ring = 4;
    g.polarizations = 1;
    g.ring_radius = 0.25;
    g.ring_spacing = 0.1;
    g.carrier_frequency = 299792458.0; // wavelength exactly 1 m
    g.directivity_exponent = 0.0;
    return g;
}

} // namespace

TEST_SUITE("array") {

TEST_CASE("port ordering is ring-major, element next, polarization fastest") {
    ArrayGeometry g;
    g.rings = 3;
    g.elements_per_ring = 5;
    g.polarizations = 2;
    CHECK(g.ports() == 30);
    CHECK(g.port_index(0, 0, 0) == 0);
    CHECK(g.port_index(0, 0, 1) == 1);
    CHECK(g.port_index(0, 1, 0) == 2);
    CHECK(g.port_index(1, 0, 0) == 10);
    CHECK(g.port_index(2, 4, 1) == 29);
}

TEST_CASE("single-element phases computed by hand") {
    // One ring of four isotropic elements at radius 0.25 m, wavelength 1 m, so
    // k * radius = pi / 2. Elements sit at azimuths 0, 90, 180, 270 degrees.
    auto g = tiny_isotropic();
    const double kr = 2.0 * M_PI * 0.25; // pi/2

    // Broadside wave from phi = 0 (forward), theta = 90 deg: the z term drops,
    // direction (1, 0), element e at (cos pe, sin pe) * 0.25.
    auto a = array_response(g, M_PI / 2.0, 0.0);
    REQUIRE(a.size() == 4);
    CHECK(a(0).real() == Approx(std::cos(kr)).epsilon(1e-12));
    CHECK(a(0).imag() == Approx(std::sin(kr)).epsilon(1e-12));
    CHECK(a(1).real() == Approx(1.0).epsilon(1e-12)); // orthogonal element: zero phase
    CHECK(a(1).imag() == Approx(0.0).epsilon(1e-12));
    CHECK(a(2).real() == Approx(std::cos(-kr)).epsilon(1e-12));
    CHECK(a(2).imag() == Approx(std::sin(-kr)).epsilon(1e-12));
    CHECK(std::abs(a(3) - a(1)) == Approx(0.0).epsilon(1e-12));

    // From zenith every horizontal position is equidistant: all phases equal.
    auto z = array_response(g, 0.0, 1.234);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(z(i) - z(0)) < 1e-12);
}

TEST_CASE("unit magnitude for isotropic elements") {
    auto g = tiny_isotropic();
    for (double theta : {0.1, 1.0, 2.0, 3.0})
        for (double phi : {-3.0, -1.0, 0.0, 2.5}) {
            auto a = array_response(g, theta, phi);
            for (int i = 0; i < a.size(); ++i) CHECK(std::abs(a(i)) == Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("azimuth rotation by one element permutes the ring") {
    // Symmetry oracle: rotating the arrival azimuth by the angular pitch of the
    // ring must act on element phases as a cyclic shift.
    auto g = tiny_isotropic();
    const double pitch = 2.0 * M_PI / g.elements_per_ring;
    auto a = array_response(g, M_PI / 3.0, 0.7);
    auto b = array_response(g, M_PI / 3.0, 0.7 + pitch);
    for (int e = 0; e < 4; ++e) CHECK(std::abs(b((e + 1) % 4) - a(e)) < 1e-12);
}

TEST_CASE("second polarization is the quadrature copy") {
    auto g = tiny_isotropic();
    g.polarizations = 2;
    auto a = array_response(g, 1.1, -0.4);
    const std::complex<double> j(0.0, 1.0);
    for (int e = 0; e < 4; ++e) {
        CHECK(std::abs(a(g.port_index(0, e, 1)) - j * a(g.port_index(0, e, 0))) < 1e-12);
    }
}

TEST_CASE("ring spacing enters through the elevation term") {
    auto g = tiny_isotropic();
    g.rings = 2;
    g.ring_spacing = 0.5; // half wavelength; rings sit at z = -0.25 and +0.25
    auto a = array_response(g, M_PI / 4.0, 0.0);
    // Phase difference between matching elements of the two rings is
    // k * cos(theta) * spacing.
    const double expect = 2.0 * M_PI * std::cos(M_PI / 4.0) * 0.5;
    const auto ratio = a(g.port_index(1, 0, 0)) / a(g.port_index(0, 0, 0));
    CHECK(std::arg(ratio) == Approx(expect).epsilon(1e-9));
    // At theta = pi/2 the elevation term vanishes and rings are identical.
    auto h = array_response(g, M_PI / 2.0, 0.3);
    for (int e = 0; e < 4; ++e)
        CHECK(std::abs(h(g.port_index(1, e, 0)) - h(g.port_index(0, e, 0))) < 1e-12);
}

TEST_CASE("directivity dims elements facing away") {
    auto g = tiny_isotropic();
    g.directivity_exponent = 2.0;
    auto a = array_response(g, M_PI / 2.0, 0.0);
    CHECK(std::abs(a(0)) == Approx(1.0).epsilon(1e-12));   // boresight element
    CHECK(std::abs(a(2)) == Approx(1e-3).epsilon(1e-9));   // back element at the floor
    CHECK(std::abs(a(1)) == Approx(1e-3).epsilon(1e-9));   // orthogonal: cos = 0
    CHECK(std::abs(a(1)) > 0.0);                           // but never fully dead
}

TEST_CASE("angle validation") {
    auto g = tiny_isotropic();
    CHECK_THROWS_AS(array_response(g, -0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(array_response(g, M_PI + 0.1, 0.0), std::domain_error);
    CHECK_THROWS_AS(array_response(g, std::nan(""), 0.0), std::domain_error);
    CHECK_THROWS_AS(array_response(g, 1.0, std::nan("")), std::domain_error);
    // phi wraps instead of throwing
    auto a = array_response(g, 1.0, 0.3);
    auto b = array_response(g, 1.0, 0.3 + 2.0 * M_PI);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a(i) - b(i)) < 1e-12);
}

TEST_CASE("geometry validation") {
    ArrayGeometry g;
    g.rings = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = ArrayGeometry{};
    g.polarizations = 3;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = ArrayGeometry{};
    g.ring_radius = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = ArrayGeometry{};
    g.carrier_frequency = -1.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    CHECK_NOTHROW(ArrayGeometry{}.validate());
}

TEST_CASE("angle grid from steps") {
    auto g = AngleGrid::from_steps(M_PI / 6.0, M_PI / 4.0);
    CHECK(g.n_theta == 7); // both poles included
    CHECK(g.n_phi == 8);
    CHECK(g.columns() == 56);
    CHECK(g.theta(0) == Approx(0.0));
    CHECK(g.theta(6) == Approx(M_PI));
    CHECK(g.phi(0) == Approx(-M_PI));
    CHECK(g.phi(7) == Approx(-M_PI + 7.0 * M_PI / 4.0));
    CHECK_THROWS_AS(AngleGrid::from_steps(0.33, M_PI), ConfigError);     // doesn't divide pi
    CHECK_THROWS_AS(AngleGrid::from_steps(M_PI / 4.0, 1.0), ConfigError); // doesn't divide 2pi
    CHECK_THROWS_AS(AngleGrid::from_steps(-1.0, 1.0), ConfigError);
}

TEST_CASE("antenna matrix columns match direct responses") {
    auto g = tiny_isotropic();
    auto am = build_antenna_matrix(g, M_PI / 4.0, M_PI / 2.0);
    CHECK(am.entries.rows() == 4);
    CHECK(am.entries.cols() == 5 * 4);
    auto direct = array_response(g, am.grid.theta(2), am.grid.phi(3));
    CHECK((am.entries.col(2 * 4 + 3) - direct).norm() < 1e-14);
}

TEST_CASE("delay matrix is a positive-frequency phase ramp") {
    std::vector<double> freqs = {-1.0e6, 0.0, 1.0e6};
    auto d = build_delay_matrix(freqs, 1e-7, 3);
    CHECK(d.entries.rows() == 3);
    CHECK(d.entries.cols() == 3);
    // Tap 0 is all ones.
    for (int s = 0; s < 3; ++s) CHECK(std::abs(d.entries(s, 0) - 1.0) < 1e-15);
    // Entry (s, t) = exp(+j 2 pi f_s tau_step t), checked by hand for s=2, t=2:
    // 2 pi * 1e6 * 1e-7 * 2 = 0.4 pi.
    const double w = 0.4 * M_PI;
    CHECK(d.entries(2, 2).real() == Approx(std::cos(w)).epsilon(1e-12));
    CHECK(d.entries(2, 2).imag() == Approx(std::sin(w)).epsilon(1e-12));
    // Negative frequency conjugates.
    CHECK(std::abs(d.entries(0, 2) - std::conj(d.entries(2, 2))) < 1e-15);
}

TEST_CASE("delay matrix validation") {
    CHECK_THROWS_AS(build_delay_matrix({}, 1e-7, 4), ConfigError);
    CHECK_THROWS_AS(build_delay_matrix({1.0, 1.0}, 1e-7, 4), ConfigError); // not increasing
    CHECK_THROWS_AS(build_delay_matrix({0.0, 1.0}, -1e-7, 4), ConfigError);
    CHECK_THROWS_AS(build_delay_matrix({0.0, 1.0}, 1e-7, 0), ConfigError);
}

} // TEST_SUITE
