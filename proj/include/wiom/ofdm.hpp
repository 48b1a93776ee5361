#pragma once

#include <vector>

namespace wiom {

// OFDM measurement grid. Subcarrier frequencies are baseband offsets centred on
// the carrier: f_s = (s - (S-1)/2) * spacing, so delay phases wrap symmetrically.
struct OfdmGrid {
    int subcarriers = 200;
    double subcarrier_spacing = 45e3; // Hz

    std::vector<double> frequencies() const {
        std::vector<double> f(static_cast<std::size_t>(subcarriers));
        const double mid = 0.5 * (subcarriers - 1);
        for (int s = 0; s < subcarriers; ++s) f[s] = (s - mid) * subcarrier_spacing;
        return f;
    }

    // Delay resolution that makes on-grid delays exactly orthogonal across taps.
    double default_tau_step() const { return 1.0 / (subcarriers * subcarrier_spacing); }

    void validate() const; // throws ConfigError
};

} // namespace wiom
