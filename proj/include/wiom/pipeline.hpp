#pragma once

#include "wiom/dataset.hpp"
#include "wiom/wiometrics.hpp"

#include <string>

namespace wiom {

// Matched-filter grid parameters (MFAD only).
struct MfGridConfig {
    double delta_theta_deg = 10.0; // elevation grid step
    double delta_phi_deg = 2.4;    // azimuth grid step
    int taps = 90;                 // delay bins
    double tau_step = 0.0;         // seconds per bin; 0 = 1 / (S * subcarrier_spacing)

    void validate() const; // throws ConfigError
};

struct TransformOptions {
    BdirConfig bdir;
    MfGridConfig mf;
};

// Applies one wiometric transform to every snapshot of a raw-CSI dataset.
// MFAD builds a single antenna/delay matrix pair shared across all snapshots.
// Refuses datasets that already carry a wiometric kind tag.
Dataset transform_dataset(const Dataset& csi_ds, WiometricKind kind,
                          const TransformOptions& opt);

} // namespace wiom
