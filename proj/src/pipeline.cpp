#include "wiom/pipeline.hpp"

#include "wiom/error.hpp"

#include <cmath>

namespace wiom {

void MfGridConfig::validate() const {
    if (!(delta_theta_deg > 0.0) || !(delta_phi_deg > 0.0))
        throw ConfigError("matched-filter grid steps must be positive");
    if (taps < 1) throw ConfigError("matched-filter taps must be >= 1");
    if (tau_step < 0.0) throw ConfigError("tau_step must be >= 0 (0 selects the grid default)");
}

Dataset transform_dataset(const Dataset& csi_ds, WiometricKind kind,
                          const TransformOptions& opt) {
    if (csi_ds.storage != DatasetStorage::CSI)
        throw ConfigError("dataset already holds wiometric '" + kind_name(csi_ds.kind) +
                          "'; transforms apply to raw CSI only");
    csi_ds.validate();

    Dataset out;
    out.storage = DatasetStorage::Wiometric;
    out.kind = kind;
    out.grid = csi_ds.grid;
    out.geometry = csi_ds.geometry;
    out.bs_ids = csi_ds.bs_ids;
    out.poses = csi_ds.poses;
    out.lap_index = csi_ds.lap_index;
    out.snapshot_index = csi_ds.snapshot_index;
    out.provenance = csi_ds.provenance;
    out.provenance["transform"] = kind_name(kind);

    const std::size_t n = csi_ds.record_count();

    AntennaMatrix am;
    DelayMatrix dm;
    if (kind == WiometricKind::MFAD) {
        opt.mf.validate();
        const double tau =
            opt.mf.tau_step > 0.0 ? opt.mf.tau_step : csi_ds.grid.default_tau_step();
        am = build_antenna_matrix(csi_ds.geometry, opt.mf.delta_theta_deg * kRadPerDeg,
                                  opt.mf.delta_phi_deg * kRadPerDeg);
        dm = build_delay_matrix(csi_ds.grid.frequencies(), tau, opt.mf.taps);
        out.provenance["mf_grid"] = {{"delta_theta_deg", opt.mf.delta_theta_deg},
                                     {"delta_phi_deg", opt.mf.delta_phi_deg},
                                     {"taps", opt.mf.taps},
                                     {"tau_step", tau}};
    } else if (kind == WiometricKind::BDIR) {
        opt.bdir.validate();
        out.provenance["bdir"] = {{"delta_max", opt.bdir.delta_max},
                                  {"delta_dec", opt.bdir.delta_dec}};
    }

    bool dims_set = false;
    for (std::size_t b = 0; b < csi_ds.bs_ids.size(); ++b) {
        std::vector<float> feats;
        for (std::size_t rec = 0; rec < n; ++rec) {
            const Eigen::MatrixXcd f = csi_ds.csi_record(b, rec);
            Eigen::MatrixXd y;
            switch (kind) {
            case WiometricKind::ACSI: y = acsi(f); break;
            case WiometricKind::CCSI: y = ccsi(f); break;
            case WiometricKind::BDIR: y = bdir(f, csi_ds.geometry, opt.bdir); break;
            case WiometricKind::MFAD: y = mfad(f, am, dm); break;
            }
            if (!dims_set) {
                out.record_dims = {static_cast<std::size_t>(y.rows()),
                                   static_cast<std::size_t>(y.cols())};
                dims_set = true;
            }
            for (Eigen::Index r = 0; r < y.rows(); ++r)
                for (Eigen::Index c = 0; c < y.cols(); ++c)
                    feats.push_back(static_cast<float>(y(r, c)));
        }
        out.features.push_back(std::move(feats));
    }
    if (!dims_set) throw ConfigError("cannot transform an empty dataset");
    out.validate();
    return out;
}

} // namespace wiom
