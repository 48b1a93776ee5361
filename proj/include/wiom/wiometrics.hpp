#pragma once

#include "wiom/array.hpp"

#include <Eigen/Dense>

#include <string>

namespace wiom {

// The four channel representations derived from a CSI snapshot F (subcarriers x ports).
enum class WiometricKind { ACSI, CCSI, BDIR, MFAD };

std::string kind_name(WiometricKind k);
WiometricKind kind_from_name(const std::string& name); // throws ConfigError

// Beam-domain decimated impulse response configuration. Rows are the magnitudes
// of frequency autocorrelations at lags delta_dec, 2*delta_dec, ..., delta_max,
// each lag-l sum running over min(delta_max, S - lag) products so any S > delta_max
// is accepted; when S >= 2*delta_max every sum has the full delta_max terms.
struct BdirConfig {
    int delta_max = 128;
    int delta_dec = 4;

    int rows() const { return delta_max / delta_dec; }
    void validate() const; // throws ConfigError
};

// |F|: subcarriers x ports.
Eigen::MatrixXd acsi(const Eigen::MatrixXcd& f);

// Column-interleaved real/imaginary parts: subcarriers x 2*ports, with
// columns (2m, 2m+1) holding (Re, Im) of port m.
Eigen::MatrixXd ccsi(const Eigen::MatrixXcd& f);

// Exact inverse of ccsi (used to validate the interleave layout).
Eigen::MatrixXcd ccsi_inverse(const Eigen::MatrixXd& y);

// Unnormalized 2-D DFT over the ring and element-within-ring axes, applied per
// subcarrier and polarization. Preserves the port ordering contract, so output
// beam (k1, k2, p) lives at the same index pattern as input (ring, element, p).
Eigen::MatrixXcd beam_transform(const Eigen::MatrixXcd& f, const ArrayGeometry& geo);

// BDIR: rows() x ports matrix of |R_lag| per beam-domain column.
Eigen::MatrixXd bdir(const Eigen::MatrixXcd& f, const ArrayGeometry& geo, const BdirConfig& cfg);

// Matched-filter power delay profile over the angle grid of A and the delay
// taps of D: flat (n_theta*n_phi) x taps complex scores, row g = a * n_phi + b.
struct MfpdTensor {
    Eigen::MatrixXcd flat;
    AngleGrid grid;

    std::complex<double> at(int a, int b, int t) const { return flat(a * grid.n_phi + b, t); }
};

MfpdTensor mfpd(const Eigen::MatrixXcd& f, const AntennaMatrix& a, const DelayMatrix& d);

// MFAD: incoherent sum of |MFPD| over the elevation axis -> n_phi x taps.
Eigen::MatrixXd mfad(const Eigen::MatrixXcd& f, const AntennaMatrix& a, const DelayMatrix& d);
Eigen::MatrixXd mfad_from_mfpd(const MfpdTensor& y);

} // namespace wiom
