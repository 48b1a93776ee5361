#include "wiom/wiometrics.hpp"

#include "wiom/error.hpp"

#include <cmath>

namespace wiom {

std::string kind_name(WiometricKind k) {
    switch (k) {
    case WiometricKind::ACSI: return "acsi";
    case WiometricKind::CCSI: return "ccsi";
    case WiometricKind::BDIR: return "bdir";
    case WiometricKind::MFAD: return "mfad";
    }
    return "?";
}

WiometricKind kind_from_name(const std::string& name) {
    if (name == "acsi") return WiometricKind::ACSI;
    if (name == "ccsi") return WiometricKind::CCSI;
    if (name == "bdir") return WiometricKind::BDIR;
    if (name == "mfad") return WiometricKind::MFAD;
    throw ConfigError("unknown wiometric kind: " + name + " (expected acsi|ccsi|bdir|mfad)");
}

void BdirConfig::validate() const {
    if (delta_dec < 1) throw ConfigError("bdir delta_dec must be >= 1");
    if (delta_max < delta_dec) throw ConfigError("bdir delta_max must be >= delta_dec");
}

Eigen::MatrixXd acsi(const Eigen::MatrixXcd& f) { return f.cwiseAbs(); }

Eigen::MatrixXd ccsi(const Eigen::MatrixXcd& f) {
    Eigen::MatrixXd y(f.rows(), 2 * f.cols());
    for (Eigen::Index m = 0; m < f.cols(); ++m) {
        y.col(2 * m) = f.col(m).real();
        y.col(2 * m + 1) = f.col(m).imag();
    }
    return y;
}

Eigen::MatrixXcd ccsi_inverse(const Eigen::MatrixXd& y) {
    if (y.cols() % 2 != 0) throw ShapeError("ccsi matrix must have an even column count");
    Eigen::MatrixXcd f(y.rows(), y.cols() / 2);
    for (Eigen::Index m = 0; m < f.cols(); ++m) {
        f.col(m).real() = y.col(2 * m);
        f.col(m).imag() = y.col(2 * m + 1);
    }
    return f;
}

Eigen::MatrixXcd beam_transform(const Eigen::MatrixXcd& f, const ArrayGeometry& geo) {
    geo.validate();
    if (f.cols() != geo.ports())
        throw ShapeError("beam_transform: CSI has " + std::to_string(f.cols()) +
                         " ports, geometry declares " + std::to_string(geo.ports()));
    const int mi = geo.rings;
    const int mii = geo.elements_per_ring;
    const int pol = geo.polarizations;

    auto dft = [](int n) {
        Eigen::MatrixXcd w(n, n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                w(k, j) = std::exp(std::complex<double>(0.0, -2.0 * M_PI * k * j / n));
        return w;
    };
    const Eigen::MatrixXcd w1 = dft(mi);
    const Eigen::MatrixXcd w2 = dft(mii);

    Eigen::MatrixXcd out(f.rows(), f.cols());
    Eigen::MatrixXcd slab(mi, mii);
    for (Eigen::Index s = 0; s < f.rows(); ++s) {
        for (int p = 0; p < pol; ++p) {
            for (int r = 0; r < mi; ++r)
                for (int e = 0; e < mii; ++e) slab(r, e) = f(s, geo.port_index(r, e, p));
            const Eigen::MatrixXcd beams = w1 * slab * w2.transpose();
            for (int r = 0; r < mi; ++r)
                for (int e = 0; e < mii; ++e) out(s, geo.port_index(r, e, p)) = beams(r, e);
        }
    }
    return out;
}

Eigen::MatrixXd bdir(const Eigen::MatrixXcd& f, const ArrayGeometry& geo, const BdirConfig& cfg) {
    cfg.validate();
    const int s_count = static_cast<int>(f.rows());
    if (s_count <= cfg.delta_max)
        throw ShapeError("bdir: need more subcarriers than delta_max (" +
                         std::to_string(s_count) + " <= " + std::to_string(cfg.delta_max) + ")");
    const Eigen::MatrixXcd y = beam_transform(f, geo);
    const int rows = cfg.rows();
    Eigen::MatrixXd out(rows, y.cols());
    for (Eigen::Index m = 0; m < y.cols(); ++m) {
        for (int l = 1; l <= rows; ++l) {
            const int lag = l * cfg.delta_dec;
            const int terms = std::min(cfg.delta_max, s_count - lag);
            std::complex<double> acc(0.0, 0.0);
            for (int n = 0; n < terms; ++n) acc += y(n, m) * std::conj(y(n + lag, m));
            out(l - 1, m) = std::abs(acc);
        }
    }
    return out;
}

MfpdTensor mfpd(const Eigen::MatrixXcd& f, const AntennaMatrix& a, const DelayMatrix& d) {
    if (a.entries.rows() != f.cols())
        throw ShapeError("mfpd: antenna matrix covers " + std::to_string(a.entries.rows()) +
                         " ports, CSI has " + std::to_string(f.cols()));
    if (d.entries.rows() != f.rows())
        throw ShapeError("mfpd: delay matrix covers " + std::to_string(d.entries.rows()) +
                         " subcarriers, CSI has " + std::to_string(f.rows()));
    MfpdTensor y;
    y.grid = a.grid;
    // D already stores the conjugated delay response, so the matched filter is
    // a plain product: scores = A^H F^T D.
    y.flat = a.entries.adjoint() * (f.transpose() * d.entries);
    return y;
}

Eigen::MatrixXd mfad_from_mfpd(const MfpdTensor& y) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(y.grid.n_phi, y.flat.cols());
    for (int a = 0; a < y.grid.n_theta; ++a) {
        out += y.flat.middleRows(static_cast<Eigen::Index>(a) * y.grid.n_phi, y.grid.n_phi)
                   .cwiseAbs();
    }
    return out;
}

Eigen::MatrixXd mfad(const Eigen::MatrixXcd& f, const AntennaMatrix& a, const DelayMatrix& d) {
    return mfad_from_mfpd(mfpd(f, a, d));
}

} // namespace wiom
