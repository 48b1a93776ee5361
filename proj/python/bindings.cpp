#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wiom/channel_sim.hpp"
#include "wiom/container.hpp"
#include "wiom/error.hpp"
#include "wiom/eval.hpp"
#include "wiom/pipeline.hpp"
#include "wiom/presets.hpp"
#include "wiom/wiometrics.hpp"

namespace py = pybind11;
using namespace wiom;

namespace {

template <class Tensor>
py::array tensor_to_array(const Tensor& t) {
    using Scalar = typename std::decay_t<decltype(t.data)>::value_type;
    std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
    py::array_t<Scalar> out(shape);
    std::copy(t.data.begin(), t.data.end(), out.mutable_data());
    return out;
}

template <class Tensor, class Scalar>
Tensor array_to_tensor(const py::array& a) {
    auto arr = py::array_t<Scalar, py::array::c_style | py::array::forcecast>::ensure(a);
    Tensor t;
    t.dims.assign(arr.shape(), arr.shape() + arr.ndim());
    t.data.assign(arr.data(), arr.data() + arr.size());
    return t;
}

// Explicit numpy <-> Eigen copies; the pybind11 Eigen casters are avoided on
// purpose (they miscompile against this toolchain's Eigen and jump through a
// null dispatch slot at runtime).
Eigen::MatrixXcd to_cmat(const py::array& in) {
    auto a = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>::ensure(in);
    if (!a || a.ndim() != 2) throw ShapeError("expected a 2-d array");
    Eigen::MatrixXcd m(a.shape(0), a.shape(1));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
    return m;
}

Eigen::MatrixXd to_dmat(const py::array& in) {
    auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(in);
    if (!a || a.ndim() != 2) throw ShapeError("expected a 2-d array");
    Eigen::MatrixXd m(a.shape(0), a.shape(1));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
    return m;
}

template <class Mat>
py::array from_mat(const Mat& m) {
    using Scalar = typename Mat::Scalar;
    py::array_t<Scalar> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    auto w = out.template mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < m.rows(); ++i)
        for (py::ssize_t j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
    return out;
}

py::array from_cvec(const Eigen::VectorXcd& v) {
    py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(v.size()));
    auto w = out.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < v.size(); ++i) w(i) = v(i);
    return out;
}

py::array read_blob_py(const std::filesystem::path& path) {
    switch (blob_info(path).dtype) {
    case Dtype::f32: return tensor_to_array(read_blob_f32(path));
    case Dtype::c64: return tensor_to_array(read_blob_c64(path));
    case Dtype::u32: return tensor_to_array(read_blob_u32(path));
    case Dtype::f64: return tensor_to_array(read_blob_f64(path));
    }
    throw IoError("unreachable dtype");
}

void write_blob_py(const std::filesystem::path& path, const py::array& a) {
    const py::dtype dt = a.dtype();
    if (dt.is(py::dtype::of<float>()))
        write_blob(path, array_to_tensor<TensorF, float>(a));
    else if (dt.is(py::dtype::of<std::complex<float>>()))
        write_blob(path, array_to_tensor<TensorC, std::complex<float>>(a));
    else if (dt.is(py::dtype::of<std::uint32_t>()))
        write_blob(path, array_to_tensor<TensorU, std::uint32_t>(a));
    else if (dt.is(py::dtype::of<double>()))
        write_blob(path, array_to_tensor<TensorD, double>(a));
    else
        throw IoError("unsupported dtype for blob write (expected f32, c64, u32 or f64)");
}

} // namespace

PYBIND11_MODULE(_wiom, m) {
    m.doc() = "wiometric navigation pipeline: transforms, array models, channel "
              "simulation and metrics";

    py::register_exception<ConfigError>(m, "WiomConfigError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "WiomShapeError", PyExc_ValueError);
    py::register_exception<IoError>(m, "WiomIoError", PyExc_OSError);

    // ------------------------------------------------------------------ array
    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init<>())
        .def_readwrite("rings", &ArrayGeometry::rings)
        .def_readwrite("elements_per_ring", &ArrayGeometry::elements_per_ring)
        .def_readwrite("polarizations", &ArrayGeometry::polarizations)
        .def_readwrite("ring_radius", &ArrayGeometry::ring_radius)
        .def_readwrite("ring_spacing", &ArrayGeometry::ring_spacing)
        .def_readwrite("carrier_frequency", &ArrayGeometry::carrier_frequency)
        .def_readwrite("directivity_exponent", &ArrayGeometry::directivity_exponent)
        .def("ports", &ArrayGeometry::ports)
        .def("wavelength", &ArrayGeometry::wavelength)
        .def("port_index", &ArrayGeometry::port_index, py::arg("ring"), py::arg("element"),
             py::arg("pol"))
        .def("validate", &ArrayGeometry::validate);

    py::class_<AngleGrid>(m, "AngleGrid")
        .def_static("from_steps", &AngleGrid::from_steps, py::arg("delta_theta"),
                    py::arg("delta_phi"))
        .def_readonly("delta_theta", &AngleGrid::delta_theta)
        .def_readonly("delta_phi", &AngleGrid::delta_phi)
        .def_readonly("n_theta", &AngleGrid::n_theta)
        .def_readonly("n_phi", &AngleGrid::n_phi)
        .def("theta", &AngleGrid::theta, py::arg("a"))
        .def("phi", &AngleGrid::phi, py::arg("b"))
        .def("columns", &AngleGrid::columns);

    py::class_<AntennaMatrix>(m, "AntennaMatrix")
        .def_property_readonly("entries",
                               [](const AntennaMatrix& a) { return from_mat(a.entries); })
        .def_readonly("grid", &AntennaMatrix::grid);

    py::class_<DelayMatrix>(m, "DelayMatrix")
        .def_property_readonly("entries",
                               [](const DelayMatrix& d) { return from_mat(d.entries); })
        .def_readonly("tau_step", &DelayMatrix::tau_step)
        .def_readonly("frequencies", &DelayMatrix::frequencies);

    m.def(
        "array_response",
        [](const ArrayGeometry& geo, double theta, double phi) {
            return from_cvec(array_response(geo, theta, phi));
        },
        py::arg("geometry"), py::arg("theta"), py::arg("phi"));
    m.def("build_antenna_matrix", &build_antenna_matrix, py::arg("geometry"),
          py::arg("delta_theta"), py::arg("delta_phi"));
    m.def("build_delay_matrix", &build_delay_matrix, py::arg("subcarrier_frequencies"),
          py::arg("tau_step"), py::arg("taps"));

    // ------------------------------------------------------------------- ofdm
    py::class_<OfdmGrid>(m, "OfdmGrid")
        .def(py::init<>())
        .def_readwrite("subcarriers", &OfdmGrid::subcarriers)
        .def_readwrite("subcarrier_spacing", &OfdmGrid::subcarrier_spacing)
        .def("frequencies", &OfdmGrid::frequencies)
        .def("default_tau_step", &OfdmGrid::default_tau_step)
        .def("validate", &OfdmGrid::validate);

    // ------------------------------------------------------------- wiometrics
    py::class_<BdirConfig>(m, "BdirConfig")
        .def(py::init<>())
        .def_readwrite("delta_max", &BdirConfig::delta_max)
        .def_readwrite("delta_dec", &BdirConfig::delta_dec)
        .def("rows", &BdirConfig::rows)
        .def("validate", &BdirConfig::validate);

    m.def(
        "acsi", [](const py::array& f) { return from_mat(acsi(to_cmat(f))); }, py::arg("csi"));
    m.def(
        "ccsi", [](const py::array& f) { return from_mat(ccsi(to_cmat(f))); }, py::arg("csi"));
    m.def(
        "ccsi_inverse", [](const py::array& y) { return from_mat(ccsi_inverse(to_dmat(y))); },
        py::arg("interleaved"));
    m.def(
        "beam_transform",
        [](const py::array& f, const ArrayGeometry& geo) {
            return from_mat(beam_transform(to_cmat(f), geo));
        },
        py::arg("csi"), py::arg("geometry"));
    m.def(
        "bdir",
        [](const py::array& f, const ArrayGeometry& geo, const BdirConfig& cfg) {
            return from_mat(bdir(to_cmat(f), geo, cfg));
        },
        py::arg("csi"), py::arg("geometry"), py::arg("config"));
    m.def(
        "mfad",
        [](const py::array& f, const AntennaMatrix& a, const DelayMatrix& d) {
            return from_mat(mfad(to_cmat(f), a, d));
        },
        py::arg("csi"), py::arg("antenna_matrix"), py::arg("delay_matrix"));

    // ------------------------------------------------------------------ route
    py::class_<Pose>(m, "Pose")
        .def(py::init<>())
        .def(py::init<double, double, double>(), py::arg("x_e"), py::arg("x_n"),
             py::arg("gamma"))
        .def_readwrite("x_e", &Pose::x_e)
        .def_readwrite("x_n", &Pose::x_n)
        .def_readwrite("gamma", &Pose::gamma)
        .def("__repr__", [](const Pose& p) {
            return "Pose(x_e=" + std::to_string(p.x_e) + ", x_n=" + std::to_string(p.x_n) +
                   ", gamma=" + std::to_string(p.gamma) + ")";
        });

    py::class_<RouteConfig>(m, "RouteConfig")
        .def(py::init<>())
        .def_readwrite("perimeter_width", &RouteConfig::perimeter_width)
        .def_readwrite("perimeter_height", &RouteConfig::perimeter_height)
        .def_readwrite("laps", &RouteConfig::laps)
        .def_readwrite("ccw_laps", &RouteConfig::ccw_laps)
        .def_readwrite("speed", &RouteConfig::speed)
        .def_readwrite("snapshot_period", &RouteConfig::snapshot_period)
        .def_readwrite("lateral_lane_offset", &RouteConfig::lateral_lane_offset)
        .def_readwrite("corner_radius", &RouteConfig::corner_radius)
        .def_readwrite("lateral_jitter_amplitude", &RouteConfig::lateral_jitter_amplitude)
        .def_readwrite("lateral_jitter_wavelength", &RouteConfig::lateral_jitter_wavelength)
        .def_readwrite("seed", &RouteConfig::seed)
        .def("validate", &RouteConfig::validate)
        .def("loop_length", &RouteConfig::loop_length);

    py::class_<RoutePoint>(m, "RoutePoint")
        .def_readonly("pose", &RoutePoint::pose)
        .def_readonly("lap_index", &RoutePoint::lap_index);

    m.def("generate_route", &generate_route, py::arg("config"));

    // ---------------------------------------------------------------- metrics
    m.def("heading_error", py::overload_cast<double, double>(&heading_error), py::arg("pred_deg"),
          py::arg("truth_deg"));
    m.def("percentile", &percentile, py::arg("values"), py::arg("level"));

    // ---------------------------------------------------------------- presets
    m.def("network_preset_names", &network_preset_names);
    m.def("convention_name", &convention_name, py::arg("preset_name"), py::arg("param_count"));
    m.def("network_input_shape", [](const std::string& name) {
        return make_network_preset(name).input_shape;
    });
    m.def("network_param_count", [](const std::string& name) {
        return make_network_preset(name).param_count();
    });
    m.def("desk_config_json", [] { return run_config_to_json(desk_preset()).dump(1); });
    m.def("full_config_json", [] { return run_config_to_json(full_preset()).dump(1); });

    // -------------------------------------------------------------- container
    m.def("read_blob", &read_blob_py, py::arg("path"),
          "Load a WIOM container blob as a numpy array");
    m.def("write_blob", &write_blob_py, py::arg("path"), py::arg("array"),
          "Write a numpy array (f32/c64/u32/f64) as a WIOM container blob");
    m.def("file_checksum", &file_checksum, py::arg("path"));
}
