#include "wiom/channel_sim.hpp"

#include "wiom/error.hpp"
#include "wiom/rng.hpp"

#include <algorithm>
#include <cmath>

namespace wiom {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

struct Vec2 {
    double x = 0, y = 0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// One point of the base (un-offset) loop, parameterized by arc length.
struct BasePoint {
    Vec2 pos;
    Vec2 outward;     // unit outward normal
    bool two_lane;    // east or west straight (lane offset applies)
    double edge_s;    // arc position within the current segment
    double edge_len;  // segment length
};

struct LoopGeometry {
    double hw, hh, r;
    double len_ew; // east/west straight length
    double len_ns; // north/south straight length
    double arc;    // quarter-corner length
    double total;

    explicit LoopGeometry(const RouteConfig& c)
        : hw(0.5 * c.perimeter_width),
          hh(0.5 * c.perimeter_height),
          r(c.corner_radius),
          len_ew(c.perimeter_height - 2.0 * c.corner_radius),
          len_ns(c.perimeter_width - 2.0 * c.corner_radius),
          arc(0.5 * M_PI * c.corner_radius),
          total(2.0 * (len_ew + len_ns) + 4.0 * (0.5 * M_PI * c.corner_radius)) {}

    // CCW parameterization starting at the south end of the east edge.
    BasePoint at(double s) const {
        s = std::fmod(s, total);
        if (s < 0.0) s += total;

        auto straight = [](Vec2 start, Vec2 dir, Vec2 outward, bool two_lane, double es,
                           double el) {
            return BasePoint{start + es * dir, outward, two_lane, es, el};
        };
        auto corner = [this](Vec2 center, double a0, double es) {
            const double a = a0 + es / r;
            Vec2 outward{std::cos(a), std::sin(a)};
            return BasePoint{center + r * outward, outward, false, es, arc};
        };

        if (s < len_ew) return straight({hw, -(hh - r)}, {0, 1}, {1, 0}, true, s, len_ew);
        s -= len_ew;
        if (s < arc) return corner({hw - r, hh - r}, 0.0, s);
        s -= arc;
        if (s < len_ns) return straight({hw - r, hh}, {-1, 0}, {0, 1}, false, s, len_ns);
        s -= len_ns;
        if (s < arc) return corner({-(hw - r), hh - r}, 0.5 * M_PI, s);
        s -= arc;
        if (s < len_ew) return straight({-hw, hh - r}, {0, -1}, {-1, 0}, true, s, len_ew);
        s -= len_ew;
        if (s < arc) return corner({-(hw - r), -(hh - r)}, M_PI, s);
        s -= arc;
        if (s < len_ns) return straight({-(hw - r), -hh}, {1, 0}, {0, -1}, false, s, len_ns);
        s -= len_ns;
        return corner({hw - r, -(hh - r)}, 1.5 * M_PI, s);
    }
};

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Ramp from 0 at both segment ends to 1 in the middle.
double edge_ramp(double edge_s, double edge_len, double ramp_len) {
    const double up = smoothstep(edge_s / ramp_len);
    const double down = smoothstep((edge_len - edge_s) / ramp_len);
    return std::min(up, down);
}

struct LapTraj {
    const LoopGeometry* loop;
    const RouteConfig* cfg;
    bool ccw;
    double jitter_amp;
    double jitter_phase;

    // Position after travelling distance u along this lap (u in [0, loop length)).
    Vec2 pos(double u) const {
        double s = ccw ? u : loop->total - u; // CW laps traverse the loop backwards
        BasePoint bp = loop->at(s);
        double lateral = 0.0;
        if (bp.two_lane && cfg->lateral_lane_offset > 0.0) {
            const double ramp_len = std::min(6.0, bp.edge_len / 3.0);
            const double m = 0.5 * cfg->lateral_lane_offset * (ccw ? 1.0 : -1.0);
            lateral += m * edge_ramp(bp.edge_s, bp.edge_len, ramp_len);
        }
        if (jitter_amp > 0.0) {
            // Windowed to zero near the lap corner so the displaced path stays
            // continuous when the lap wraps.
            const double window =
                std::min(smoothstep(u / 3.0), smoothstep((loop->total - u) / 3.0));
            lateral += window * jitter_amp *
                       std::sin(2.0 * M_PI * u / cfg->lateral_jitter_wavelength + jitter_phase);
        }
        return bp.pos + lateral * bp.outward;
    }
};

// 2-D segment intersection (proper or touching).
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const Vec2 d1 = p2 - p1, d2 = q2 - q1;
    const double denom = cross(d1, d2);
    const Vec2 dq = q1 - p1;
    if (std::abs(denom) < 1e-12) {
        // Parallel: block only if collinear and overlapping.
        if (std::abs(cross(d1, dq)) > 1e-9) return false;
        const double len2 = dot(d1, d1);
        if (len2 == 0.0) return false;
        double t0 = dot(dq, d1) / len2;
        double t1 = dot(q2 - p1, d1) / len2;
        if (t0 > t1) std::swap(t0, t1);
        return t1 >= 0.0 && t0 <= 1.0;
    }
    const double t = cross(dq, d2) / denom;
    const double u = cross(dq, d1) / denom;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

bool path_blocked(Vec2 a, Vec2 b, const std::vector<WallSegment>& walls) {
    for (const WallSegment& w : walls) {
        if (segments_intersect(a, b, {w.x1, w.y1}, {w.x2, w.y2})) return true;
    }
    return false;
}

} // namespace

void OfdmGrid::validate() const {
    if (subcarriers < 1) throw ConfigError("need at least one subcarrier");
    if (!(subcarrier_spacing > 0.0)) throw ConfigError("subcarrier spacing must be positive");
}

void RouteConfig::validate() const {
    if (!(perimeter_width > 0.0) || !(perimeter_height > 0.0))
        throw ConfigError("degenerate perimeter: width and height must be positive");
    if (laps < 1) throw ConfigError("need at least one lap");
    if (ccw_laps < 0 || ccw_laps > laps) throw ConfigError("ccw_laps must be in [0, laps]");
    if (!(speed * snapshot_period > 0.0))
        throw ConfigError("speed * snapshot_period must be positive");
    if (corner_radius < 0.0) throw ConfigError("corner radius must be >= 0");
    if (2.0 * corner_radius > std::min(perimeter_width, perimeter_height))
        throw ConfigError("corner radius too large for the perimeter");
    if (lateral_lane_offset < 0.0) throw ConfigError("lane offset must be >= 0");
    if (lateral_jitter_amplitude < 0.0) throw ConfigError("jitter amplitude must be >= 0");
    if (lateral_jitter_amplitude > 0.0 && !(lateral_jitter_wavelength > 0.0))
        throw ConfigError("jitter wavelength must be positive");
}

double RouteConfig::loop_length() const {
    return 2.0 * (perimeter_width - 2.0 * corner_radius) +
           2.0 * (perimeter_height - 2.0 * corner_radius) + 2.0 * M_PI * corner_radius;
}

std::vector<RoutePoint> generate_route(const RouteConfig& config) {
    config.validate();
    const LoopGeometry loop(config);
    const double step = config.speed * config.snapshot_period;

    std::vector<RoutePoint> route;
    for (int lap = 0; lap < config.laps; ++lap) {
        LapTraj traj;
        traj.loop = &loop;
        traj.cfg = &config;
        traj.ccw = lap < config.ccw_laps;
        traj.jitter_amp = 0.0;
        traj.jitter_phase = 0.0;
        if (config.lateral_jitter_amplitude > 0.0) {
            Rng rng(mix_seed(config.seed, 0x5a9, static_cast<std::uint64_t>(lap)));
            traj.jitter_amp = config.lateral_jitter_amplitude * rng.uniform(0.7, 1.3);
            traj.jitter_phase = rng.uniform(0.0, 2.0 * M_PI);
        }

        const double du = 0.25 * std::min(step, 1.0);
        const auto per_lap = static_cast<std::size_t>(std::ceil(loop.total / step - 1e-9));
        for (std::size_t k = 0; k < per_lap; ++k) {
            const double u = static_cast<double>(k) * step;
            const Vec2 p_prev = traj.pos(std::max(0.0, u - du));
            const Vec2 p_next = traj.pos(std::min(loop.total, u + du));
            const Vec2 p = traj.pos(u);
            const Vec2 d = p_next - p_prev;
            const double heading = compass_bearing(d.x, d.y) * kDegPerRad;
            route.push_back({Pose(p.x, p.y, heading), static_cast<std::uint32_t>(lap)});
        }
    }
    return route;
}

void SceneConfig::validate() const {
    if (base_stations.empty()) throw ConfigError("scene needs at least one base station");
    for (const BaseStation& bs : base_stations) {
        if (bs.id.empty()) throw ConfigError("base station id must be non-empty");
        if (!(bs.height > 0.0)) throw ConfigError("base station height must be positive");
    }
    for (std::size_t i = 0; i < base_stations.size(); ++i)
        for (std::size_t j = i + 1; j < base_stations.size(); ++j)
            if (base_stations[i].id == base_stations[j].id)
                throw ConfigError("duplicate base station id: " + base_stations[i].id);
    for (const WallSegment& w : wall_segments) {
        if (w.reflection_loss_db < 0.0) throw ConfigError("reflection loss must be >= 0 dB");
        if (w.x1 == w.x2 && w.y1 == w.y2) throw ConfigError("zero-length wall segment");
    }
    if (diffuse_scatterer_count < 0) throw ConfigError("scatterer count must be >= 0");
    if (!(carrier_frequency > 0.0)) throw ConfigError("carrier frequency must be positive");
    if (!(rx_height > 0.0)) throw ConfigError("rx height must be positive");
    if (timing_jitter_std < 0.0) throw ConfigError("timing jitter must be >= 0");
}

const BaseStation& SceneConfig::find_bs(const std::string& id) const {
    for (const BaseStation& bs : base_stations)
        if (bs.id == id) return bs;
    throw ConfigError("unknown base station id: " + id);
}

namespace {

struct Scatterer {
    Vec2 pos;
    double z;
    double phase;
};

std::vector<Scatterer> scene_scatterers(const SceneConfig& scene) {
    std::vector<Scatterer> out;
    if (scene.diffuse_scatterer_count <= 0) return out;

    // Scatterers live in the bounding box of the scene's solid geometry.
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    auto grow = [&](double x, double y) {
        if (first) {
            xmin = xmax = x;
            ymin = ymax = y;
            first = false;
        } else {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    };
    for (const WallSegment& w : scene.wall_segments) {
        grow(w.x1, w.y1);
        grow(w.x2, w.y2);
    }
    for (const BaseStation& bs : scene.base_stations) grow(bs.x_e, bs.x_n);
    if (first) grow(0.0, 0.0);
    const double pad = 5.0;

    Rng pos_rng(mix_seed(scene.seed, 0x5ca7));
    Rng phase_rng(mix_seed(scene.seed, 0x9a5e, scene.scatter_phase_stream));
    out.reserve(static_cast<std::size_t>(scene.diffuse_scatterer_count));
    for (int i = 0; i < scene.diffuse_scatterer_count; ++i) {
        Scatterer sc;
        sc.pos.x = pos_rng.uniform(xmin - pad, xmax + pad);
        sc.pos.y = pos_rng.uniform(ymin - pad, ymax + pad);
        sc.z = pos_rng.uniform(scene.rx_height, scene.rx_height + 12.0);
        sc.phase = phase_rng.uniform(0.0, 2.0 * M_PI);
        out.push_back(sc);
    }
    return out;
}

// Arrival described in world coordinates, rotated into the vehicle frame.
MultipathComponent make_component(std::complex<double> gain, double delay, Vec2 arrival_from,
                                  Vec2 vehicle, double dz, double dist3, double gamma_deg) {
    MultipathComponent mc;
    mc.gain = gain;
    mc.delay = delay;
    const Vec2 d = arrival_from - vehicle;
    const double bearing = compass_bearing(d.x, d.y);
    mc.azimuth = normalize_angle(bearing - gamma_deg * kRadPerDeg);
    mc.elevation = std::acos(std::clamp(dz / dist3, -1.0, 1.0)); // polar from zenith
    return mc;
}

} // namespace

std::vector<MultipathComponent> synthesize_paths(const Pose& pose, const SceneConfig& scene,
                                                 const std::string& bs_id) {
    scene.validate();
    const BaseStation& bs = scene.find_bs(bs_id);
    const Vec2 v{pose.x_e, pose.x_n};
    const Vec2 b{bs.x_e, bs.x_n};
    const double dz = bs.height - scene.rx_height;
    const double fc = scene.carrier_frequency;

    std::vector<MultipathComponent> out;

    // LOS
    if (!bs.blocked_los && !path_blocked(b, v, scene.wall_segments)) {
        const double d3 = std::sqrt(dot(b - v, b - v) + dz * dz);
        const double tau = d3 / kSpeedOfLight;
        const std::complex<double> gain =
            (1.0 / d3) * std::exp(std::complex<double>(0.0, -2.0 * M_PI * fc * tau));
        out.push_back(make_component(gain, tau, b, v, dz, d3, pose.gamma));
    }

    // Image-method reflections, one per visible wall.
    for (const WallSegment& w : scene.wall_segments) {
        const Vec2 w1{w.x1, w.y1}, w2{w.x2, w.y2};
        const Vec2 wd = w2 - w1;
        const double side_b = cross(wd, b - w1);
        const double side_v = cross(wd, v - w1);
        if (side_b * side_v <= 1e-12) continue; // opposite sides or degenerate

        // Mirror the BS across the wall's infinite line.
        const double len2 = dot(wd, wd);
        const double t = dot(b - w1, wd) / len2;
        const Vec2 foot = w1 + t * wd;
        const Vec2 img = b + 2.0 * (foot - b);

        // Specular point: intersection of img->v with the wall segment.
        const Vec2 iv = v - img;
        const double denom = cross(iv, wd);
        if (std::abs(denom) < 1e-12) continue;
        const double u = cross(w1 - img, wd) / denom; // along img->v
        const double wt = cross(w1 - img, iv) / denom; // along the wall
        if (u <= 0.0 || u >= 1.0 || wt < 0.0 || wt > 1.0) continue;

        const double d3 = std::sqrt(dot(iv, iv) + dz * dz); // unfolded path length
        const double tau = d3 / kSpeedOfLight;
        const double amp = std::pow(10.0, -w.reflection_loss_db / 20.0) / d3;
        const std::complex<double> gain =
            amp * std::exp(std::complex<double>(0.0, -2.0 * M_PI * fc * tau));
        // The arrival direction points at the specular point; img, the specular
        // point and the vehicle are collinear by construction.
        out.push_back(make_component(gain, tau, img, v, dz, d3, pose.gamma));
    }

    // Diffuse scatterers: fixed positions, seeded phases, no occlusion test.
    const double scatter_amp = std::pow(10.0, scene.scatterer_gain_db / 20.0);
    constexpr double kScatterRefDistance = 100.0; // normalizes the two-hop spreading product
    for (const Scatterer& sc : scene_scatterers(scene)) {
        const double zb = sc.z - bs.height;
        const double zv = sc.z - scene.rx_height;
        const double d1 = std::sqrt(dot(sc.pos - b, sc.pos - b) + zb * zb);
        const double d2 = std::sqrt(dot(sc.pos - v, sc.pos - v) + zv * zv);
        if (d1 < 0.5 || d2 < 0.5) continue;
        const double tau = (d1 + d2) / kSpeedOfLight;
        const double amp = scatter_amp * kScatterRefDistance / (d1 * d2);
        const std::complex<double> gain =
            amp * std::exp(std::complex<double>(0.0, -2.0 * M_PI * fc * tau + sc.phase));
        const double d3v = d2;
        out.push_back(make_component(gain, tau, sc.pos, v, zv, d3v, pose.gamma));
    }

    return out;
}

Eigen::MatrixXcd synthesize_csi(const std::vector<MultipathComponent>& paths,
                                const ArrayGeometry& geometry,
                                const std::vector<double>& subcarrier_frequencies,
                                const NoiseSpec& noise) {
    geometry.validate();
    if (subcarrier_frequencies.empty()) throw ConfigError("need a non-empty frequency list");
    const int s_count = static_cast<int>(subcarrier_frequencies.size());
    const int m_count = geometry.ports();

    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(s_count, m_count);
    Eigen::VectorXcd phase(s_count);
    for (const MultipathComponent& p : paths) {
        const Eigen::VectorXcd a = array_response(geometry, p.elevation, p.azimuth);
        const double tau = p.delay + noise.timing_offset;
        for (int s = 0; s < s_count; ++s) {
            phase(s) = std::exp(
                std::complex<double>(0.0, -2.0 * M_PI * subcarrier_frequencies[s] * tau));
        }
        f.noalias() += (p.gain * phase) * a.transpose();
    }

    if (!paths.empty() && noise.noise_floor_db > -300.0) {
        double strongest = 0.0;
        for (const MultipathComponent& p : paths) strongest = std::max(strongest, std::abs(p.gain));
        const double sigma = strongest * std::pow(10.0, noise.noise_floor_db / 20.0);
        Rng rng(noise.seed);
        for (int s = 0; s < s_count; ++s)
            for (int m = 0; m < m_count; ++m) f(s, m) += sigma * rng.complex_gaussian();
    }
    return f;
}

Dataset simulate(const RouteConfig& route, const SceneConfig& scene, const OfdmGrid& grid,
                 const ArrayGeometry& geometry) {
    route.validate();
    scene.validate();
    grid.validate();
    geometry.validate();

    const std::vector<RoutePoint> points = generate_route(route);
    const std::vector<double> freqs = grid.frequencies();
    const std::size_t n = points.size();
    const std::size_t rec = static_cast<std::size_t>(grid.subcarriers) *
                            static_cast<std::size_t>(geometry.ports());

    Dataset ds;
    ds.storage = DatasetStorage::CSI;
    ds.grid = grid;
    ds.geometry = geometry;
    ds.record_dims = {static_cast<std::size_t>(grid.subcarriers),
                      static_cast<std::size_t>(geometry.ports())};
    for (const BaseStation& bs : scene.base_stations) ds.bs_ids.push_back(bs.id);
    ds.csi.assign(ds.bs_ids.size(), std::vector<std::complex<float>>(n * rec));
    ds.poses.reserve(n);
    ds.lap_index.reserve(n);
    ds.snapshot_index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.poses.push_back(points[i].pose);
        ds.lap_index.push_back(points[i].lap_index);
        ds.snapshot_index.push_back(static_cast<std::uint32_t>(i));
    }

    SceneConfig lap_scene = scene;
    for (std::size_t i = 0; i < n; ++i) {
        lap_scene.scatter_phase_stream =
            scene.per_lap_scatter_phases ? points[i].lap_index : scene.scatter_phase_stream;
        for (std::size_t b = 0; b < ds.bs_ids.size(); ++b) {
            const auto paths = synthesize_paths(points[i].pose, lap_scene, ds.bs_ids[b]);
            NoiseSpec ns;
            ns.noise_floor_db = scene.noise_floor_db;
            ns.seed = mix_seed(scene.seed, i, b);
            if (scene.timing_jitter_std > 0.0) {
                Rng jitter(mix_seed(scene.seed, i, 0x7137 + b));
                ns.timing_offset = scene.timing_jitter_std * jitter.gaussian();
            }
            const Eigen::MatrixXcd f = synthesize_csi(paths, geometry, freqs, ns);
            std::complex<float>* dst = ds.csi[b].data() + i * rec;
            for (int s = 0; s < grid.subcarriers; ++s)
                for (int m = 0; m < geometry.ports(); ++m)
                    dst[static_cast<std::size_t>(s) * geometry.ports() + m] =
                        std::complex<float>(static_cast<float>(f(s, m).real()),
                                            static_cast<float>(f(s, m).imag()));
        }
    }

    ds.validate();
    return ds;
}

} // namespace wiom
