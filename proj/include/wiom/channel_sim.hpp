#pragma once

#include "wiom/array.hpp"
#include "wiom/dataset.hpp"
#include "wiom/ofdm.hpp"
#include "wiom/pose.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace wiom {

// Closed-loop drive around a rounded rectangle, multiple laps in both
// directions. East/west edges are two-lane: the CW and CCW tracks run offset
// lanes there. Optional per-lap lateral jitter makes each lap trace a slightly
// different curve, so whole-lap holdouts genuinely see unvisited poses.
struct RouteConfig {
    double perimeter_width = 100.0;  // metres, east-west extent of the loop
    double perimeter_height = 100.0; // metres, north-south extent
    int laps = 4;
    int ccw_laps = 2; // first ccw_laps laps run counterclockwise, the rest clockwise
    double speed = 1.0;             // m/s
    double snapshot_period = 0.075; // seconds between snapshots
    double lateral_lane_offset = 3.0; // metres between the two lanes on east/west edges
    double corner_radius = 6.0;       // metres
    double lateral_jitter_amplitude = 0.0;  // metres; 0 disables per-lap wander
    double lateral_jitter_wavelength = 29.0; // metres along the path
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
    double loop_length() const;
};

struct RoutePoint {
    Pose pose;
    std::uint32_t lap_index = 0;
};

std::vector<RoutePoint> generate_route(const RouteConfig& config);

struct WallSegment {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0; // endpoints, metres (east, north)
    double reflection_loss_db = 6.0;
};

struct BaseStation {
    std::string id;
    double x_e = 0.0;
    double x_n = 0.0;
    double height = 20.0;    // metres above ground
    bool blocked_los = false; // forces NLOS regardless of wall occlusion
};

struct SceneConfig {
    std::vector<BaseStation> base_stations;
    std::vector<WallSegment> wall_segments;
    int diffuse_scatterer_count = 0;
    double scatterer_gain_db = -20.0; // amplitude scale of diffuse components
    double noise_floor_db = -300.0;   // dB relative to the strongest path; <= -300 disables
    double carrier_frequency = 2.66e9; // Hz; sets the carrier phase folded into path gains
    double rx_height = 2.0;            // vehicle antenna height, metres
    double timing_jitter_std = 0.0;    // seconds; per-snapshot timing offset (default: synced)
    bool per_lap_scatter_phases = false; // re-roll diffuse phases each lap
    std::uint64_t seed = 1;
    // Stream selector for diffuse-scatterer phases; simulate() points it at the
    // lap index when per_lap_scatter_phases is set. Not a user-facing knob.
    std::uint64_t scatter_phase_stream = 0;

    void validate() const; // throws ConfigError
    const BaseStation& find_bs(const std::string& id) const; // throws ConfigError
};

struct MultipathComponent {
    std::complex<double> gain; // linear amplitude with carrier phase folded in
    double delay = 0.0;        // seconds, absolute propagation delay
    double azimuth = 0.0;      // radians, arrival azimuth in the vehicle frame
    double elevation = 0.0;    // radians, polar arrival angle from zenith (array theta)
};

// Image-method single-bounce path list: optional LOS, one reflection per
// visible wall segment, plus seeded diffuse scatterers. Arrival azimuths are in
// the vehicle frame (world bearing minus heading).
std::vector<MultipathComponent> synthesize_paths(const Pose& pose, const SceneConfig& scene,
                                                 const std::string& bs_id);

struct NoiseSpec {
    double noise_floor_db = -300.0; // dB relative to strongest path; <= -300 disables
    std::uint64_t seed = 0;
    double timing_offset = 0.0; // seconds added to every path delay (sync jitter)
};

// F[s,m] = sum_p gain_p * a_m(theta_p, phi_p) * exp(-j 2 pi f_s tau_p) + noise.
// The -j here pairs with the +j delay dictionary so matched filtering peaks at
// the true delay bin.
Eigen::MatrixXcd synthesize_csi(const std::vector<MultipathComponent>& paths,
                                const ArrayGeometry& geometry,
                                const std::vector<double>& subcarrier_frequencies,
                                const NoiseSpec& noise);

// End-to-end: route -> per-pose, per-BS CSI snapshots with per-snapshot noise
// streams derived from (seed, snapshot_index, bs_index), so results do not
// depend on evaluation order. Byte-exact reproducible from the configs.
Dataset simulate(const RouteConfig& route, const SceneConfig& scene, const OfdmGrid& grid,
                 const ArrayGeometry& geometry);

} // namespace wiom
