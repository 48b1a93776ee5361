#include "wiom/presets.hpp"

#include "wiom/error.hpp"

#include <cctype>
#include <cstdio>
#include <initializer_list>

namespace wiom {

namespace {

using L = LayerSpec;

struct PresetShape {
    std::size_t h = 0;
    std::size_t w = 0;
};

// Per-BS record shapes at the two scales. 'd' presets stack both BS channels.
PresetShape rep_shape(const std::string& rep, bool full) {
    if (rep == "acsi") return full ? PresetShape{200, 128} : PresetShape{64, 32};
    if (rep == "ccsi") return full ? PresetShape{200, 256} : PresetShape{64, 64};
    if (rep == "bdir") return full ? PresetShape{32, 128} : PresetShape{16, 32};
    if (rep == "mfad") return full ? PresetShape{150, 90} : PresetShape{96, 32};
    throw ConfigError("unknown representation '" + rep + "'");
}

void conv_block(std::vector<L>& out, int filters, bool pool) {
    out.push_back(L::conv2d(filters));
    out.push_back(L::relu());
    if (pool) out.push_back(L::maxpool());
}

void dense_tail(std::vector<L>& out, std::initializer_list<int> hidden) {
    out.push_back(L::flatten());
    for (int n : hidden) {
        out.push_back(L::dense(n));
        out.push_back(L::relu());
    }
    out.push_back(L::dense(4));
}

std::vector<L> cnn_layers(const std::string& rep, bool full) {
    std::vector<L> out;
    if (!full) {
        if (rep == "acsi" || rep == "mfad") {
            conv_block(out, 8, true);
            conv_block(out, 16, true);
            conv_block(out, 32, false);
        } else if (rep == "ccsi") {
            conv_block(out, 8, true);
            conv_block(out, 16, true);
            conv_block(out, 32, true);
        } else {
            // BDIR rows are autocorrelation lags and columns interleave
            // (beam, polarization); small kernels without early pooling keep
            // that fine structure.
            out.push_back(L::conv2d(12, 3));
            out.push_back(L::relu());
            out.push_back(L::conv2d(24, 3));
            out.push_back(L::relu());
            out.push_back(L::maxpool());
            dense_tail(out, {96, 64});
            return out;
        }
        dense_tail(out, {128, 64});
        return out;
    }
    if (rep == "acsi" || rep == "ccsi") {
        conv_block(out, 16, true);
        conv_block(out, 32, true);
        conv_block(out, 64, true);
        conv_block(out, 128, true);
        dense_tail(out, rep == "acsi" ? std::initializer_list<int>{256, 1024, 256, 128}
                                      : std::initializer_list<int>{128, 1024, 256, 128});
    } else if (rep == "bdir") {
        conv_block(out, 16, true);
        conv_block(out, 32, true);
        conv_block(out, 64, false);
        dense_tail(out, {512, 1024, 512, 128});
    } else { // mfad
        conv_block(out, 16, true);
        conv_block(out, 32, true);
        conv_block(out, 64, true);
        dense_tail(out, {256, 1024, 256, 128});
    }
    return out;
}

std::vector<L> fcnn_layers(const std::string& rep, bool full) {
    std::vector<L> out;
    if (!full) {
        if (rep == "acsi") dense_tail(out, {48, 96, 64});
        else if (rep == "ccsi") dense_tail(out, {24, 96, 64});
        else if (rep == "bdir") dense_tail(out, {160, 128, 64});
        else dense_tail(out, {32, 96, 64});
        return out;
    }
    if (rep == "acsi" || rep == "mfad") dense_tail(out, {512, 1024, 512, 128});
    else if (rep == "ccsi") dense_tail(out, {256, 1024, 512, 128});
    else dense_tail(out, {1024, 2048, 512, 128});
    return out;
}

struct ParsedName {
    std::string net, rep, variant, scale;
};

ParsedName parse_preset_name(const std::string& name) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : name) {
        if (c == '-') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    parts.push_back(cur);
    auto bad = [&]() -> ConfigError {
        std::string msg = "unknown network preset '" + name + "'; valid presets:";
        for (const auto& n : network_preset_names()) msg += " " + n;
        return ConfigError(msg);
    };
    if (parts.size() != 4) throw bad();
    ParsedName p{parts[0], parts[1], parts[2], parts[3]};
    if (p.net != "cnn" && p.net != "fcnn") throw bad();
    if (p.rep != "acsi" && p.rep != "ccsi" && p.rep != "bdir" && p.rep != "mfad") throw bad();
    if (p.variant != "s" && p.variant != "d") throw bad();
    if (p.scale != "desk" && p.scale != "full") throw bad();
    return p;
}

} // namespace

NetworkSpec make_network_preset(const std::string& name) {
    const ParsedName p = parse_preset_name(name);
    const bool full = p.scale == "full";
    const PresetShape sh = rep_shape(p.rep, full);
    const std::size_t channels = p.variant == "d" ? 2 : 1;
    NetworkSpec spec;
    spec.input_shape = {sh.h, sh.w, channels};
    spec.layers = p.net == "cnn" ? cnn_layers(p.rep, full) : fcnn_layers(p.rep, full);
    spec.shape_chain(); // sanity: every preset must chain cleanly
    return spec;
}

std::vector<std::string> network_preset_names() {
    std::vector<std::string> names;
    for (const char* net : {"cnn", "fcnn"})
        for (const char* rep : {"acsi", "ccsi", "bdir", "mfad"})
            for (const char* variant : {"s", "d"})
                for (const char* scale : {"desk", "full"})
                    names.push_back(std::string(net) + "-" + rep + "-" + variant + "-" + scale);
    return names;
}

std::string convention_name(const std::string& preset_name, std::size_t param_count) {
    const ParsedName p = parse_preset_name(preset_name);
    auto upper = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
    };
    const double millions = static_cast<double>(param_count) / 1e6;
    char buf[32];
    if (millions >= 10.0)
        std::snprintf(buf, sizeof buf, "%.0fM", millions);
    else
        std::snprintf(buf, sizeof buf, "%.1fM", millions);
    return upper(p.net) + "-" + upper(p.rep) + "-" + upper(p.variant) + "-" + buf;
}

void RunConfig::validate() const {
    route.validate();
    scene.validate();
    grid.validate();
    array.validate();
    bdir.validate();
    mf.validate();
    train.validate();
    make_network_preset(network);
    if (split != "leu" && split != "heu")
        throw ConfigError("split must be 'leu' or 'heu', got '" + split + "'");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");
    if (holdout_lap < 0) throw ConfigError("holdout_lap must be >= 0");
    if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
    for (const auto& id : bs_selection)
        if (id.empty()) throw ConfigError("bs_selection entries must be non-empty");
}

RunConfig desk_preset() {
    RunConfig rc;

    rc.grid.subcarriers = 64;
    rc.grid.subcarrier_spacing = 500e3;

    rc.array.rings = 2;
    rc.array.elements_per_ring = 8;
    rc.array.polarizations = 2;
    rc.array.ring_radius = 0.4;
    rc.array.ring_spacing = 0.3;
    rc.array.carrier_frequency = 500e6;
    rc.array.directivity_exponent = 2.0;

    rc.bdir.delta_max = 32;
    rc.bdir.delta_dec = 2;

    rc.mf.delta_theta_deg = 30.0;
    rc.mf.delta_phi_deg = 3.75;
    rc.mf.taps = 32;
    rc.mf.tau_step = 0.0;

    rc.route.perimeter_width = 50.0;
    rc.route.perimeter_height = 50.0;
    rc.route.laps = 4;
    rc.route.ccw_laps = 2;
    rc.route.speed = 2.0;
    rc.route.snapshot_period = 0.2;
    rc.route.lateral_lane_offset = 3.0;
    rc.route.corner_radius = 5.0;
    rc.route.lateral_jitter_amplitude = 0.5;
    rc.route.lateral_jitter_wavelength = 29.0;
    rc.route.seed = 7;

    rc.scene.base_stations = {
        {"A", -30.0, 12.0, 22.0, true},
        {"B", 29.0, -2.0, 18.0, false},
    };
    const double o = 32.0, i = 18.0;
    rc.scene.wall_segments = {
        {-o, -o, o, -o, 4.0}, {o, -o, o, o, 4.0},   {o, o, -o, o, 4.0},   {-o, o, -o, -o, 4.0},
        {-i, -i, i, -i, 6.0}, {i, -i, i, i, 6.0},   {i, i, -i, i, 6.0},   {-i, i, -i, -i, 6.0},
    };
    rc.scene.diffuse_scatterer_count = 24;
    rc.scene.scatterer_gain_db = -18.0;
    rc.scene.noise_floor_db = -18.0;
    rc.scene.carrier_frequency = 500e6;
    rc.scene.rx_height = 2.0;
    rc.scene.timing_jitter_std = 62e-9;
    rc.scene.per_lap_scatter_phases = true;
    rc.scene.seed = 11;

    rc.train.epochs = 80;
    rc.train.batch_size = 64;
    rc.train.learning_rate = 1e-3;
    rc.train.lr_decay = 0.98;
    rc.train.input_noise = 0.0;
    rc.train.w_head = 3.0;
    rc.train.position_scale = 10.0;
    rc.train.seed = 3;

    rc.network = "cnn-mfad-d-desk";
    rc.split = "leu";
    rc.test_fraction = 0.25;
    rc.split_seed = 17;
    rc.holdout_lap = 3;
    rc.stratify_by_lap = false;
    rc.knn_k = 5;
    return rc;
}

RunConfig full_preset() {
    RunConfig rc;

    rc.grid.subcarriers = 200;
    rc.grid.subcarrier_spacing = 45e3;

    // ArrayGeometry defaults are already the full-scale SUCA (4x16 dual-pol).
    rc.bdir.delta_max = 128;
    rc.bdir.delta_dec = 4;

    rc.mf.delta_theta_deg = 10.0;
    rc.mf.delta_phi_deg = 2.4;
    rc.mf.taps = 90;
    rc.mf.tau_step = 0.0;

    rc.route.perimeter_width = 100.0;
    rc.route.perimeter_height = 100.0;
    rc.route.laps = 4;
    rc.route.ccw_laps = 2;
    rc.route.speed = 1.0;
    rc.route.snapshot_period = 0.075;
    rc.route.lateral_lane_offset = 3.0;
    rc.route.corner_radius = 6.0;
    rc.route.lateral_jitter_amplitude = 0.5;
    rc.route.lateral_jitter_wavelength = 29.0;
    rc.route.seed = 7;

    rc.scene.base_stations = {
        {"A", -65.0, 25.0, 30.0, true},
        {"B", 62.0, -5.0, 25.0, false},
    };
    const double o = 70.0, i = 40.0;
    rc.scene.wall_segments = {
        {-o, -o, o, -o, 4.0}, {o, -o, o, o, 4.0},   {o, o, -o, o, 4.0},   {-o, o, -o, -o, 4.0},
        {-i, -i, i, -i, 6.0}, {i, -i, i, i, 6.0},   {i, i, -i, i, 6.0},   {-i, i, -i, -i, 6.0},
    };
    rc.scene.diffuse_scatterer_count = 48;
    rc.scene.scatterer_gain_db = -20.0;
    rc.scene.noise_floor_db = -25.0;
    rc.scene.carrier_frequency = 2.66e9;
    rc.scene.rx_height = 2.0;
    rc.scene.per_lap_scatter_phases = true;
    rc.scene.seed = 11;

    rc.train.epochs = 60;
    rc.train.batch_size = 64;
    rc.train.learning_rate = 1e-3;
    rc.train.lr_decay = 0.97;
    rc.train.input_noise = 0.25;
    rc.train.position_scale = 100.0;
    rc.train.seed = 3;

    rc.network = "cnn-mfad-s-full";
    rc.split = "leu";
    rc.test_fraction = 0.25;
    rc.split_seed = 17;
    rc.holdout_lap = 3;
    rc.stratify_by_lap = false;
    rc.knn_k = 5;
    return rc;
}

namespace {

using nlohmann::ordered_json;

void expect_keys(const ordered_json& j, const std::string& where,
                 std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void read_field(const ordered_json& j, const char* key, T& out, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

ordered_json route_to_json(const RouteConfig& r) {
    return ordered_json{{"perimeter_width", r.perimeter_width},
                        {"perimeter_height", r.perimeter_height},
                        {"laps", r.laps},
                        {"ccw_laps", r.ccw_laps},
                        {"speed", r.speed},
                        {"snapshot_period", r.snapshot_period},
                        {"lateral_lane_offset", r.lateral_lane_offset},
                        {"corner_radius", r.corner_radius},
                        {"lateral_jitter_amplitude", r.lateral_jitter_amplitude},
                        {"lateral_jitter_wavelength", r.lateral_jitter_wavelength},
                        {"seed", r.seed}};
}

void route_from_json(const ordered_json& j, RouteConfig& r) {
    expect_keys(j, "route",
                {"perimeter_width", "perimeter_height", "laps", "ccw_laps", "speed",
                 "snapshot_period", "lateral_lane_offset", "corner_radius",
                 "lateral_jitter_amplitude", "lateral_jitter_wavelength", "seed"});
    read_field(j, "perimeter_width", r.perimeter_width, "route");
    read_field(j, "perimeter_height", r.perimeter_height, "route");
    read_field(j, "laps", r.laps, "route");
    read_field(j, "ccw_laps", r.ccw_laps, "route");
    read_field(j, "speed", r.speed, "route");
    read_field(j, "snapshot_period", r.snapshot_period, "route");
    read_field(j, "lateral_lane_offset", r.lateral_lane_offset, "route");
    read_field(j, "corner_radius", r.corner_radius, "route");
    read_field(j, "lateral_jitter_amplitude", r.lateral_jitter_amplitude, "route");
    read_field(j, "lateral_jitter_wavelength", r.lateral_jitter_wavelength, "route");
    read_field(j, "seed", r.seed, "route");
}

ordered_json scene_to_json(const SceneConfig& s) {
    ordered_json bss = ordered_json::array();
    for (const auto& b : s.base_stations)
        bss.push_back(ordered_json{{"id", b.id},
                                   {"x_e", b.x_e},
                                   {"x_n", b.x_n},
                                   {"height", b.height},
                                   {"blocked_los", b.blocked_los}});
    ordered_json walls = ordered_json::array();
    for (const auto& w : s.wall_segments)
        walls.push_back(ordered_json{{"x1", w.x1},
                                     {"y1", w.y1},
                                     {"x2", w.x2},
                                     {"y2", w.y2},
                                     {"reflection_loss_db", w.reflection_loss_db}});
    return ordered_json{{"base_stations", bss},
                        {"wall_segments", walls},
                        {"diffuse_scatterer_count", s.diffuse_scatterer_count},
                        {"scatterer_gain_db", s.scatterer_gain_db},
                        {"noise_floor_db", s.noise_floor_db},
                        {"carrier_frequency", s.carrier_frequency},
                        {"rx_height", s.rx_height},
                        {"timing_jitter_std", s.timing_jitter_std},
                        {"per_lap_scatter_phases", s.per_lap_scatter_phases},
                        {"seed", s.seed}};
}

void scene_from_json(const ordered_json& j, SceneConfig& s) {
    expect_keys(j, "scene",
                {"base_stations", "wall_segments", "diffuse_scatterer_count", "scatterer_gain_db",
                 "noise_floor_db", "carrier_frequency", "rx_height", "timing_jitter_std",
                 "per_lap_scatter_phases", "seed"});
    if (auto it = j.find("base_stations"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("scene.base_stations must be an array");
        s.base_stations.clear();
        for (const auto& e : *it) {
            expect_keys(e, "scene.base_stations[]", {"id", "x_e", "x_n", "height", "blocked_los"});
            BaseStation b;
            read_field(e, "id", b.id, "scene.base_stations[]");
            read_field(e, "x_e", b.x_e, "scene.base_stations[]");
            read_field(e, "x_n", b.x_n, "scene.base_stations[]");
            read_field(e, "height", b.height, "scene.base_stations[]");
            read_field(e, "blocked_los", b.blocked_los, "scene.base_stations[]");
            s.base_stations.push_back(std::move(b));
        }
    }
    if (auto it = j.find("wall_segments"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("scene.wall_segments must be an array");
        s.wall_segments.clear();
        for (const auto& e : *it) {
            expect_keys(e, "scene.wall_segments[]", {"x1", "y1", "x2", "y2", "reflection_loss_db"});
            WallSegment w;
            read_field(e, "x1", w.x1, "scene.wall_segments[]");
            read_field(e, "y1", w.y1, "scene.wall_segments[]");
            read_field(e, "x2", w.x2, "scene.wall_segments[]");
            read_field(e, "y2", w.y2, "scene.wall_segments[]");
            read_field(e, "reflection_loss_db", w.reflection_loss_db, "scene.wall_segments[]");
            s.wall_segments.push_back(w);
        }
    }
    read_field(j, "diffuse_scatterer_count", s.diffuse_scatterer_count, "scene");
    read_field(j, "scatterer_gain_db", s.scatterer_gain_db, "scene");
    read_field(j, "noise_floor_db", s.noise_floor_db, "scene");
    read_field(j, "carrier_frequency", s.carrier_frequency, "scene");
    read_field(j, "rx_height", s.rx_height, "scene");
    read_field(j, "timing_jitter_std", s.timing_jitter_std, "scene");
    read_field(j, "per_lap_scatter_phases", s.per_lap_scatter_phases, "scene");
    read_field(j, "seed", s.seed, "scene");
}

} // namespace

nlohmann::ordered_json run_config_to_json(const RunConfig& rc) {
    ordered_json j;
    j["route"] = route_to_json(rc.route);
    j["scene"] = scene_to_json(rc.scene);
    j["grid"] = ordered_json{{"subcarriers", rc.grid.subcarriers},
                             {"subcarrier_spacing", rc.grid.subcarrier_spacing}};
    j["array"] = ordered_json{{"rings", rc.array.rings},
                              {"elements_per_ring", rc.array.elements_per_ring},
                              {"polarizations", rc.array.polarizations},
                              {"ring_radius", rc.array.ring_radius},
                              {"ring_spacing", rc.array.ring_spacing},
                              {"carrier_frequency", rc.array.carrier_frequency},
                              {"directivity_exponent", rc.array.directivity_exponent}};
    j["bdir"] = ordered_json{{"delta_max", rc.bdir.delta_max}, {"delta_dec", rc.bdir.delta_dec}};
    j["mf"] = ordered_json{{"delta_theta_deg", rc.mf.delta_theta_deg},
                           {"delta_phi_deg", rc.mf.delta_phi_deg},
                           {"taps", rc.mf.taps},
                           {"tau_step", rc.mf.tau_step}};
    j["train"] = ordered_json{{"epochs", rc.train.epochs},
                              {"batch_size", rc.train.batch_size},
                              {"learning_rate", rc.train.learning_rate},
                              {"lr_decay", rc.train.lr_decay},
                              {"input_noise", rc.train.input_noise},
                              {"weight_decay", rc.train.weight_decay},
                              {"shift_aug_w", rc.train.shift_aug_w},
                              {"beta1", rc.train.beta1},
                              {"beta2", rc.train.beta2},
                              {"epsilon", rc.train.epsilon},
                              {"seed", rc.train.seed},
                              {"w_pos", rc.train.w_pos},
                              {"w_head", rc.train.w_head},
                              {"position_scale", rc.train.position_scale}};
    j["network"] = rc.network;
    j["split"] = rc.split;
    j["test_fraction"] = rc.test_fraction;
    j["split_seed"] = rc.split_seed;
    j["holdout_lap"] = rc.holdout_lap;
    j["stratify_by_lap"] = rc.stratify_by_lap;
    j["bs_selection"] = rc.bs_selection;
    j["knn_k"] = rc.knn_k;
    j["out_dir"] = rc.out_dir;
    return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
    expect_keys(j, "config root",
                {"route", "scene", "grid", "array", "bdir", "mf", "train", "network", "split",
                 "test_fraction", "split_seed", "holdout_lap", "stratify_by_lap", "bs_selection",
                 "knn_k", "out_dir"});
    RunConfig rc;
    if (auto it = j.find("route"); it != j.end()) route_from_json(*it, rc.route);
    if (auto it = j.find("scene"); it != j.end()) scene_from_json(*it, rc.scene);
    if (auto it = j.find("grid"); it != j.end()) {
        expect_keys(*it, "grid", {"subcarriers", "subcarrier_spacing"});
        read_field(*it, "subcarriers", rc.grid.subcarriers, "grid");
        read_field(*it, "subcarrier_spacing", rc.grid.subcarrier_spacing, "grid");
    }
    if (auto it = j.find("array"); it != j.end()) {
        expect_keys(*it, "array",
                    {"rings", "elements_per_ring", "polarizations", "ring_radius", "ring_spacing",
                     "carrier_frequency", "directivity_exponent"});
        read_field(*it, "rings", rc.array.rings, "array");
        read_field(*it, "elements_per_ring", rc.array.elements_per_ring, "array");
        read_field(*it, "polarizations", rc.array.polarizations, "array");
        read_field(*it, "ring_radius", rc.array.ring_radius, "array");
        read_field(*it, "ring_spacing", rc.array.ring_spacing, "array");
        read_field(*it, "carrier_frequency", rc.array.carrier_frequency, "array");
        read_field(*it, "directivity_exponent", rc.array.directivity_exponent, "array");
    }
    if (auto it = j.find("bdir"); it != j.end()) {
        expect_keys(*it, "bdir", {"delta_max", "delta_dec"});
        read_field(*it, "delta_max", rc.bdir.delta_max, "bdir");
        read_field(*it, "delta_dec", rc.bdir.delta_dec, "bdir");
    }
    if (auto it = j.find("mf"); it != j.end()) {
        expect_keys(*it, "mf", {"delta_theta_deg", "delta_phi_deg", "taps", "tau_step"});
        read_field(*it, "delta_theta_deg", rc.mf.delta_theta_deg, "mf");
        read_field(*it, "delta_phi_deg", rc.mf.delta_phi_deg, "mf");
        read_field(*it, "taps", rc.mf.taps, "mf");
        read_field(*it, "tau_step", rc.mf.tau_step, "mf");
    }
    if (auto it = j.find("train"); it != j.end()) {
        expect_keys(*it, "train",
                    {"epochs", "batch_size", "learning_rate", "lr_decay", "input_noise",
                     "weight_decay", "shift_aug_w", "beta1", "beta2", "epsilon", "seed", "w_pos",
                     "w_head", "position_scale"});
        read_field(*it, "epochs", rc.train.epochs, "train");
        read_field(*it, "batch_size", rc.train.batch_size, "train");
        read_field(*it, "learning_rate", rc.train.learning_rate, "train");
        read_field(*it, "lr_decay", rc.train.lr_decay, "train");
        read_field(*it, "input_noise", rc.train.input_noise, "train");
        read_field(*it, "weight_decay", rc.train.weight_decay, "train");
        read_field(*it, "shift_aug_w", rc.train.shift_aug_w, "train");
        read_field(*it, "beta1", rc.train.beta1, "train");
        read_field(*it, "beta2", rc.train.beta2, "train");
        read_field(*it, "epsilon", rc.train.epsilon, "train");
        read_field(*it, "seed", rc.train.seed, "train");
        read_field(*it, "w_pos", rc.train.w_pos, "train");
        read_field(*it, "w_head", rc.train.w_head, "train");
        read_field(*it, "position_scale", rc.train.position_scale, "train");
    }
    read_field(j, "network", rc.network, "config root");
    read_field(j, "split", rc.split, "config root");
    read_field(j, "test_fraction", rc.test_fraction, "config root");
    read_field(j, "split_seed", rc.split_seed, "config root");
    read_field(j, "holdout_lap", rc.holdout_lap, "config root");
    read_field(j, "stratify_by_lap", rc.stratify_by_lap, "config root");
    read_field(j, "bs_selection", rc.bs_selection, "config root");
    read_field(j, "knn_k", rc.knn_k, "config root");
    read_field(j, "out_dir", rc.out_dir, "config root");
    return rc;
}

} // namespace wiom
