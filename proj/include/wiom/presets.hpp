#pragma once

#include "wiom/channel_sim.hpp"
#include "wiom/nn.hpp"
#include "wiom/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace wiom {

// Network presets named (cnn|fcnn)-(acsi|ccsi|bdir|mfad)-(s|d)-(desk|full).
// 's' takes one BS channel, 'd' stacks two. Desk presets stay near or under
// ~0.2M parameters; full presets carry the published input shapes.
NetworkSpec make_network_preset(const std::string& name); // throws ConfigError
std::vector<std::string> network_preset_names();

// "CNN-MFAD-S-0.2M"-style display name for a preset with a given param count.
std::string convention_name(const std::string& preset_name, std::size_t param_count);

// Aggregated pipeline configuration: one document drives every subcommand.
struct RunConfig {
    RouteConfig route;
    SceneConfig scene;
    OfdmGrid grid;
    ArrayGeometry array;
    BdirConfig bdir;
    MfGridConfig mf;
    TrainConfig train;
    std::string network = "cnn-mfad-s-desk";
    std::string split = "leu"; // leu | heu
    double test_fraction = 0.25;
    std::uint64_t split_seed = 0;
    int holdout_lap = 3;
    bool stratify_by_lap = false;
    std::vector<std::string> bs_selection; // empty = all
    int knn_k = 5;
    std::string out_dir;

    void validate() const; // throws ConfigError
};

RunConfig desk_preset();
RunConfig full_preset();

// Strict JSON (de)serialization: unknown keys anywhere are rejected.
nlohmann::ordered_json run_config_to_json(const RunConfig& rc);
RunConfig run_config_from_json(const nlohmann::ordered_json& j); // throws ConfigError

} // namespace wiom
