#include <doctest.h>

#include "wiom/error.hpp"
#include "wiom/presets.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace wiom;
using nlohmann::ordered_json;

TEST_SUITE("presets") {

TEST_CASE("preset catalogue covers the full name grammar") {
    const auto names = network_preset_names();
    CHECK(names.size() == 32);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 32);
    for (const auto& name : names) {
        const NetworkSpec spec = make_network_preset(name);
        CHECK(spec.param_count() > 0);
        CHECK(spec.output_shape() == std::vector<std::size_t>{4});
        CHECK(spec.input_shape.size() == 3);
        CHECK(spec.input_shape[2] == (name.find("-d-") != std::string::npos ? 2u : 1u));
    }
}

TEST_CASE("preset input shapes follow representation and scale") {
    CHECK(make_network_preset("cnn-acsi-s-desk").input_shape ==
          std::vector<std::size_t>{64, 32, 1});
    CHECK(make_network_preset("cnn-ccsi-d-desk").input_shape ==
          std::vector<std::size_t>{64, 64, 2});
    CHECK(make_network_preset("fcnn-bdir-d-desk").input_shape ==
          std::vector<std::size_t>{16, 32, 2});
    CHECK(make_network_preset("cnn-mfad-d-desk").input_shape ==
          std::vector<std::size_t>{96, 32, 2});
    CHECK(make_network_preset("cnn-acsi-s-full").input_shape ==
          std::vector<std::size_t>{200, 128, 1});
    CHECK(make_network_preset("fcnn-ccsi-s-full").input_shape ==
          std::vector<std::size_t>{200, 256, 1});
    CHECK(make_network_preset("cnn-bdir-d-full").input_shape ==
          std::vector<std::size_t>{32, 128, 2});
    CHECK(make_network_preset("cnn-mfad-s-full").input_shape ==
          std::vector<std::size_t>{150, 90, 1});
}

TEST_CASE("preset names are case-insensitive, bad names throw") {
    CHECK(make_network_preset("CNN-MFAD-D-DESK").input_shape ==
          make_network_preset("cnn-mfad-d-desk").input_shape);
    CHECK_THROWS_AS(make_network_preset(""), ConfigError);
    CHECK_THROWS_AS(make_network_preset("cnn-acsi-s"), ConfigError);
    CHECK_THROWS_AS(make_network_preset("cnn-acsi-s-desk-extra"), ConfigError);
    CHECK_THROWS_AS(make_network_preset("gnn-acsi-s-desk"), ConfigError);
    CHECK_THROWS_AS(make_network_preset("cnn-wide-s-desk"), ConfigError);
    CHECK_THROWS_AS(make_network_preset("cnn-acsi-x-desk"), ConfigError);
    CHECK_THROWS_AS(make_network_preset("cnn-acsi-s-huge"), ConfigError);
}

TEST_CASE("desk presets stay near the small parameter budget") {
    for (const auto& name : network_preset_names()) {
        if (name.find("-desk") == std::string::npos) continue;
        const NetworkSpec spec = make_network_preset(name);
        CHECK(spec.param_count() < 300000);
        CHECK(spec.param_count() > 50000);
    }
}

TEST_CASE("convention name formats the parameter count in millions") {
    CHECK(convention_name("cnn-mfad-d-desk", 166652) == "CNN-MFAD-D-0.2M");
    CHECK(convention_name("fcnn-acsi-s-desk", 1234567) == "FCNN-ACSI-S-1.2M");
    CHECK(convention_name("cnn-bdir-s-full", 12345678) == "CNN-BDIR-S-12M");
    CHECK(convention_name("cnn-ccsi-d-full", 9349000) == "CNN-CCSI-D-9.3M");
    CHECK_THROWS_AS(convention_name("nope", 1000), ConfigError);
}

TEST_CASE("bundled run configs are internally consistent") {
    for (const RunConfig& rc : {desk_preset(), full_preset()}) {
        CHECK_NOTHROW(rc.validate());
        const NetworkSpec spec = make_network_preset(rc.network);
        const bool full = rc.network.find("-full") != std::string::npos;

        // The network input rows/cols must match what the pipeline emits.
        const std::size_t ports = static_cast<std::size_t>(rc.array.rings) *
                                  static_cast<std::size_t>(rc.array.elements_per_ring) *
                                  static_cast<std::size_t>(rc.array.polarizations);
        CHECK(make_network_preset(full ? "cnn-acsi-s-full" : "cnn-acsi-s-desk").input_shape[0] ==
              static_cast<std::size_t>(rc.grid.subcarriers));
        CHECK(make_network_preset(full ? "cnn-acsi-s-full" : "cnn-acsi-s-desk").input_shape[1] ==
              ports);
        CHECK(make_network_preset(full ? "cnn-ccsi-s-full" : "cnn-ccsi-s-desk").input_shape[1] ==
              2 * ports);
        CHECK(make_network_preset(full ? "cnn-bdir-s-full" : "cnn-bdir-s-desk").input_shape[0] ==
              static_cast<std::size_t>(rc.bdir.delta_max / rc.bdir.delta_dec));
        const auto mfad = make_network_preset(full ? "cnn-mfad-s-full" : "cnn-mfad-s-desk");
        CHECK(mfad.input_shape[0] ==
              static_cast<std::size_t>(std::lround(360.0 / rc.mf.delta_phi_deg)));
        CHECK(mfad.input_shape[1] == static_cast<std::size_t>(rc.mf.taps));
    }
    CHECK(desk_preset().grid.subcarriers == 64);
    CHECK(full_preset().grid.subcarriers == 200);
    CHECK(desk_preset().scene.base_stations.size() == 2);
    CHECK(full_preset().scene.base_stations.size() == 2);
}

TEST_CASE("run config json round trips exactly") {
    for (const RunConfig& rc : {desk_preset(), full_preset()}) {
        const ordered_json j = run_config_to_json(rc);
        const RunConfig back = run_config_from_json(j);
        CHECK(run_config_to_json(back).dump() == j.dump());
    }
    const ordered_json j = run_config_to_json(desk_preset());
    CHECK(j["grid"]["subcarriers"] == 64);
    CHECK(j["train"]["epochs"] == 80);
    CHECK(j["network"] == "cnn-mfad-d-desk");
    CHECK(j["scene"]["base_stations"].size() == 2);
}

TEST_CASE("partial json overrides only the given fields") {
    ordered_json j = ordered_json{{"route", {{"laps", 2}}}, {"knn_k", 9}};
    const RunConfig rc = run_config_from_json(j);
    const RunConfig base; // defaults, not the desk preset
    CHECK(rc.route.laps == 2);
    CHECK(rc.knn_k == 9);
    CHECK(rc.route.speed == base.route.speed);
    CHECK(rc.network == base.network);
}

TEST_CASE("unknown json keys are rejected wherever they appear") {
    const ordered_json root_key = {{"bogus", 1}};
    const ordered_json route_key = {{"route", {{"perimeter_widht", 50.0}}}};
    const ordered_json train_key = {{"train", {{"momentum", 0.9}}}};
    ordered_json bs_key;
    bs_key["scene"]["base_stations"] = ordered_json::array();
    bs_key["scene"]["base_stations"].push_back(ordered_json{{"id", "A"}, {"tilt", 3.0}});
    CHECK_THROWS_AS(run_config_from_json(root_key), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(route_key), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(train_key), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(bs_key), ConfigError);
    try {
        run_config_from_json(ordered_json{{"mf", {{"tapz", 32}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("tapz") != std::string::npos);
        CHECK(std::string(e.what()).find("mf") != std::string::npos);
    }
}

TEST_CASE("json type mismatches report the offending key") {
    try {
        run_config_from_json(ordered_json{{"route", {{"laps", "four"}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("laps") != std::string::npos);
    }
    const ordered_json route_scalar = {{"route", 7}};
    const ordered_json bs_scalar = {{"scene", {{"base_stations", 3}}}};
    CHECK_THROWS_AS(run_config_from_json(route_scalar), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(bs_scalar), ConfigError);
}

TEST_CASE("run config validation rejects bad top-level settings") {
    RunConfig rc = desk_preset();
    rc.split = "loo";
    CHECK_THROWS_AS(rc.validate(), ConfigError);
    rc = desk_preset();
    rc.test_fraction = 1.0;
    CHECK_THROWS_AS(rc.validate(), ConfigError);
    rc = desk_preset();
    rc.holdout_lap = -1;
    CHECK_THROWS_AS(rc.validate(), ConfigError);
    rc = desk_preset();
    rc.knn_k = 0;
    CHECK_THROWS_AS(rc.validate(), ConfigError);
    rc = desk_preset();
    rc.bs_selection = {"A", ""};
    CHECK_THROWS_AS(rc.validate(), ConfigError);
    rc = desk_preset();
    rc.network = "cnn-acsi-t-desk";
    CHECK_THROWS_AS(rc.validate(), ConfigError);
}

} // TEST_SUITE

