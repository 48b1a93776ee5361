#include "wiom/channel_sim.hpp"
#include "wiom/container.hpp"
#include "wiom/dataset.hpp"
#include "wiom/error.hpp"
#include "wiom/eval.hpp"
#include "wiom/nn.hpp"
#include "wiom/pipeline.hpp"
#include "wiom/presets.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string out_root() {
    if (const char* env = std::getenv("WIOM_OUT"); env && *env) return env;
    return ".";
}

fs::path resolve_out(const std::string& flag_value, const char* fallback_name) {
    if (!flag_value.empty()) return flag_value;
    return fs::path(out_root()) / fallback_name;
}

wiom::RunConfig load_run_config(const std::string& preset, const std::string& config_path) {
    wiom::RunConfig rc = preset == "full" ? wiom::full_preset() : wiom::desk_preset();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw wiom::ConfigError("cannot open config file: " + config_path);
        ordered_json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw wiom::ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        rc = wiom::run_config_from_json(j);
    }
    return rc;
}

wiom::SplitAssignment make_split(const wiom::Dataset& ds, const wiom::RunConfig& rc) {
    if (rc.split == "heu") return wiom::split_heu(ds, static_cast<std::uint32_t>(rc.holdout_lap));
    return wiom::split_leu(ds, rc.test_fraction, rc.split_seed, rc.stratify_by_lap);
}

void print_report_summary(const wiom::ErrorReport& rep) {
    std::printf("source=%s split=%s test_records=%zu\n", rep.source.c_str(),
                rep.split_kind.c_str(), rep.position_errors.size());
    for (int level : {68, 95, 99}) {
        const auto& pr = rep.percentiles.at(level);
        std::printf("  p%d position %.3f m, heading %.3f deg\n", level, pr.first, pr.second);
    }
}

// Every subcommand fills one of these and main() runs it after parse.
struct PendingAction {
    std::function<void()> run;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wiometric navigation pipeline: simulate, transform, train, evaluate, report"};
    app.require_subcommand(1);
    PendingAction pending;

    // ---------------------------------------------------------------- simulate
    auto* sim = app.add_subcommand("simulate", "synthesize a raw-CSI dataset along the route");
    {
        struct SimArgs {
            std::string preset = "desk", config, out;
            std::optional<int> laps, ccw_laps, scatterers;
            std::optional<double> speed, period, noise_floor, jitter_amp, scatterer_gain;
            std::optional<std::uint64_t> route_seed, scene_seed;
        };
        auto a = std::make_shared<SimArgs>();
        sim->add_option("--preset", a->preset, "base preset: desk or full")
            ->check(CLI::IsMember({"desk", "full"}))
            ->capture_default_str();
        sim->add_option("--config", a->config, "run-config JSON file (replaces the preset)");
        sim->add_option("--out", a->out, "output dataset directory [default: $WIOM_OUT/dataset]");
        sim->add_option("--laps", a->laps, "override route lap count");
        sim->add_option("--ccw-laps", a->ccw_laps, "override counterclockwise lap count");
        sim->add_option("--speed", a->speed, "override vehicle speed, m/s");
        sim->add_option("--snapshot-period", a->period, "override snapshot period, s");
        sim->add_option("--noise-floor", a->noise_floor, "override noise floor, dB");
        sim->add_option("--scatterers", a->scatterers, "override diffuse scatterer count");
        sim->add_option("--scatterer-gain", a->scatterer_gain, "override scatterer gain, dB");
        sim->add_option("--jitter-amplitude", a->jitter_amp, "override lateral jitter amplitude, m");
        sim->add_option("--seed", a->route_seed, "override route seed");
        sim->add_option("--scene-seed", a->scene_seed, "override scene seed");
        sim->callback([a, &pending] {
            pending.run = [a] {
                wiom::RunConfig rc = load_run_config(a->preset, a->config);
                if (a->laps) rc.route.laps = *a->laps;
                if (a->ccw_laps) rc.route.ccw_laps = *a->ccw_laps;
                if (a->speed) rc.route.speed = *a->speed;
                if (a->period) rc.route.snapshot_period = *a->period;
                if (a->noise_floor) rc.scene.noise_floor_db = *a->noise_floor;
                if (a->scatterers) rc.scene.diffuse_scatterer_count = *a->scatterers;
                if (a->scatterer_gain) rc.scene.scatterer_gain_db = *a->scatterer_gain;
                if (a->jitter_amp) rc.route.lateral_jitter_amplitude = *a->jitter_amp;
                if (a->route_seed) rc.route.seed = *a->route_seed;
                if (a->scene_seed) rc.scene.seed = *a->scene_seed;
                rc.route.validate();
                rc.scene.validate();
                rc.grid.validate();
                rc.array.validate();

                const fs::path out = resolve_out(a->out, "dataset");
                wiom::Dataset ds = wiom::simulate(rc.route, rc.scene, rc.grid, rc.array);
                wiom::save_dataset(ds, out);
                const std::uint64_t checksum = wiom::file_checksum(out / "metadata.json");
                std::printf("wrote %s: %zu snapshots per BS x %zu BS = %zu total, checksum %016llx\n",
                            out.string().c_str(), ds.record_count(), ds.bs_count(),
                            ds.record_count() * ds.bs_count(),
                            static_cast<unsigned long long>(checksum));
            };
        });
    }

    // ---------------------------------------------------------------- transform
    auto* tr = app.add_subcommand("transform", "derive a wiometric dataset from raw CSI");
    {
        struct TrArgs {
            std::string in, out, kind, config, preset = "desk";
            std::optional<int> delta_max, delta_dec, taps;
            std::optional<double> theta_step, phi_step, tau_step;
        };
        auto a = std::make_shared<TrArgs>();
        tr->add_option("--in", a->in, "input raw-CSI dataset directory")->required();
        tr->add_option("--kind", a->kind, "wiometric kind: acsi, ccsi, bdir or mfad")->required();
        tr->add_option("--out", a->out, "output dataset directory [default: $WIOM_OUT/<kind>]");
        tr->add_option("--preset", a->preset, "base preset for transform parameters")
            ->check(CLI::IsMember({"desk", "full"}))
            ->capture_default_str();
        tr->add_option("--config", a->config, "run-config JSON file (replaces the preset)");
        tr->add_option("--delta-max", a->delta_max, "bdir: maximum frequency lag");
        tr->add_option("--delta-dec", a->delta_dec, "bdir: lag decimation");
        tr->add_option("--theta-step", a->theta_step, "mfad: elevation grid step, deg");
        tr->add_option("--phi-step", a->phi_step, "mfad: azimuth grid step, deg");
        tr->add_option("--taps", a->taps, "mfad: delay bin count");
        tr->add_option("--tau-step", a->tau_step, "mfad: delay bin width, s (0 = 1/(S*spacing))");
        tr->callback([a, &pending] {
            pending.run = [a] {
                const wiom::WiometricKind kind = wiom::kind_from_name(a->kind);
                wiom::RunConfig rc = load_run_config(a->preset, a->config);
                wiom::TransformOptions opt{rc.bdir, rc.mf};
                if (a->delta_max) opt.bdir.delta_max = *a->delta_max;
                if (a->delta_dec) opt.bdir.delta_dec = *a->delta_dec;
                if (a->theta_step) opt.mf.delta_theta_deg = *a->theta_step;
                if (a->phi_step) opt.mf.delta_phi_deg = *a->phi_step;
                if (a->taps) opt.mf.taps = *a->taps;
                if (a->tau_step) opt.mf.tau_step = *a->tau_step;

                wiom::Dataset ds = wiom::load_dataset(a->in);
                if (kind == wiom::WiometricKind::MFAD)
                    std::printf("mfad: building one shared antenna/delay matrix pair for all "
                                "%zu snapshots\n",
                                ds.record_count() * ds.bs_count());
                wiom::Dataset out_ds = wiom::transform_dataset(ds, kind, opt);
                const fs::path out = resolve_out(a->out, wiom::kind_name(kind).c_str());
                wiom::save_dataset(out_ds, out);
                std::string dims;
                for (std::size_t d : out_ds.record_dims)
                    dims += (dims.empty() ? "" : "x") + std::to_string(d);
                std::printf("wrote %s: kind=%s records per BS=%zu, record shape %s\n",
                            out.string().c_str(), wiom::kind_name(kind).c_str(),
                            out_ds.record_count(), dims.c_str());
            };
        });
    }

    // ---------------------------------------------------------------- train
    auto* tn = app.add_subcommand("train", "train a network preset on a wiometric dataset");
    {
        struct TnArgs {
            std::string dataset, out, config, preset = "desk";
            std::optional<std::string> network, split;
            std::optional<double> test_fraction, lr, lr_decay, input_noise, weight_decay,
                position_scale, w_pos, w_head;
            std::optional<std::uint64_t> split_seed, seed;
            std::optional<int> holdout_lap, epochs, batch, shift_aug;
            bool stratify = false;
            std::vector<std::string> bs;
        };
        auto a = std::make_shared<TnArgs>();
        tn->add_option("--dataset", a->dataset, "wiometric dataset directory")->required();
        tn->add_option("--out", a->out, "checkpoint directory [default: $WIOM_OUT/model]");
        tn->add_option("--preset", a->preset, "base preset for train/split defaults")
            ->check(CLI::IsMember({"desk", "full"}))
            ->capture_default_str();
        tn->add_option("--config", a->config, "run-config JSON file (replaces the preset)");
        tn->add_option("--network", a->network,
                       "network preset, e.g. cnn-mfad-s-desk (input shape is taken from the "
                       "dataset)");
        tn->add_option("--split", a->split, "holdout protocol: leu or heu")
            ->check(CLI::IsMember({"leu", "heu"}));
        tn->add_option("--test-fraction", a->test_fraction, "leu holdout fraction");
        tn->add_option("--split-seed", a->split_seed, "leu holdout seed");
        tn->add_flag("--stratify-by-lap", a->stratify, "leu: draw the holdout per lap");
        tn->add_option("--holdout-lap", a->holdout_lap, "heu held-out lap");
        tn->add_option("--epochs", a->epochs, "training epochs");
        tn->add_option("--batch-size", a->batch, "minibatch size");
        tn->add_option("--learning-rate", a->lr, "Adam learning rate");
        tn->add_option("--lr-decay", a->lr_decay, "per-epoch learning-rate decay factor");
        tn->add_option("--input-noise", a->input_noise,
                       "train-time Gaussian input jitter, z-scored units");
        tn->add_option("--weight-decay", a->weight_decay, "decoupled L2 shrinkage per step");
        tn->add_option("--shift-aug", a->shift_aug,
                       "train-time random shift along the record's second axis, +/- bins");
        tn->add_option("--seed", a->seed, "weight-init and shuffle seed");
        tn->add_option("--position-scale", a->position_scale, "metres per network output unit");
        tn->add_option("--w-pos", a->w_pos, "position loss weight");
        tn->add_option("--w-head", a->w_head, "heading loss weight");
        tn->add_option("--bs", a->bs, "base station ids to stack as channels (default: all)");
        tn->callback([a, &pending] {
            pending.run = [a] {
                wiom::RunConfig rc = load_run_config(a->preset, a->config);
                if (a->network) rc.network = *a->network;
                if (a->split) rc.split = *a->split;
                if (a->test_fraction) rc.test_fraction = *a->test_fraction;
                if (a->split_seed) rc.split_seed = *a->split_seed;
                if (a->stratify) rc.stratify_by_lap = true;
                if (a->holdout_lap) rc.holdout_lap = *a->holdout_lap;
                if (a->epochs) rc.train.epochs = *a->epochs;
                if (a->batch) rc.train.batch_size = *a->batch;
                if (a->lr) rc.train.learning_rate = *a->lr;
                if (a->lr_decay) rc.train.lr_decay = *a->lr_decay;
                if (a->input_noise) rc.train.input_noise = *a->input_noise;
                if (a->weight_decay) rc.train.weight_decay = *a->weight_decay;
                if (a->shift_aug) rc.train.shift_aug_w = *a->shift_aug;
                if (a->seed) rc.train.seed = *a->seed;
                if (a->position_scale) rc.train.position_scale = *a->position_scale;
                if (a->w_pos) rc.train.w_pos = *a->w_pos;
                if (a->w_head) rc.train.w_head = *a->w_head;
                if (!a->bs.empty()) rc.bs_selection = a->bs;
                rc.train.validate();

                wiom::Dataset ds = wiom::load_dataset(a->dataset);
                if (ds.storage != wiom::DatasetStorage::Wiometric)
                    throw wiom::ConfigError(
                        "training needs a wiometric dataset; run `wiom transform` first");
                wiom::NetworkSpec spec = wiom::make_network_preset(rc.network);
                const std::size_t channels =
                    rc.bs_selection.empty() ? ds.bs_count() : rc.bs_selection.size();
                if (ds.record_dims.size() != 2)
                    throw wiom::ShapeError("expected 2-D wiometric records");
                spec.input_shape = {ds.record_dims[0], ds.record_dims[1], channels};
                spec.shape_chain();

                const wiom::SplitAssignment split = make_split(ds, rc);
                wiom::Model model = wiom::train(spec, ds, split, rc.train, rc.bs_selection);

                const fs::path out = resolve_out(a->out, "model");
                wiom::save_model(model, out);
                const std::string conv =
                    wiom::convention_name(rc.network, wiom::count_params(model));
                {
                    std::ifstream is(out / "metadata.json");
                    ordered_json meta;
                    is >> meta;
                    is.close();
                    meta["name"] = conv;
                    meta["network_preset"] = rc.network;
                    meta["split"] = {{"kind", rc.split},
                                     {"test_fraction", rc.test_fraction},
                                     {"seed", rc.split_seed},
                                     {"stratify_by_lap", rc.stratify_by_lap},
                                     {"holdout_lap", rc.holdout_lap},
                                     {"train_records", split.train_indices.size()},
                                     {"test_records", split.test_indices.size()}};
                    std::ofstream os(out / "metadata.json", std::ios::trunc);
                    os << meta.dump(2) << "\n";
                }
                const auto& last = model.history.back();
                std::printf("wrote %s: %s (%zu params), %zu epochs, train loss %.6g, "
                            "val loss %.6g\n",
                            out.string().c_str(), conv.c_str(), wiom::count_params(model),
                            model.history.size(), last.train_loss, last.val_loss);
            };
        });
    }

    // ---------------------------------------------------------------- evaluate
    auto* ev = app.add_subcommand("evaluate", "report error percentiles for a checkpoint or k-NN");
    {
        struct EvArgs {
            std::string dataset, checkpoint, baseline, out, config, preset = "desk";
            std::optional<std::string> split;
            std::optional<double> test_fraction;
            std::optional<std::uint64_t> split_seed;
            std::optional<int> holdout_lap, k;
            bool stratify = false, on_train = false;
            std::vector<std::string> bs;
        };
        auto a = std::make_shared<EvArgs>();
        ev->add_option("--dataset", a->dataset, "wiometric dataset directory")->required();
        ev->add_option("--checkpoint", a->checkpoint, "model checkpoint directory");
        ev->add_option("--baseline", a->baseline, "run a baseline instead of a checkpoint: knn")
            ->check(CLI::IsMember({"knn"}));
        ev->add_option("--k", a->k, "k-NN neighbour count");
        ev->add_option("--out", a->out, "report directory [default: $WIOM_OUT/report]");
        ev->add_option("--preset", a->preset, "base preset for split defaults")
            ->check(CLI::IsMember({"desk", "full"}))
            ->capture_default_str();
        ev->add_option("--config", a->config, "run-config JSON file (replaces the preset)");
        ev->add_option("--split", a->split, "holdout protocol: leu or heu")
            ->check(CLI::IsMember({"leu", "heu"}));
        ev->add_option("--test-fraction", a->test_fraction, "leu holdout fraction");
        ev->add_option("--split-seed", a->split_seed, "leu holdout seed");
        ev->add_flag("--stratify-by-lap", a->stratify, "leu: draw the holdout per lap");
        ev->add_option("--holdout-lap", a->holdout_lap, "heu held-out lap");
        ev->add_flag("--on-train", a->on_train,
                     "evaluate on the training records (labeled split=train)");
        ev->add_option("--bs", a->bs, "base station ids for the k-NN features (default: all)");
        ev->callback([a, &pending] {
            pending.run = [a] {
                if (a->checkpoint.empty() == a->baseline.empty())
                    throw wiom::ConfigError(
                        "pass exactly one of --checkpoint or --baseline knn");
                wiom::RunConfig rc = load_run_config(a->preset, a->config);
                if (a->split) rc.split = *a->split;
                if (a->test_fraction) rc.test_fraction = *a->test_fraction;
                if (a->split_seed) rc.split_seed = *a->split_seed;
                if (a->stratify) rc.stratify_by_lap = true;
                if (a->holdout_lap) rc.holdout_lap = *a->holdout_lap;
                if (a->k) rc.knn_k = *a->k;
                if (!a->bs.empty()) rc.bs_selection = a->bs;

                wiom::Dataset ds = wiom::load_dataset(a->dataset);
                wiom::SplitAssignment split = make_split(ds, rc);
                if (a->on_train) split.test_indices = split.train_indices;

                wiom::ErrorReport rep;
                if (!a->checkpoint.empty()) {
                    wiom::Model model = wiom::load_model(a->checkpoint);
                    rep = wiom::evaluate(model, ds, split, "model");
                    std::ifstream is(fs::path(a->checkpoint) / "metadata.json");
                    ordered_json meta;
                    is >> meta;
                    if (meta.contains("name")) rep.source = meta["name"].get<std::string>();
                } else {
                    rep = wiom::knn_baseline(ds, split, rc.knn_k, rc.bs_selection);
                }
                if (a->on_train) rep.split_kind = "train";
                const fs::path out = resolve_out(a->out, "report");
                wiom::write_report(rep, out);
                std::printf("wrote %s\n", out.string().c_str());
                print_report_summary(rep);
            };
        });
    }

    // ---------------------------------------------------------------- inspect
    auto* in = app.add_subcommand("inspect", "describe a dataset, checkpoint or container blob");
    {
        auto path = std::make_shared<std::string>();
        in->add_option("path", *path, "dataset dir, checkpoint dir or .wiom blob")->required();
        in->callback([path, &pending] {
            pending.run = [path] {
                const fs::path p = *path;
                if (fs::is_directory(p)) {
                    std::ifstream is(p / "metadata.json");
                    if (!is)
                        throw wiom::IoError("no metadata.json in " + p.string());
                    ordered_json meta;
                    try {
                        is >> meta;
                    } catch (const nlohmann::json::exception& e) {
                        throw wiom::IoError("corrupt metadata.json: " + std::string(e.what()));
                    }
                    const std::string format = meta.value("format", "");
                    if (format == "wiom-dataset") {
                        std::fputs(wiom::describe_dataset(p).c_str(), stdout);
                    } else if (format == "wiom-model") {
                        wiom::Model m = wiom::load_model(p);
                        std::printf("model checkpoint %s\n", p.string().c_str());
                        if (meta.contains("name"))
                            std::printf("  name: %s\n", meta["name"].get<std::string>().c_str());
                        std::printf("  params: %zu\n", wiom::count_params(m));
                        std::printf("  input: [%zu, %zu, %zu]\n", m.spec.input_shape[0],
                                    m.spec.input_shape[1], m.spec.input_shape[2]);
                        for (const auto& l : m.spec.layers) {
                            std::printf("  layer %s", wiom::layer_name(l.type).c_str());
                            if (l.type == wiom::LayerSpec::Type::Conv2D)
                                std::printf("(filters=%d, kernel=%d)", l.filters, l.kernel);
                            if (l.type == wiom::LayerSpec::Type::Dense)
                                std::printf("(nodes=%d)", l.nodes);
                            std::printf("\n");
                        }
                        std::printf("  epochs trained: %zu\n", m.history.size());
                        if (!m.history.empty())
                            std::printf("  final train loss %.6g, val loss %.6g\n",
                                        m.history.back().train_loss, m.history.back().val_loss);
                    } else {
                        throw wiom::IoError("unrecognized metadata format in " + p.string());
                    }
                } else {
                    const wiom::BlobInfo info = wiom::blob_info(p);
                    std::string dims;
                    for (std::uint64_t d : info.dims)
                        dims += (dims.empty() ? "" : "x") + std::to_string(d);
                    std::printf("%s: dtype=%s dims=%s checksum=%016llx\n", p.string().c_str(),
                                wiom::dtype_name(info.dtype).c_str(), dims.c_str(),
                                static_cast<unsigned long long>(info.checksum));
                }
            };
        });
    }

    // ---------------------------------------------------------------- config
    auto* cf = app.add_subcommand("config", "emit a preset's run-config JSON for editing");
    {
        struct CfArgs {
            std::string preset = "desk", out;
        };
        auto a = std::make_shared<CfArgs>();
        cf->add_option("--preset", a->preset, "base preset: desk or full")
            ->check(CLI::IsMember({"desk", "full"}));
        cf->add_option("--out", a->out, "output file [default: stdout]");
        cf->callback([a, &pending] {
            pending.run = [a] {
                const wiom::RunConfig rc = load_run_config(a->preset, "");
                const std::string text = wiom::run_config_to_json(rc).dump(1) + "\n";
                if (a->out.empty()) {
                    std::fputs(text.c_str(), stdout);
                } else {
                    std::ofstream os(a->out, std::ios::trunc);
                    if (!os) throw wiom::IoError("cannot write " + a->out);
                    os << text;
                    std::printf("wrote %s\n", a->out.c_str());
                }
            };
        });
    }

    // ---------------------------------------------------------------- report
    auto* rp = app.add_subcommand("report", "merge report directories into one summary CSV");
    {
        struct RpArgs {
            std::vector<std::string> dirs;
            std::string out;
        };
        auto a = std::make_shared<RpArgs>();
        rp->add_option("dirs", a->dirs, "report directories to merge")->required();
        rp->add_option("--out", a->out, "output CSV [default: $WIOM_OUT/summary.csv]");
        rp->callback([a, &pending] {
            pending.run = [a] {
                std::vector<fs::path> dirs(a->dirs.begin(), a->dirs.end());
                const fs::path out = resolve_out(a->out, "summary.csv");
                wiom::write_combined_summary(dirs, out);
                std::printf("wrote %s (%zu reports)\n", out.string().c_str(), dirs.size());
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2 across the board
    }

    try {
        if (pending.run) pending.run();
    } catch (const wiom::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
