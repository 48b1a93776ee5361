#pragma once

#include "wiom/dataset.hpp"
#include "wiom/pose.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wiom {

// Dense real tensor, row-major, double precision (training numerics; dataset
// storage stays float32 and is cast on input assembly).
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> data;

    static Tensor zeros(std::vector<std::size_t> dims);
    std::size_t size() const { return data.size(); }
};

std::size_t dims_product(const std::vector<std::size_t>& dims);

struct LayerSpec {
    enum class Type { Conv2D, MaxPool, ReLU, Flatten, Dense };
    Type type = Type::ReLU;
    int filters = 0; // Conv2D
    int kernel = 4;  // Conv2D
    int nodes = 0;   // Dense

    static LayerSpec conv2d(int filters, int kernel = 4);
    static LayerSpec maxpool();
    static LayerSpec relu();
    static LayerSpec flatten();
    static LayerSpec dense(int nodes);
};

std::string layer_name(LayerSpec::Type t);

// Network description. Input is [H, W, C] (C = stacked BS channels); conv is
// valid padding, stride 1; pooling 2x2 stride 2 with floor semantics.
struct NetworkSpec {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;

    // Walks the shape chain; throws ShapeError on any mismatch.
    std::vector<std::vector<std::size_t>> shape_chain() const;
    std::vector<std::size_t> output_shape() const;
    std::size_t param_count() const;
};

// Per-layer parameter pair; empty tensors for parameter-free layers.
struct LayerParams {
    Tensor w;
    Tensor b;
};

using Gradients = std::vector<LayerParams>;

struct TrainConfig {
    int epochs = 60;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double lr_decay = 1.0; // per-epoch multiplicative decay, 1 = constant rate
    double input_noise = 0.0;  // train-time Gaussian input jitter, z-scored units
    double weight_decay = 0.0; // decoupled per-step L2 shrinkage
    int shift_aug_w = 0;       // train-time random shift along the W axis, +/- bins
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    double w_pos = 1.0;
    double w_head = 1.0;
    double position_scale = 100.0; // metres mapped to one unit of network output

    void validate() const; // throws ConfigError
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0; // NaN when no validation records
};

struct Model {
    NetworkSpec spec;
    std::vector<LayerParams> params;
    std::vector<LayerParams> adam_m;
    std::vector<LayerParams> adam_v;
    std::int64_t adam_step_count = 0;
    std::vector<EpochStats> history;

    // Input-assembly context so checkpoints predict standalone.
    std::vector<std::string> bs_used;
    std::vector<NormStats> norm; // aligned with bs_used
    TrainConfig train_config;
};

// Seeded He-uniform initialization (biases zero, Adam buffers zero).
Model init_model(const NetworkSpec& spec, std::uint64_t seed);
std::size_t count_params(const Model& m);

// Forward pass; throws ShapeError when the input does not match the spec.
Tensor forward(const Model& m, const Tensor& input);

// Training target: (x_e/scale, x_n/scale, sin gamma, cos gamma).
std::array<double, 4> encode_target(const Pose& pose, double position_scale);

// Mean-reduced loss over a batch:
//   w_pos * MSE(outputs[0..1], targets[0..1]) + w_head * MSE(outputs[2..3], targets[2..3]).
double compute_loss(const Model& m, const std::vector<Tensor>& inputs,
                    const std::vector<std::array<double, 4>>& targets, const TrainConfig& cfg);

// Backprop for the same batch loss; gradients shape-match the parameters.
Gradients compute_gradients(const Model& m, const std::vector<Tensor>& inputs,
                            const std::vector<std::array<double, 4>>& targets,
                            const TrainConfig& cfg, double* loss_out = nullptr);

// Standard Adam with bias correction; increments the model's step counter.
void adam_step(Model& m, const Gradients& g, const TrainConfig& cfg);

// Builds the [H, W, C] input for one record by stacking the selected BS slots
// (z-scored with the given stats) along the channel axis.
Tensor assemble_input(const Dataset& ds, const std::vector<NormStats>& norm,
                      const std::vector<std::size_t>& bs_slots, std::size_t rec);

// Full training loop: fits a normalizer on split.train_indices when the
// dataset does not carry one, shuffles per epoch (seeded), reports per-epoch
// train and held-out loss in the history. bs_selection empty = all BSs in
// dataset order. Throws on divergence with a diagnostic message.
Model train(const NetworkSpec& spec, const Dataset& ds, const SplitAssignment& split,
            const TrainConfig& cfg, const std::vector<std::string>& bs_selection = {});

// (x_e, x_n) rescaled to metres; gamma = atan2(s, c) in degrees in [-180, 180).
Pose predict(const Model& m, const Tensor& input);
Pose predict_record(const Model& m, const Dataset& ds, std::size_t rec);

// Checkpoint: directory with metadata.json (spec, train config, history) and
// container blobs for weights, Adam state and normalizer stats.
void save_model(const Model& m, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

} // namespace wiom
