#include "wiom/nn.hpp"

#include "wiom/container.hpp"
#include "wiom/error.hpp"
#include "wiom/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wiom {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using CMapRow = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

std::size_t dims_product(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> dims) {
    Tensor t;
    t.data.assign(dims_product(dims), 0.0);
    t.dims = std::move(dims);
    return t;
}

LayerSpec LayerSpec::conv2d(int filters, int kernel) {
    LayerSpec s;
    s.type = Type::Conv2D;
    s.filters = filters;
    s.kernel = kernel;
    return s;
}
LayerSpec LayerSpec::maxpool() { return LayerSpec{Type::MaxPool, 0, 4, 0}; }
LayerSpec LayerSpec::relu() { return LayerSpec{Type::ReLU, 0, 4, 0}; }
LayerSpec LayerSpec::flatten() { return LayerSpec{Type::Flatten, 0, 4, 0}; }
LayerSpec LayerSpec::dense(int nodes) { return LayerSpec{Type::Dense, 0, 4, nodes}; }

std::string layer_name(LayerSpec::Type t) {
    switch (t) {
    case LayerSpec::Type::Conv2D: return "conv2d";
    case LayerSpec::Type::MaxPool: return "maxpool";
    case LayerSpec::Type::ReLU: return "relu";
    case LayerSpec::Type::Flatten: return "flatten";
    case LayerSpec::Type::Dense: return "dense";
    }
    return "?";
}

std::vector<std::vector<std::size_t>> NetworkSpec::shape_chain() const {
    if (input_shape.empty()) throw ShapeError("network needs an input shape");
    std::vector<std::vector<std::size_t>> chain;
    chain.push_back(input_shape);
    std::vector<std::size_t> cur = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        const std::string where = layer_name(l.type) + " (layer " + std::to_string(i) + ")";
        switch (l.type) {
        case LayerSpec::Type::Conv2D: {
            if (cur.size() != 3) throw ShapeError(where + ": needs [H, W, C] input");
            const std::size_t k = static_cast<std::size_t>(l.kernel);
            if (l.filters < 1 || l.kernel < 1) throw ShapeError(where + ": bad filters/kernel");
            if (cur[0] < k || cur[1] < k)
                throw ShapeError(where + ": kernel larger than input " + std::to_string(cur[0]) +
                                 "x" + std::to_string(cur[1]));
            cur = {cur[0] - k + 1, cur[1] - k + 1, static_cast<std::size_t>(l.filters)};
            break;
        }
        case LayerSpec::Type::MaxPool: {
            if (cur.size() != 3) throw ShapeError(where + ": needs [H, W, C] input");
            if (cur[0] < 2 || cur[1] < 2) throw ShapeError(where + ": input too small to pool");
            cur = {cur[0] / 2, cur[1] / 2, cur[2]};
            break;
        }
        case LayerSpec::Type::ReLU:
            break;
        case LayerSpec::Type::Flatten:
            cur = {dims_product(cur)};
            break;
        case LayerSpec::Type::Dense: {
            if (cur.size() != 1)
                throw ShapeError(where + ": needs a flat input (insert flatten first)");
            if (l.nodes < 1) throw ShapeError(where + ": bad node count");
            cur = {static_cast<std::size_t>(l.nodes)};
            break;
        }
        }
        chain.push_back(cur);
    }
    return chain;
}

std::vector<std::size_t> NetworkSpec::output_shape() const { return shape_chain().back(); }

std::size_t NetworkSpec::param_count() const {
    const auto chain = shape_chain();
    std::size_t n = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.type == LayerSpec::Type::Conv2D) {
            const std::size_t k = static_cast<std::size_t>(l.kernel);
            n += static_cast<std::size_t>(l.filters) * k * k * chain[i][2] +
                 static_cast<std::size_t>(l.filters);
        } else if (l.type == LayerSpec::Type::Dense) {
            n += static_cast<std::size_t>(l.nodes) * chain[i][0] +
                 static_cast<std::size_t>(l.nodes);
        }
    }
    return n;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
    if (input_noise < 0.0) throw ConfigError("input_noise must be >= 0");
    if (shift_aug_w < 0) throw ConfigError("shift_aug_w must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("adam betas must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
    if (w_pos < 0.0 || w_head < 0.0) throw ConfigError("loss weights must be >= 0");
    if (!(position_scale > 0.0)) throw ConfigError("position_scale must be > 0");
}

Model init_model(const NetworkSpec& spec, std::uint64_t seed) {
    const auto chain = spec.shape_chain();
    Model m;
    m.spec = spec;
    m.params.resize(spec.layers.size());
    m.adam_m.resize(spec.layers.size());
    m.adam_v.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        std::vector<std::size_t> wdims, bdims;
        std::size_t fan_in = 0;
        if (l.type == LayerSpec::Type::Conv2D) {
            const std::size_t k = static_cast<std::size_t>(l.kernel);
            wdims = {static_cast<std::size_t>(l.filters), k, k, chain[i][2]};
            bdims = {static_cast<std::size_t>(l.filters)};
            fan_in = k * k * chain[i][2];
        } else if (l.type == LayerSpec::Type::Dense) {
            wdims = {static_cast<std::size_t>(l.nodes), chain[i][0]};
            bdims = {static_cast<std::size_t>(l.nodes)};
            fan_in = chain[i][0];
        } else {
            continue;
        }
        m.params[i].w = Tensor::zeros(wdims);
        m.params[i].b = Tensor::zeros(bdims);
        m.adam_m[i].w = Tensor::zeros(wdims);
        m.adam_m[i].b = Tensor::zeros(bdims);
        m.adam_v[i].w = Tensor::zeros(wdims);
        m.adam_v[i].b = Tensor::zeros(bdims);
        Rng rng(mix_seed(seed, 0x1417, i));
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (double& v : m.params[i].w.data) v = rng.uniform(-limit, limit);
    }
    return m;
}

std::size_t count_params(const Model& m) {
    std::size_t n = 0;
    for (const LayerParams& p : m.params) n += p.w.size() + p.b.size();
    return n;
}

namespace {

struct ForwardCache {
    std::vector<Tensor> acts; // acts[0] = input, acts[i+1] = output of layer i
    std::vector<std::vector<std::uint32_t>> pool_picks;
};

void im2col(const Tensor& in, int k, RowMat& col) {
    const int h = static_cast<int>(in.dims[0]);
    const int w = static_cast<int>(in.dims[1]);
    const int c = static_cast<int>(in.dims[2]);
    const int oh = h - k + 1;
    const int ow = w - k + 1;
    col.resize(static_cast<Eigen::Index>(oh) * ow, static_cast<Eigen::Index>(k) * k * c);
    const double* src = in.data.data();
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double* dst = col.data() + (static_cast<std::size_t>(y) * ow + x) * col.cols();
            for (int dy = 0; dy < k; ++dy) {
                const double* row = src + (static_cast<std::size_t>(y + dy) * w + x) * c;
                std::copy(row, row + static_cast<std::size_t>(k) * c,
                          dst + static_cast<std::size_t>(dy) * k * c);
            }
        }
    }
}

void conv_forward(const Tensor& in, const LayerParams& p, Tensor& out) {
    const int f = static_cast<int>(p.w.dims[0]);
    const int k = static_cast<int>(p.w.dims[1]);
    const int oh = static_cast<int>(in.dims[0]) - k + 1;
    const int ow = static_cast<int>(in.dims[1]) - k + 1;
    RowMat col;
    im2col(in, k, col);
    out = Tensor::zeros({static_cast<std::size_t>(oh), static_cast<std::size_t>(ow),
                         static_cast<std::size_t>(f)});
    CMapRow wmap(p.w.data.data(), f, col.cols());
    MapRow omap(out.data.data(), col.rows(), f);
    omap.noalias() = col * wmap.transpose();
    CMapVec bias(p.b.data.data(), f);
    omap.rowwise() += bias.transpose();
}

void conv_backward(const Tensor& in, const LayerParams& p, const Tensor& d_out, LayerParams& grad,
                   Tensor& d_in) {
    const int f = static_cast<int>(p.w.dims[0]);
    const int k = static_cast<int>(p.w.dims[1]);
    const int h = static_cast<int>(in.dims[0]);
    const int w = static_cast<int>(in.dims[1]);
    const int c = static_cast<int>(in.dims[2]);
    const int oh = h - k + 1;
    const int ow = w - k + 1;

    RowMat col;
    im2col(in, k, col);
    CMapRow dmap(d_out.data.data(), static_cast<Eigen::Index>(oh) * ow, f);
    MapRow gw(grad.w.data.data(), f, col.cols());
    gw.noalias() += dmap.transpose() * col;
    MapVec gb(grad.b.data.data(), f);
    gb.noalias() += dmap.colwise().sum().transpose();

    CMapRow wmap(p.w.data.data(), f, col.cols());
    RowMat d_col = dmap * wmap; // (oh*ow) x (k*k*c)
    d_in = Tensor::zeros(in.dims);
    double* dst = d_in.data.data();
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            const double* src =
                d_col.data() + (static_cast<std::size_t>(y) * ow + x) * d_col.cols();
            for (int dy = 0; dy < k; ++dy) {
                double* row = dst + (static_cast<std::size_t>(y + dy) * w + x) * c;
                const double* s = src + static_cast<std::size_t>(dy) * k * c;
                for (int i = 0; i < k * c; ++i) row[i] += s[i];
            }
        }
    }
}

void pool_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& picks) {
    const int h = static_cast<int>(in.dims[0]);
    const int w = static_cast<int>(in.dims[1]);
    const int c = static_cast<int>(in.dims[2]);
    const int oh = h / 2;
    const int ow = w / 2;
    out = Tensor::zeros({static_cast<std::size_t>(oh), static_cast<std::size_t>(ow),
                         static_cast<std::size_t>(c)});
    picks.resize(out.size());
    const double* src = in.data.data();
    double* dst = out.data.data();
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                double best = -std::numeric_limits<double>::infinity();
                std::uint32_t best_idx = 0;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::size_t idx =
                            (static_cast<std::size_t>(2 * y + dy) * w + (2 * x + dx)) * c + ch;
                        if (src[idx] > best) {
                            best = src[idx];
                            best_idx = static_cast<std::uint32_t>(idx);
                        }
                    }
                }
                const std::size_t out_idx = (static_cast<std::size_t>(y) * ow + x) * c + ch;
                dst[out_idx] = best;
                picks[out_idx] = best_idx;
            }
        }
    }
}

void dense_forward(const Tensor& in, const LayerParams& p, Tensor& out) {
    const Eigen::Index n_out = static_cast<Eigen::Index>(p.w.dims[0]);
    const Eigen::Index n_in = static_cast<Eigen::Index>(p.w.dims[1]);
    out = Tensor::zeros({p.w.dims[0]});
    CMapRow wmap(p.w.data.data(), n_out, n_in);
    CMapVec x(in.data.data(), n_in);
    MapVec y(out.data.data(), n_out);
    y.noalias() = wmap * x;
    y += CMapVec(p.b.data.data(), n_out);
}

Tensor run_forward(const Model& m, const Tensor& input, ForwardCache* cache) {
    if (input.dims != m.spec.input_shape)
        throw ShapeError("input shape does not match the network spec");
    if (input.data.size() != dims_product(input.dims))
        throw ShapeError("input tensor data does not match its dims");

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.acts.clear();
    c.pool_picks.assign(m.spec.layers.size(), {});
    c.acts.push_back(input);

    for (std::size_t i = 0; i < m.spec.layers.size(); ++i) {
        const LayerSpec& l = m.spec.layers[i];
        const Tensor& in = c.acts.back();
        Tensor out;
        switch (l.type) {
        case LayerSpec::Type::Conv2D:
            conv_forward(in, m.params[i], out);
            break;
        case LayerSpec::Type::MaxPool:
            pool_forward(in, out, c.pool_picks[i]);
            break;
        case LayerSpec::Type::ReLU:
            out = in;
            for (double& v : out.data) v = v > 0.0 ? v : 0.0;
            break;
        case LayerSpec::Type::Flatten:
            out = in;
            out.dims = {in.size()};
            break;
        case LayerSpec::Type::Dense:
            dense_forward(in, m.params[i], out);
            break;
        }
        c.acts.push_back(std::move(out));
    }
    return c.acts.back();
}

// Backprop one sample's output gradient through the cached activations,
// accumulating parameter gradients.
void run_backward(const Model& m, const ForwardCache& cache, Tensor d_out, Gradients& grads) {
    for (std::size_t ri = m.spec.layers.size(); ri-- > 0;) {
        const LayerSpec& l = m.spec.layers[ri];
        const Tensor& in = cache.acts[ri];
        Tensor d_in;
        switch (l.type) {
        case LayerSpec::Type::Conv2D:
            conv_backward(in, m.params[ri], d_out, grads[ri], d_in);
            break;
        case LayerSpec::Type::MaxPool: {
            d_in = Tensor::zeros(in.dims);
            const auto& picks = cache.pool_picks[ri];
            for (std::size_t o = 0; o < picks.size(); ++o) d_in.data[picks[o]] += d_out.data[o];
            break;
        }
        case LayerSpec::Type::ReLU: {
            d_in = d_out;
            for (std::size_t j = 0; j < d_in.data.size(); ++j)
                if (in.data[j] <= 0.0) d_in.data[j] = 0.0;
            break;
        }
        case LayerSpec::Type::Flatten:
            d_in = std::move(d_out);
            d_in.dims = in.dims;
            break;
        case LayerSpec::Type::Dense: {
            const Eigen::Index n_out = static_cast<Eigen::Index>(m.params[ri].w.dims[0]);
            const Eigen::Index n_in = static_cast<Eigen::Index>(m.params[ri].w.dims[1]);
            CMapVec dy(d_out.data.data(), n_out);
            CMapVec x(in.data.data(), n_in);
            MapRow gw(grads[ri].w.data.data(), n_out, n_in);
            gw.noalias() += dy * x.transpose();
            MapVec gb(grads[ri].b.data.data(), n_out);
            gb += dy;
            d_in = Tensor::zeros(in.dims);
            CMapRow wmap(m.params[ri].w.data.data(), n_out, n_in);
            MapVec dx(d_in.data.data(), n_in);
            dx.noalias() = wmap.transpose() * dy;
            break;
        }
        }
        d_out = std::move(d_in);
    }
}

Gradients zero_gradients(const Model& m) {
    Gradients g(m.params.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (m.params[i].w.size() > 0) {
            g[i].w = Tensor::zeros(m.params[i].w.dims);
            g[i].b = Tensor::zeros(m.params[i].b.dims);
        }
    }
    return g;
}

} // namespace

Tensor forward(const Model& m, const Tensor& input) { return run_forward(m, input, nullptr); }

std::array<double, 4> encode_target(const Pose& pose, double position_scale) {
    const double g = pose.gamma * kRadPerDeg;
    return {pose.x_e / position_scale, pose.x_n / position_scale, std::sin(g), std::cos(g)};
}

double compute_loss(const Model& m, const std::vector<Tensor>& inputs,
                    const std::vector<std::array<double, 4>>& targets, const TrainConfig& cfg) {
    if (inputs.size() != targets.size()) throw ShapeError("inputs/targets length mismatch");
    if (inputs.empty()) throw ConfigError("empty batch");
    double pos = 0.0, head = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Tensor y = run_forward(m, inputs[i], nullptr);
        if (y.size() != 4) throw ShapeError("loss needs a 4-value output head");
        const auto& t = targets[i];
        pos += (y.data[0] - t[0]) * (y.data[0] - t[0]) + (y.data[1] - t[1]) * (y.data[1] - t[1]);
        head += (y.data[2] - t[2]) * (y.data[2] - t[2]) + (y.data[3] - t[3]) * (y.data[3] - t[3]);
    }
    const double inv = 1.0 / (2.0 * static_cast<double>(inputs.size()));
    return cfg.w_pos * pos * inv + cfg.w_head * head * inv;
}

Gradients compute_gradients(const Model& m, const std::vector<Tensor>& inputs,
                            const std::vector<std::array<double, 4>>& targets,
                            const TrainConfig& cfg, double* loss_out) {
    if (inputs.size() != targets.size()) throw ShapeError("inputs/targets length mismatch");
    if (inputs.empty()) throw ConfigError("empty batch");
    Gradients grads = zero_gradients(m);
    const double inv_b = 1.0 / static_cast<double>(inputs.size());
    double pos = 0.0, head = 0.0;
    ForwardCache cache;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Tensor y = run_forward(m, inputs[i], &cache);
        if (y.size() != 4) throw ShapeError("loss needs a 4-value output head");
        const auto& t = targets[i];
        pos += (y.data[0] - t[0]) * (y.data[0] - t[0]) + (y.data[1] - t[1]) * (y.data[1] - t[1]);
        head += (y.data[2] - t[2]) * (y.data[2] - t[2]) + (y.data[3] - t[3]) * (y.data[3] - t[3]);

        Tensor d_out = Tensor::zeros({4});
        d_out.data[0] = cfg.w_pos * (y.data[0] - t[0]) * inv_b;
        d_out.data[1] = cfg.w_pos * (y.data[1] - t[1]) * inv_b;
        d_out.data[2] = cfg.w_head * (y.data[2] - t[2]) * inv_b;
        d_out.data[3] = cfg.w_head * (y.data[3] - t[3]) * inv_b;
        run_backward(m, cache, std::move(d_out), grads);
    }
    if (loss_out) {
        const double inv = 0.5 * inv_b;
        *loss_out = cfg.w_pos * pos * inv + cfg.w_head * head * inv;
    }
    return grads;
}

void adam_step(Model& m, const Gradients& g, const TrainConfig& cfg) {
    cfg.validate();
    if (g.size() != m.params.size()) throw ShapeError("gradient count does not match layers");
    m.adam_step_count += 1;
    const double t = static_cast<double>(m.adam_step_count);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    auto update = [&](Tensor& w, Tensor& mm, Tensor& vv, const Tensor& gg, bool decay) {
        const double shrink = decay ? 1.0 - cfg.learning_rate * cfg.weight_decay : 1.0;
        for (std::size_t i = 0; i < w.data.size(); ++i) {
            const double grad = gg.data[i];
            mm.data[i] = cfg.beta1 * mm.data[i] + (1.0 - cfg.beta1) * grad;
            vv.data[i] = cfg.beta2 * vv.data[i] + (1.0 - cfg.beta2) * grad * grad;
            const double mhat = mm.data[i] / bc1;
            const double vhat = vv.data[i] / bc2;
            w.data[i] = shrink * w.data[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    };
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (m.params[i].w.size() == 0) continue;
        if (g[i].w.dims != m.params[i].w.dims || g[i].b.dims != m.params[i].b.dims)
            throw ShapeError("gradient shapes do not match parameters");
        update(m.params[i].w, m.adam_m[i].w, m.adam_v[i].w, g[i].w, true);
        update(m.params[i].b, m.adam_m[i].b, m.adam_v[i].b, g[i].b, false);
    }
}

Tensor assemble_input(const Dataset& ds, const std::vector<NormStats>& norm,
                      const std::vector<std::size_t>& bs_slots, std::size_t rec) {
    if (ds.record_dims.size() != 2) throw ShapeError("model inputs need rank-2 records");
    if (norm.size() != bs_slots.size()) throw ShapeError("one NormStats per selected BS required");
    const std::size_t h = ds.record_dims[0];
    const std::size_t w = ds.record_dims[1];
    const std::size_t c = bs_slots.size();
    Tensor t = Tensor::zeros({h, w, c});
    for (std::size_t ci = 0; ci < c; ++ci) {
        const std::vector<double> values = normalized_record(ds, norm[ci], bs_slots[ci], rec);
        for (std::size_t e = 0; e < values.size(); ++e) t.data[e * c + ci] = values[e];
    }
    return t;
}

namespace {

// Shifts [H, W, C] content along W by s bins, zero-filling the vacated edge
// (inputs are z-scored, so zero is the per-element mean).
void shift_w(Tensor& t, int s) {
    const std::size_t h = t.dims[0], w = t.dims[1], c = t.dims[2];
    std::vector<double> row(w * c);
    for (std::size_t i = 0; i < h; ++i) {
        double* base = t.data.data() + i * w * c;
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j < w; ++j) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(j) - s;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(w)) continue;
            for (std::size_t k = 0; k < c; ++k)
                row[j * c + k] = base[static_cast<std::size_t>(src) * c + k];
        }
        std::copy(row.begin(), row.end(), base);
    }
}

} // namespace

Model train(const NetworkSpec& spec, const Dataset& ds, const SplitAssignment& split,
            const TrainConfig& cfg, const std::vector<std::string>& bs_selection) {
    cfg.validate();
    if (ds.storage != DatasetStorage::Wiometric)
        throw ConfigError("training needs a wiometric dataset (run the transform first)");
    if (split.train_indices.empty()) throw ConfigError("training split is empty");
    const auto out_shape = spec.output_shape();
    if (out_shape != std::vector<std::size_t>{4})
        throw ShapeError("pose-regression networks must end in a 4-node head");

    std::vector<std::string> bs_ids = bs_selection.empty() ? ds.bs_ids : bs_selection;
    std::vector<std::size_t> slots;
    for (const std::string& id : bs_ids) slots.push_back(ds.bs_slot(id));
    if (spec.input_shape.size() != 3 ||
        spec.input_shape[0] != ds.record_dims[0] || spec.input_shape[1] != ds.record_dims[1] ||
        spec.input_shape[2] != slots.size())
        throw ShapeError("network input shape does not match dataset records / BS selection");

    std::vector<NormStats> norm;
    if (ds.normalizer) {
        for (std::size_t s : slots) norm.push_back((*ds.normalizer)[s]);
    } else {
        for (std::size_t s : slots) norm.push_back(fit_normalizer(ds, split.train_indices, s));
    }

    Model m = init_model(spec, cfg.seed);
    m.bs_used = bs_ids;
    m.norm = norm;
    m.train_config = cfg;

    const std::size_t n_train = split.train_indices.size();
    std::vector<std::size_t> order = split.train_indices;

    // Held-out inputs are assembled lazily per epoch to keep memory flat; the
    // training inputs are assembled once since they are reused every epoch.
    std::vector<Tensor> train_inputs;
    std::vector<std::array<double, 4>> train_targets;
    train_inputs.reserve(n_train);
    train_targets.reserve(n_train);
    for (std::size_t idx : split.train_indices) {
        train_inputs.push_back(assemble_input(ds, norm, slots, idx));
        train_targets.push_back(encode_target(ds.poses[idx], cfg.position_scale));
    }
    std::vector<std::size_t> pos_of(ds.record_count(), 0);
    for (std::size_t i = 0; i < split.train_indices.size(); ++i)
        pos_of[split.train_indices[i]] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(mix_seed(cfg.seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        TrainConfig epoch_cfg = cfg;
        epoch_cfg.learning_rate = cfg.learning_rate * std::pow(cfg.lr_decay, epoch);
        Rng noise_rng(mix_seed(cfg.seed, 0xaa9e, static_cast<std::uint64_t>(epoch)));

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(n_train, start + cfg.batch_size);
            std::vector<Tensor> batch_in;
            std::vector<std::array<double, 4>> batch_t;
            batch_in.reserve(stop - start);
            batch_t.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch_in.push_back(train_inputs[pos_of[order[i]]]);
                batch_t.push_back(train_targets[pos_of[order[i]]]);
                if (cfg.shift_aug_w > 0) {
                    const int span = 2 * cfg.shift_aug_w + 1;
                    const int shift =
                        static_cast<int>(noise_rng.uniform_index(
                            static_cast<std::size_t>(span))) - cfg.shift_aug_w;
                    if (shift != 0) shift_w(batch_in.back(), shift);
                }
                if (cfg.input_noise > 0.0)
                    for (double& v : batch_in.back().data)
                        v += cfg.input_noise * noise_rng.gaussian();
            }
            double loss = 0.0;
            Gradients g = compute_gradients(m, batch_in, batch_t, epoch_cfg, &loss);
            if (!std::isfinite(loss))
                throw std::runtime_error(
                    "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(start / cfg.batch_size) +
                    " (last finite epoch loss: " +
                    std::to_string(m.history.empty() ? 0.0 : m.history.back().train_loss) + ")");
            adam_step(m, g, epoch_cfg);
            epoch_loss += loss * static_cast<double>(stop - start);
        }
        EpochStats stats;
        stats.train_loss = epoch_loss / static_cast<double>(n_train);

        if (!split.test_indices.empty()) {
            double val = 0.0;
            for (std::size_t idx : split.test_indices) {
                const Tensor in = assemble_input(ds, norm, slots, idx);
                std::vector<Tensor> one{in};
                std::vector<std::array<double, 4>> t{encode_target(ds.poses[idx],
                                                                   cfg.position_scale)};
                val += compute_loss(m, one, t, cfg);
            }
            stats.val_loss = val / static_cast<double>(split.test_indices.size());
        } else {
            stats.val_loss = std::numeric_limits<double>::quiet_NaN();
        }
        m.history.push_back(stats);
    }
    return m;
}

Pose predict(const Model& m, const Tensor& input) {
    const Tensor y = run_forward(m, input, nullptr);
    if (y.size() != 4) throw ShapeError("predict needs a 4-value output head");
    const double scale = m.train_config.position_scale;
    const double gamma = std::atan2(y.data[2], y.data[3]) * kDegPerRad;
    return Pose(y.data[0] * scale, y.data[1] * scale, gamma);
}

Pose predict_record(const Model& m, const Dataset& ds, std::size_t rec) {
    std::vector<std::size_t> slots;
    for (const std::string& id : m.bs_used) slots.push_back(ds.bs_slot(id));
    return predict(m, assemble_input(ds, m.norm, slots, rec));
}

namespace {

json spec_to_json(const NetworkSpec& spec) {
    json layers = json::array();
    for (const LayerSpec& l : spec.layers) {
        json e{{"type", layer_name(l.type)}};
        if (l.type == LayerSpec::Type::Conv2D) {
            e["filters"] = l.filters;
            e["kernel"] = l.kernel;
        } else if (l.type == LayerSpec::Type::Dense) {
            e["nodes"] = l.nodes;
        }
        layers.push_back(e);
    }
    return json{{"input_shape", spec.input_shape}, {"layers", layers}};
}

NetworkSpec spec_from_json(const json& j) {
    NetworkSpec spec;
    spec.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const json& e : j.at("layers")) {
        const std::string type = e.at("type").get<std::string>();
        if (type == "conv2d")
            spec.layers.push_back(LayerSpec::conv2d(e.at("filters").get<int>(),
                                                     e.at("kernel").get<int>()));
        else if (type == "maxpool")
            spec.layers.push_back(LayerSpec::maxpool());
        else if (type == "relu")
            spec.layers.push_back(LayerSpec::relu());
        else if (type == "flatten")
            spec.layers.push_back(LayerSpec::flatten());
        else if (type == "dense")
            spec.layers.push_back(LayerSpec::dense(e.at("nodes").get<int>()));
        else
            throw IoError("unknown layer type in checkpoint: " + type);
    }
    return spec;
}

json train_config_to_json(const TrainConfig& c) {
    return json{{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"lr_decay", c.lr_decay},
                {"input_noise", c.input_noise},
                {"weight_decay", c.weight_decay},
                {"shift_aug_w", c.shift_aug_w},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"epsilon", c.epsilon},
                {"seed", c.seed},
                {"w_pos", c.w_pos},
                {"w_head", c.w_head},
                {"position_scale", c.position_scale}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.lr_decay = j.value("lr_decay", 1.0);
    c.input_noise = j.value("input_noise", 0.0);
    c.weight_decay = j.value("weight_decay", 0.0);
    c.shift_aug_w = j.value("shift_aug_w", 0);
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.w_pos = j.at("w_pos").get<double>();
    c.w_head = j.at("w_head").get<double>();
    c.position_scale = j.at("position_scale").get<double>();
    return c;
}

} // namespace

void save_model(const Model& m, const fs::path& dir) {
    fs::create_directories(dir);
    json meta;
    meta["format"] = "wiom-model";
    meta["version"] = 1;
    meta["spec"] = spec_to_json(m.spec);
    meta["train_config"] = train_config_to_json(m.train_config);
    meta["adam_step_count"] = m.adam_step_count;
    meta["bs_used"] = m.bs_used;
    meta["param_count"] = count_params(m);

    json blobs = json::object();
    auto dump = [&](const std::string& name, const Tensor& t) {
        TensorD td{t.dims, t.data};
        write_blob(dir / (name + ".wiom"), td);
        blobs[name] = {{"file", name + ".wiom"}};
    };
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (m.params[i].w.size() == 0) continue;
        const std::string tag = std::to_string(i);
        dump("w" + tag, m.params[i].w);
        dump("b" + tag, m.params[i].b);
        dump("mw" + tag, m.adam_m[i].w);
        dump("mb" + tag, m.adam_m[i].b);
        dump("vw" + tag, m.adam_v[i].w);
        dump("vb" + tag, m.adam_v[i].b);
    }
    for (std::size_t bi = 0; bi < m.norm.size(); ++bi) {
        TensorF tf{{2, m.norm[bi].mean.size()}, {}};
        tf.data = m.norm[bi].mean;
        tf.data.insert(tf.data.end(), m.norm[bi].stdev.begin(), m.norm[bi].stdev.end());
        const std::string name = "norm" + std::to_string(bi);
        write_blob(dir / (name + ".wiom"), tf);
        blobs[name] = {{"file", name + ".wiom"}};
    }
    meta["blobs"] = blobs;

    json hist = json::array();
    for (const EpochStats& e : m.history)
        hist.push_back(json{{"train_loss", e.train_loss},
                            {"val_loss", std::isfinite(e.val_loss) ? json(e.val_loss) : json()}});
    meta["history"] = hist;

    std::ofstream os(dir / "metadata.json", std::ios::trunc);
    if (!os) throw IoError("cannot write model metadata in " + dir.string());
    os << meta.dump(2) << "\n";

    std::ofstream csv(dir / "history.csv", std::ios::trunc);
    csv << "epoch,train_loss,val_loss\n";
    char buf[128];
    for (std::size_t e = 0; e < m.history.size(); ++e) {
        if (std::isfinite(m.history[e].val_loss))
            std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", e + 1, m.history[e].train_loss,
                          m.history[e].val_loss);
        else
            std::snprintf(buf, sizeof(buf), "%zu,%.9g,\n", e + 1, m.history[e].train_loss);
        csv << buf;
    }
}

Model load_model(const fs::path& dir) {
    std::ifstream is(dir / "metadata.json");
    if (!is) throw IoError("missing model metadata in " + dir.string());
    json meta;
    try {
        is >> meta;
    } catch (const json::exception& e) {
        throw IoError("corrupt model metadata: " + std::string(e.what()));
    }
    try {
        if (meta.at("format").get<std::string>() != "wiom-model")
            throw IoError("not a wiom model checkpoint: " + dir.string());
        if (meta.at("version").get<int>() != 1)
            throw IoError("unsupported model checkpoint version");

        Model m;
        m.spec = spec_from_json(meta.at("spec"));
        m.train_config = train_config_from_json(meta.at("train_config"));
        m.adam_step_count = meta.at("adam_step_count").get<std::int64_t>();
        m.bs_used = meta.at("bs_used").get<std::vector<std::string>>();

        Model fresh = init_model(m.spec, 0);
        m.params = fresh.params;
        m.adam_m = fresh.adam_m;
        m.adam_v = fresh.adam_v;
        auto slurp = [&](const std::string& name, Tensor& t) {
            TensorD td = read_blob_f64(dir / (name + ".wiom"));
            if (td.dims != t.dims) throw IoError("checkpoint tensor " + name + " has wrong shape");
            t.data = std::move(td.data);
        };
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (m.params[i].w.size() == 0) continue;
            const std::string tag = std::to_string(i);
            slurp("w" + tag, m.params[i].w);
            slurp("b" + tag, m.params[i].b);
            slurp("mw" + tag, m.adam_m[i].w);
            slurp("mb" + tag, m.adam_m[i].b);
            slurp("vw" + tag, m.adam_v[i].w);
            slurp("vb" + tag, m.adam_v[i].b);
        }
        for (std::size_t bi = 0;; ++bi) {
            const fs::path p = dir / ("norm" + std::to_string(bi) + ".wiom");
            if (!fs::exists(p)) break;
            TensorF tf = read_blob_f32(p);
            if (tf.dims.size() != 2 || tf.dims[0] != 2)
                throw IoError("normalizer blob has wrong shape in checkpoint");
            NormStats stats;
            const std::size_t sz = tf.dims[1];
            stats.mean.assign(tf.data.begin(), tf.data.begin() + static_cast<std::ptrdiff_t>(sz));
            stats.stdev.assign(tf.data.begin() + static_cast<std::ptrdiff_t>(sz), tf.data.end());
            m.norm.push_back(std::move(stats));
        }
        if (m.norm.size() != m.bs_used.size())
            throw IoError("checkpoint normalizer count does not match bs_used");

        for (const json& e : meta.at("history")) {
            EpochStats stats;
            stats.train_loss = e.at("train_loss").get<double>();
            stats.val_loss = e.at("val_loss").is_null()
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : e.at("val_loss").get<double>();
            m.history.push_back(stats);
        }
        return m;
    } catch (const json::exception& e) {
        throw IoError("corrupt model metadata: " + std::string(e.what()));
    }
}

} // namespace wiom
