#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bplan/core.hpp"
#include "bplan/error.hpp"
#include "bplan/io.hpp"
#include "bplan/labeling.hpp"
#include "bplan/occupancy.hpp"
#include "bplan/rng.hpp"

namespace bplan::nn {

/// Dense row-major tensor (last index fastest). Conv layers use the layout
/// [channels, depth, height, width].
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return n;
    }
    size_t numel() const { return data.size(); }
};

enum class LayerKind : uint8_t {
    Conv3d = 1,
    MaxPool3d = 2,
    Relu = 3,
    Dropout = 4,
    Flatten = 5,
    Dense = 6,
};

/// One network layer with its parameters and Adam state. Conv weights are
/// laid out [filter][channel][kz][ky][kx]; dense weights [out][in + extra].
struct Layer {
    LayerKind kind = LayerKind::Relu;
    std::string name;
    bool frozen = false;
    int filters = 0, in_channels = 0, kernel = 0, stride = 1;  // conv3d
    int input_side = 0;  // conv3d: spatial side this layer sees (serialized)
    int out_units = 0, in_units = 0, extra_units = 0;          // dense
    double rate = 0.0;                                         // dropout
    std::vector<double> w, b;
    std::vector<double> m_w, v_w, m_b, v_b;
    uint64_t step = 0;

    size_t param_count() const { return w.size() + b.size(); }
    void init_moments() {
        m_w.assign(w.size(), 0.0);
        v_w.assign(w.size(), 0.0);
        m_b.assign(b.size(), 0.0);
        v_b.assign(b.size(), 0.0);
        step = 0;
    }
};

struct NetworkParams {
    std::vector<Layer> layers;
    int input_dim = 32;
    int input_channels = 1;
};

inline int conv_out_side(int in, int kernel, int stride) { return (in - kernel) / stride + 1; }

struct ArchConfig {
    int input_dim = 32;
    int conv1_filters = 32, conv1_kernel = 5, conv1_stride = 2;
    int conv2_filters = 32, conv2_kernel = 3, conv2_stride = 1;
    int dense_units = 128;
    double dropout_rate = 0.5;
    int output_units = 9;
    int extra_inputs = 6;  // plan endpoints, fed to the final dense layer
};

namespace detail {

inline void glorot_init(Layer& l, int fan_in, int fan_out, Rng& rng) {
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : l.w) v = rng.uniform(-a, a);
    for (auto& v : l.b) v = 0.0;
}

inline Layer make_conv(const std::string& name, int in_channels, int filters, int kernel,
                       int stride, Rng& rng) {
    Layer l;
    l.kind = LayerKind::Conv3d;
    l.name = name;
    l.filters = filters;
    l.in_channels = in_channels;
    l.kernel = kernel;
    l.stride = stride;
    l.w.resize(static_cast<size_t>(filters) * in_channels * kernel * kernel * kernel);
    l.b.resize(filters);
    int k3 = kernel * kernel * kernel;
    glorot_init(l, in_channels * k3, filters * k3, rng);
    l.init_moments();
    return l;
}

inline Layer make_dense(const std::string& name, int in_units, int extra_units, int out_units,
                        Rng& rng) {
    Layer l;
    l.kind = LayerKind::Dense;
    l.name = name;
    l.in_units = in_units;
    l.extra_units = extra_units;
    l.out_units = out_units;
    l.w.resize(static_cast<size_t>(out_units) * (in_units + extra_units));
    l.b.resize(out_units);
    glorot_init(l, in_units + extra_units, out_units, rng);
    l.init_moments();
    return l;
}

inline Layer make_simple(LayerKind kind, const std::string& name, double rate = 0.0) {
    Layer l;
    l.kind = kind;
    l.name = name;
    l.rate = rate;
    return l;
}

}  // namespace detail

/// conv1 -> relu -> conv2 -> relu -> pool -> flatten -> dense -> relu ->
/// dropout -> dense(+endpoints), no output nonlinearity.
inline NetworkParams make_network(const ArchConfig& arch, uint64_t seed) {
    Rng rng(derive_seed(seed, 0x4e4eull));
    NetworkParams net;
    net.input_dim = arch.input_dim;
    int side1 = conv_out_side(arch.input_dim, arch.conv1_kernel, arch.conv1_stride);
    int side2 = conv_out_side(side1, arch.conv2_kernel, arch.conv2_stride);
    if (side1 <= 0 || side2 <= 0 || side2 % 2 != 0)
        throw ShapeMismatchError("architecture does not fit the input grid");
    int pooled = side2 / 2;
    int flat = arch.conv2_filters * pooled * pooled * pooled;
    net.layers.push_back(detail::make_conv("conv1", 1, arch.conv1_filters, arch.conv1_kernel,
                                           arch.conv1_stride, rng));
    net.layers.back().input_side = arch.input_dim;
    net.layers.push_back(detail::make_simple(LayerKind::Relu, "relu1"));
    net.layers.push_back(detail::make_conv("conv2", arch.conv1_filters, arch.conv2_filters,
                                           arch.conv2_kernel, arch.conv2_stride, rng));
    net.layers.back().input_side = side1;
    net.layers.push_back(detail::make_simple(LayerKind::Relu, "relu2"));
    net.layers.push_back(detail::make_simple(LayerKind::MaxPool3d, "pool"));
    net.layers.push_back(detail::make_simple(LayerKind::Flatten, "flatten"));
    net.layers.push_back(detail::make_dense("dense1", flat, 0, arch.dense_units, rng));
    net.layers.push_back(detail::make_simple(LayerKind::Relu, "relu3"));
    net.layers.push_back(detail::make_simple(LayerKind::Dropout, "dropout", arch.dropout_rate));
    net.layers.push_back(
        detail::make_dense("dense2", arch.dense_units, arch.extra_inputs, arch.output_units, rng));
    return net;
}

inline NetworkParams make_regression_net(int input_dim, uint64_t seed) {
    ArchConfig arch;
    arch.input_dim = input_dim;
    return make_network(arch, seed);
}

inline NetworkParams make_pretext_net(int input_dim, int n_classes, uint64_t seed) {
    ArchConfig arch;
    arch.input_dim = input_dim;
    arch.output_units = n_classes;
    arch.extra_inputs = 0;
    return make_network(arch, seed);
}

// --- Layer forward/backward kernels ---------------------------------------------

/// Valid (no padding) cross-correlation with stride, plus per-filter bias.
inline Tensor conv3d_forward(const Tensor& in, const Layer& l) {
    if (in.shape.size() != 4 || in.shape[0] != l.in_channels)
        throw ShapeMismatchError("conv3d: input channel mismatch");
    const int C = l.in_channels, D = in.shape[1], H = in.shape[2], W = in.shape[3];
    const int K = l.kernel, S = l.stride, F = l.filters;
    if (D < K || H < K || W < K) throw ShapeMismatchError("conv3d: input smaller than kernel");
    const int OD = conv_out_side(D, K, S), OH = conv_out_side(H, K, S), OW = conv_out_side(W, K, S);
    Tensor out({F, OD, OH, OW});
    for (int f = 0; f < F; ++f) {
        double bias = l.b[f];
        double* ob = out.data.data() + static_cast<size_t>(f) * OD * OH * OW;
        for (int i = 0; i < OD * OH * OW; ++i) ob[i] = bias;
    }
    for (int f = 0; f < F; ++f) {
        for (int c = 0; c < C; ++c) {
            const double* wbase =
                l.w.data() + (static_cast<size_t>(f) * C + c) * K * K * K;
            for (int kz = 0; kz < K; ++kz)
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx) {
                        double wv = wbase[(kz * K + ky) * K + kx];
                        for (int z = 0; z < OD; ++z) {
                            int iz = z * S + kz;
                            for (int y = 0; y < OH; ++y) {
                                int iy = y * S + ky;
                                const double* ir =
                                    in.data.data() +
                                    ((static_cast<size_t>(c) * D + iz) * H + iy) * W + kx;
                                double* orow = out.data.data() +
                                               ((static_cast<size_t>(f) * OD + z) * OH + y) * OW;
                                for (int x = 0; x < OW; ++x) orow[x] += wv * ir[x * S];
                            }
                        }
                    }
        }
    }
    return out;
}

/// Exact gradients of conv3d_forward with respect to input, weights and bias.
inline void conv3d_backward(const Tensor& grad_out, const Tensor& in, const Layer& l,
                            Tensor& grad_in, std::vector<double>& gw, std::vector<double>& gb) {
    const int C = l.in_channels, D = in.shape[1], H = in.shape[2], W = in.shape[3];
    const int K = l.kernel, S = l.stride, F = l.filters;
    const int OD = conv_out_side(D, K, S), OH = conv_out_side(H, K, S), OW = conv_out_side(W, K, S);
    if (grad_out.shape != std::vector<int>{F, OD, OH, OW})
        throw ShapeMismatchError("conv3d_backward: grad shape mismatch");
    grad_in = Tensor({C, D, H, W});
    gw.assign(l.w.size(), 0.0);
    gb.assign(l.b.size(), 0.0);
    for (int f = 0; f < F; ++f) {
        const double* gbase = grad_out.data.data() + static_cast<size_t>(f) * OD * OH * OW;
        double acc = 0;
        for (int i = 0; i < OD * OH * OW; ++i) acc += gbase[i];
        gb[f] = acc;
    }
    for (int f = 0; f < F; ++f) {
        for (int c = 0; c < C; ++c) {
            const double* wbase = l.w.data() + (static_cast<size_t>(f) * C + c) * K * K * K;
            double* gwbase = gw.data() + (static_cast<size_t>(f) * C + c) * K * K * K;
            for (int kz = 0; kz < K; ++kz)
                for (int ky = 0; ky < K; ++ky)
                    for (int kx = 0; kx < K; ++kx) {
                        double wv = wbase[(kz * K + ky) * K + kx];
                        double gw_acc = 0;
                        for (int z = 0; z < OD; ++z) {
                            int iz = z * S + kz;
                            for (int y = 0; y < OH; ++y) {
                                int iy = y * S + ky;
                                const double* ir =
                                    in.data.data() +
                                    ((static_cast<size_t>(c) * D + iz) * H + iy) * W + kx;
                                double* gir = grad_in.data.data() +
                                              ((static_cast<size_t>(c) * D + iz) * H + iy) * W + kx;
                                const double* grow =
                                    grad_out.data.data() +
                                    ((static_cast<size_t>(f) * OD + z) * OH + y) * OW;
                                for (int x = 0; x < OW; ++x) {
                                    double g = grow[x];
                                    gw_acc += g * ir[x * S];
                                    gir[x * S] += wv * g;
                                }
                            }
                        }
                        gwbase[(kz * K + ky) * K + kx] += gw_acc;
                    }
        }
    }
}

/// 2x2x2 max pooling over non-overlapping blocks; argmax (flat input index,
/// first-index tie-break) is recorded for the backward pass.
inline Tensor maxpool3d_forward(const Tensor& in, std::vector<int32_t>& argmax) {
    if (in.shape.size() != 4) throw ShapeMismatchError("maxpool3d: expected 4D input");
    const int C = in.shape[0], D = in.shape[1], H = in.shape[2], W = in.shape[3];
    if (D % 2 || H % 2 || W % 2)
        throw OddDimensionError("maxpool3d: spatial dimensions must be even");
    const int OD = D / 2, OH = H / 2, OW = W / 2;
    Tensor out({C, OD, OH, OW});
    argmax.assign(out.numel(), 0);
    size_t oi = 0;
    for (int c = 0; c < C; ++c)
        for (int z = 0; z < OD; ++z)
            for (int y = 0; y < OH; ++y)
                for (int x = 0; x < OW; ++x, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    int32_t best_idx = 0;
                    for (int dz = 0; dz < 2; ++dz)
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                size_t ii = ((static_cast<size_t>(c) * D + (2 * z + dz)) * H +
                                             (2 * y + dy)) *
                                                W +
                                            (2 * x + dx);
                                if (in.data[ii] > best) {
                                    best = in.data[ii];
                                    best_idx = static_cast<int32_t>(ii);
                                }
                            }
                    out.data[oi] = best;
                    argmax[oi] = best_idx;
                }
    return out;
}

inline Tensor maxpool3d_backward(const Tensor& grad_out, const std::vector<int32_t>& argmax,
                                 const std::vector<int>& in_shape) {
    Tensor grad_in(in_shape);
    for (size_t i = 0; i < grad_out.numel(); ++i) grad_in.data[argmax[i]] += grad_out.data[i];
    return grad_in;
}

inline Tensor relu_forward(const Tensor& in) {
    Tensor out = in;
    for (auto& v : out.data) v = std::max(0.0, v);
    return out;
}

inline Tensor relu_backward(const Tensor& grad_out, const Tensor& in) {
    Tensor grad = grad_out;
    for (size_t i = 0; i < grad.data.size(); ++i)
        if (in.data[i] <= 0.0) grad.data[i] = 0.0;
    return grad;
}

/// Inverted dropout: zero with probability rate, scale survivors by
/// 1/(1-rate); identity at inference.
inline Tensor dropout_forward(const Tensor& in, double rate, bool train_mode, Rng* rng,
                              std::vector<uint8_t>& mask) {
    if (!train_mode || rate <= 0.0) {
        mask.clear();
        return in;
    }
    Tensor out = in;
    mask.assign(in.numel(), 1);
    double scale = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < out.data.size(); ++i) {
        if (rng->uniform01() < rate) {
            mask[i] = 0;
            out.data[i] = 0.0;
        } else {
            out.data[i] *= scale;
        }
    }
    return out;
}

inline Tensor dropout_backward(const Tensor& grad_out, double rate,
                               const std::vector<uint8_t>& mask) {
    if (mask.empty()) return grad_out;
    Tensor grad = grad_out;
    double scale = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < grad.data.size(); ++i) grad.data[i] = mask[i] ? grad.data[i] * scale : 0.0;
    return grad;
}

/// Affine map over concat(input, extra); no nonlinearity here.
inline std::vector<double> dense_forward(const std::vector<double>& in,
                                         const std::vector<double>& extra, const Layer& l) {
    if (static_cast<int>(in.size()) != l.in_units ||
        static_cast<int>(extra.size()) != l.extra_units)
        throw ShapeMismatchError("dense: input width mismatch");
    const int total = l.in_units + l.extra_units;
    std::vector<double> out(l.out_units);
    for (int o = 0; o < l.out_units; ++o) {
        const double* row = l.w.data() + static_cast<size_t>(o) * total;
        double acc = l.b[o];
        for (int i = 0; i < l.in_units; ++i) acc += row[i] * in[i];
        for (int i = 0; i < l.extra_units; ++i) acc += row[l.in_units + i] * extra[i];
        out[o] = acc;
    }
    return out;
}

inline void dense_backward(const std::vector<double>& grad_out, const std::vector<double>& in,
                           const std::vector<double>& extra, const Layer& l,
                           std::vector<double>& grad_in, std::vector<double>& gw,
                           std::vector<double>& gb) {
    const int total = l.in_units + l.extra_units;
    grad_in.assign(l.in_units, 0.0);
    gw.assign(l.w.size(), 0.0);
    gb.assign(l.b.size(), 0.0);
    for (int o = 0; o < l.out_units; ++o) {
        double g = grad_out[o];
        gb[o] = g;
        const double* row = l.w.data() + static_cast<size_t>(o) * total;
        double* gwrow = gw.data() + static_cast<size_t>(o) * total;
        for (int i = 0; i < l.in_units; ++i) {
            gwrow[i] = g * in[i];
            grad_in[i] += g * row[i];
        }
        for (int i = 0; i < l.extra_units; ++i) gwrow[l.in_units + i] = g * extra[i];
    }
}

// --- Losses ----------------------------------------------------------------------

struct LossResult {
    double value = 0;
    std::vector<double> grad;
};

inline LossResult loss_mse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) throw ShapeMismatchError("mse: size mismatch");
    LossResult r;
    r.grad.resize(pred.size());
    double n = static_cast<double>(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - target[i];
        r.value += d * d / n;
        r.grad[i] = 2.0 * d / n;
    }
    return r;
}

inline LossResult loss_softmax_cross_entropy(const std::vector<double>& pred, int target) {
    if (target < 0 || target >= static_cast<int>(pred.size()))
        throw ShapeMismatchError("cross-entropy: target class out of range");
    double mx = *std::max_element(pred.begin(), pred.end());
    double sum = 0;
    std::vector<double> p(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        p[i] = std::exp(pred[i] - mx);
        sum += p[i];
    }
    LossResult r;
    r.grad.resize(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        p[i] /= sum;
        r.grad[i] = p[i];
    }
    r.value = -std::log(std::max(p[static_cast<size_t>(target)], 1e-300));
    r.grad[static_cast<size_t>(target)] -= 1.0;
    return r;
}

// --- Whole-network execution ------------------------------------------------------

struct ForwardTrace {
    std::vector<Tensor> inputs;                 // input seen by each layer
    std::vector<std::vector<int32_t>> argmax;   // maxpool layers
    std::vector<std::vector<uint8_t>> masks;    // dropout layers
};

inline Tensor tensor_from_grid(const occupancy::VoxelGrid& grid) {
    // grid is x-fastest; tensor is [1, z, y, x] with x fastest: same order
    Tensor t({1, static_cast<int>(grid.dims[2]), static_cast<int>(grid.dims[1]),
              static_cast<int>(grid.dims[0])});
    t.data = grid.values;
    return t;
}

inline std::vector<double> forward(const NetworkParams& net, Tensor input,
                                   const std::vector<double>& extra, bool train_mode, Rng* rng,
                                   ForwardTrace* trace) {
    const size_t n = net.layers.size();
    if (trace) {
        trace->inputs.assign(n, {});
        trace->argmax.assign(n, {});
        trace->masks.assign(n, {});
    }
    Tensor cur = std::move(input);
    std::vector<uint8_t> scratch_mask;
    for (size_t idx = 0; idx < n; ++idx) {
        const Layer& l = net.layers[idx];
        if (trace) trace->inputs[idx] = cur;
        switch (l.kind) {
            case LayerKind::Conv3d: cur = conv3d_forward(cur, l); break;
            case LayerKind::MaxPool3d: {
                std::vector<int32_t> argmax;
                cur = maxpool3d_forward(cur, argmax);
                if (trace) trace->argmax[idx] = std::move(argmax);
                break;
            }
            case LayerKind::Relu: cur = relu_forward(cur); break;
            case LayerKind::Dropout: {
                cur = dropout_forward(cur, l.rate, train_mode, rng, scratch_mask);
                if (trace) trace->masks[idx] = scratch_mask;
                break;
            }
            case LayerKind::Flatten: cur.shape = {static_cast<int>(cur.numel())}; break;
            case LayerKind::Dense: {
                static const std::vector<double> kNoExtra;
                auto out = dense_forward(cur.data, l.extra_units ? extra : kNoExtra, l);
                int width = static_cast<int>(out.size());
                cur = Tensor({width}, std::move(out));
                break;
            }
        }
    }
    return cur.data;
}

struct GradAccum {
    std::vector<std::vector<double>> gw, gb;

    explicit GradAccum(const NetworkParams& net) {
        gw.resize(net.layers.size());
        gb.resize(net.layers.size());
        for (size_t i = 0; i < net.layers.size(); ++i) {
            gw[i].assign(net.layers[i].w.size(), 0.0);
            gb[i].assign(net.layers[i].b.size(), 0.0);
        }
    }
    void reset() {
        for (auto& v : gw) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : gb) std::fill(v.begin(), v.end(), 0.0);
    }
    void scale(double s) {
        for (auto& v : gw)
            for (auto& x : v) x *= s;
        for (auto& v : gb)
            for (auto& x : v) x *= s;
    }
};

/// Backpropagates `grad_out` through the trace, adding parameter gradients
/// into `accum`.
inline void backward(const NetworkParams& net, const ForwardTrace& trace,
                     const std::vector<double>& grad_out, const std::vector<double>& extra,
                     GradAccum& accum) {
    Tensor grad({static_cast<int>(grad_out.size())}, grad_out);
    std::vector<double> gw, gb, grad_in;
    for (size_t ri = net.layers.size(); ri-- > 0;) {
        const Layer& l = net.layers[ri];
        switch (l.kind) {
            case LayerKind::Dense: {
                static const std::vector<double> kNoExtra;
                dense_backward(grad.data, trace.inputs[ri].data,
                               l.extra_units ? extra : kNoExtra, l, grad_in, gw, gb);
                for (size_t i = 0; i < gw.size(); ++i) accum.gw[ri][i] += gw[i];
                for (size_t i = 0; i < gb.size(); ++i) accum.gb[ri][i] += gb[i];
                grad = Tensor({l.in_units}, grad_in);
                break;
            }
            case LayerKind::Flatten: grad.shape = trace.inputs[ri].shape; break;
            case LayerKind::Dropout: grad = dropout_backward(grad, l.rate, trace.masks[ri]); break;
            case LayerKind::Relu: grad = relu_backward(grad, trace.inputs[ri]); break;
            case LayerKind::MaxPool3d:
                grad = maxpool3d_backward(grad, trace.argmax[ri], trace.inputs[ri].shape);
                break;
            case LayerKind::Conv3d: {
                Tensor grad_in_t;
                conv3d_backward(grad, trace.inputs[ri], l, grad_in_t, gw, gb);
                for (size_t i = 0; i < gw.size(); ++i) accum.gw[ri][i] += gw[i];
                for (size_t i = 0; i < gb.size(); ++i) accum.gb[ri][i] += gb[i];
                grad = std::move(grad_in_t);
                break;
            }
        }
    }
}

// --- Adam -------------------------------------------------------------------------

struct TrainConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    int batch_size = 16;
    int epochs = 170;
    uint64_t seed = 1;
    double stop_at_train_mse = 0.0;  // early stop when > 0 and reached
};

/// One Adam update with bias correction. Frozen layers are skipped entirely:
/// weights, moments and step counter stay untouched.
inline void adam_step(Layer& l, const std::vector<double>& gw, const std::vector<double>& gb,
                      const TrainConfig& cfg) {
    if (l.frozen || l.param_count() == 0) return;
    l.step += 1;
    double t = static_cast<double>(l.step);
    double bc1 = 1.0 - std::pow(cfg.beta1, t);
    double bc2 = 1.0 - std::pow(cfg.beta2, t);
    auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                      const std::vector<double>& g) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    };
    update(l.w, l.m_w, l.v_w, gw);
    update(l.b, l.m_b, l.v_b, gb);
}

// --- Training ----------------------------------------------------------------------

struct EpochStats {
    double train_mse = 0;
    double test_mse = 0;
};

inline std::vector<double> sample_endpoints(const labeling::DatasetSample& s) {
    return {s.endpoints.begin(), s.endpoints.end()};
}
inline std::vector<double> sample_targets(const labeling::DatasetSample& s) {
    return {s.labels.begin(), s.labels.end()};
}

/// Mean inference-mode MSE over a sample index set.
inline double evaluate_mse(const NetworkParams& net, const labeling::Dataset& ds,
                           const std::vector<int>& indices) {
    if (indices.empty()) return 0.0;
    double total = 0;
    for (int i : indices) {
        const auto& s = ds.samples[i];
        auto pred = forward(net, tensor_from_grid(s.grid), sample_endpoints(s), false, nullptr,
                            nullptr);
        total += loss_mse(pred, sample_targets(s)).value;
    }
    return total / static_cast<double>(indices.size());
}

/// Minibatch Adam training on the regression task. Entry 0 of the returned
/// history is the pre-training state; entry e the state after epoch e. Both
/// MSE columns are inference-mode evaluations, so histories depend only on
/// the parameters and the seed.
inline std::vector<EpochStats> train(NetworkParams& net, const labeling::Dataset& ds,
                                     const TrainConfig& cfg) {
    if (ds.samples.empty()) throw EmptyInputError("train: empty dataset");
    std::vector<int> train_idx = ds.train_indices();
    std::vector<int> test_idx = ds.test_indices();
    Rng rng(derive_seed(cfg.seed, 0x7124ull));
    std::vector<EpochStats> history;
    history.push_back({evaluate_mse(net, ds, train_idx), evaluate_mse(net, ds, test_idx)});
    GradAccum accum(net);
    ForwardTrace trace;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (size_t pos = 0; pos < train_idx.size(); pos += cfg.batch_size) {
            size_t batch_end = std::min(train_idx.size(), pos + cfg.batch_size);
            accum.reset();
            for (size_t bi = pos; bi < batch_end; ++bi) {
                const auto& s = ds.samples[train_idx[bi]];
                auto extra = sample_endpoints(s);
                auto pred = forward(net, tensor_from_grid(s.grid), extra, true, &rng, &trace);
                auto loss = loss_mse(pred, sample_targets(s));
                backward(net, trace, loss.grad, extra, accum);
            }
            accum.scale(1.0 / static_cast<double>(batch_end - pos));
            for (size_t li = 0; li < net.layers.size(); ++li)
                adam_step(net.layers[li], accum.gw[li], accum.gb[li], cfg);
        }
        EpochStats stats;
        stats.train_mse = evaluate_mse(net, ds, train_idx);
        stats.test_mse = evaluate_mse(net, ds, test_idx);
        history.push_back(stats);
        if (cfg.stop_at_train_mse > 0.0 && stats.train_mse <= cfg.stop_at_train_mse) break;
    }
    return history;
}

// --- Pretext pretraining --------------------------------------------------------------

enum class PretextClass : int { Box = 0, Sphere = 1, Cylinder = 2, WallWithGap = 3, Empty = 4 };
inline constexpr int kPretextClasses = 5;

/// Rasterizes a random primitive of the given class into a [-1, 1] grid with
/// sensor-like occupied/free levels plus mild noise. Coordinates are in the
/// unit cube.
inline Tensor make_pretext_sample(int input_dim, PretextClass cls, Rng& rng) {
    const double occ = 2.0 * occupancy::probability(occupancy::kLogOddsMax) - 1.0;
    const double fre = 2.0 * occupancy::probability(occupancy::kLogOddsMin) - 1.0;
    Tensor t({1, input_dim, input_dim, input_dim});
    auto fill = [&](auto&& contains_fn) {
        size_t i = 0;
        for (int z = 0; z < input_dim; ++z)
            for (int y = 0; y < input_dim; ++y)
                for (int x = 0; x < input_dim; ++x, ++i) {
                    Point3 p{(x + 0.5) / input_dim, (y + 0.5) / input_dim, (z + 0.5) / input_dim};
                    t.data[i] = contains_fn(p) ? occ : fre;
                }
    };
    switch (cls) {
        case PretextClass::Box: {
            geom::BoxShape b;
            b.center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
            b.half = {rng.uniform(0.1, 0.25), rng.uniform(0.1, 0.25), rng.uniform(0.1, 0.25)};
            b.yaw = rng.uniform(0, M_PI);
            fill([&](const Point3& p) { return geom::contains(b, p); });
            break;
        }
        case PretextClass::Sphere: {
            geom::SphereShape s;
            s.center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
            s.radius = rng.uniform(0.15, 0.3);
            fill([&](const Point3& p) { return geom::contains(s, p); });
            break;
        }
        case PretextClass::Cylinder: {
            geom::CylinderShape c;
            c.base_center = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.0, 0.2)};
            c.radius = rng.uniform(0.1, 0.25);
            c.height = rng.uniform(0.5, 0.9);
            fill([&](const Point3& p) { return geom::contains(c, p); });
            break;
        }
        case PretextClass::WallWithGap: {
            double wall_y = rng.uniform(0.3, 0.7);
            double half_t = rng.uniform(0.05, 0.1);
            double gap_x = rng.uniform(0.2, 0.8);
            double gap_half = rng.uniform(0.06, 0.15);
            fill([&](const Point3& p) {
                return std::abs(p.y - wall_y) <= half_t &&
                       std::abs(p.x - gap_x) > gap_half;
            });
            break;
        }
        case PretextClass::Empty: {
            fill([](const Point3&) { return false; });
            break;
        }
    }
    for (auto& v : t.data) v = std::clamp(v + rng.uniform(-0.05, 0.05), -1.0, 1.0);
    return t;
}

struct PretextConfig {
    int input_dim = 16;
    int n_train = 300;
    int n_holdout = 60;
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 0.001;
    uint64_t seed = 1;
};

struct PretextResult {
    NetworkParams params;
    double holdout_accuracy = 0;
    std::vector<double> loss_history;  // mean train CE per epoch
};

/// Shape-classification pretext task standing in for the urban-objects
/// pretraining: teaches the conv stack generic 3D features, then the dense
/// head is discarded by transfer().
inline PretextResult pretrain_pretext(const PretextConfig& cfg) {
    Rng data_rng(derive_seed(cfg.seed, 0x9137ull));
    std::vector<Tensor> grids;
    std::vector<int> labels;
    const int total = cfg.n_train + cfg.n_holdout;
    for (int i = 0; i < total; ++i) {
        int cls = static_cast<int>(data_rng.uniform_index(kPretextClasses));
        grids.push_back(make_pretext_sample(cfg.input_dim, static_cast<PretextClass>(cls), data_rng));
        labels.push_back(cls);
    }
    PretextResult result;
    result.params = make_pretext_net(cfg.input_dim, kPretextClasses, derive_seed(cfg.seed, 1));
    NetworkParams& net = result.params;
    TrainConfig tcfg;
    tcfg.learning_rate = cfg.learning_rate;
    tcfg.batch_size = cfg.batch_size;
    Rng rng(derive_seed(cfg.seed, 2));
    std::vector<int> order(cfg.n_train);
    std::iota(order.begin(), order.end(), 0);
    GradAccum accum(net);
    ForwardTrace trace;
    const std::vector<double> no_extra;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0;
        for (size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
            size_t batch_end = std::min(order.size(), pos + cfg.batch_size);
            accum.reset();
            for (size_t bi = pos; bi < batch_end; ++bi) {
                auto pred = forward(net, grids[order[bi]], no_extra, true, &rng, &trace);
                auto loss = loss_softmax_cross_entropy(pred, labels[order[bi]]);
                epoch_loss += loss.value;
                backward(net, trace, loss.grad, no_extra, accum);
            }
            accum.scale(1.0 / static_cast<double>(batch_end - pos));
            for (size_t li = 0; li < net.layers.size(); ++li)
                adam_step(net.layers[li], accum.gw[li], accum.gb[li], tcfg);
        }
        result.loss_history.push_back(epoch_loss / cfg.n_train);
    }
    int correct = 0;
    for (int i = cfg.n_train; i < total; ++i) {
        auto pred = forward(net, grids[i], no_extra, false, nullptr, nullptr);
        int arg = static_cast<int>(std::max_element(pred.begin(), pred.end()) - pred.begin());
        if (arg == labels[i]) ++correct;
    }
    result.holdout_accuracy = static_cast<double>(correct) / cfg.n_holdout;
    return result;
}

/// Transfer: conv layers copied and frozen, dense layers replaced with fresh
/// random initialization, output head sized for bottleneck regression.
inline NetworkParams transfer(const NetworkParams& pretrained, uint64_t seed) {
    NetworkParams net = make_regression_net(pretrained.input_dim, seed);
    for (size_t i = 0; i < net.layers.size(); ++i) {
        Layer& dst = net.layers[i];
        if (dst.kind != LayerKind::Conv3d) continue;
        if (i >= pretrained.layers.size()) throw ShapeMismatchError("transfer: layer count mismatch");
        const Layer& src = pretrained.layers[i];
        if (src.kind != LayerKind::Conv3d || src.w.size() != dst.w.size() ||
            src.b.size() != dst.b.size())
            throw ShapeMismatchError("transfer: conv stack incompatible");
        dst.w = src.w;
        dst.b = src.b;
        dst.init_moments();
        dst.frozen = true;
    }
    return net;
}

// --- Inference --------------------------------------------------------------------

/// Descriptor extraction + endpoint normalization + forward pass, decoded
/// into three bottleneck points clamped to the workspace.
inline std::array<Point3, 3> predict_bottlenecks(const NetworkParams& net,
                                                 const occupancy::OccupancyOctree& map,
                                                 const scene::PlanningQuery& query,
                                                 const Aabb& bounds) {
    uint32_t d = static_cast<uint32_t>(net.input_dim);
    double side = bounds.max_side() / net.input_dim;
    auto grid = occupancy::to_voxel_descriptor(map, bounds.min, {d, d, d}, side);
    auto ns = labeling::normalize(query.start, bounds);
    auto ng = labeling::normalize(query.goal, bounds);
    std::vector<double> extra{ns[0], ns[1], ns[2], ng[0], ng[1], ng[2]};
    auto out = forward(net, tensor_from_grid(grid), extra, false, nullptr, nullptr);
    std::array<Point3, 3> points;
    for (int i = 0; i < 3; ++i) {
        std::array<double, 3> n;
        for (int a = 0; a < 3; ++a) n[a] = std::clamp(out[3 * i + a], -1.0, 1.0);
        points[i] = labeling::denormalize(n, bounds);
    }
    return points;
}

inline size_t count_parameters(const NetworkParams& net, bool trainable_only = false) {
    size_t total = 0;
    for (const auto& l : net.layers) {
        if (trainable_only && l.frozen) continue;
        total += l.param_count();
    }
    return total;
}

// --- Weights file (BWT1) -------------------------------------------------------------

inline std::string to_binary(const NetworkParams& net) {
    io::BinaryWriter w;
    w.write_bytes("BWT1", 4);
    w.write(static_cast<uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        w.write(static_cast<uint8_t>(l.kind));
        w.write(static_cast<uint8_t>(l.frozen ? 1 : 0));
        w.write(static_cast<uint32_t>(l.name.size()));
        w.write_bytes(l.name.data(), l.name.size());
        std::vector<uint64_t> dims;
        switch (l.kind) {
            case LayerKind::Conv3d:
                dims = {static_cast<uint64_t>(l.filters), static_cast<uint64_t>(l.in_channels),
                        static_cast<uint64_t>(l.kernel), static_cast<uint64_t>(l.stride),
                        static_cast<uint64_t>(l.input_side)};
                break;
            case LayerKind::Dense:
                dims = {static_cast<uint64_t>(l.out_units), static_cast<uint64_t>(l.in_units),
                        static_cast<uint64_t>(l.extra_units)};
                break;
            case LayerKind::Dropout:
                dims = {std::bit_cast<uint64_t>(l.rate)};  // raw f64 bits
                break;
            default: break;
        }
        w.write(static_cast<uint32_t>(dims.size()));
        for (uint64_t d : dims) w.write(d);
        w.write_array(l.w.data(), l.w.size());
        w.write_array(l.b.data(), l.b.size());
        w.write_array(l.m_w.data(), l.m_w.size());
        w.write_array(l.m_b.data(), l.m_b.size());
        w.write_array(l.v_w.data(), l.v_w.size());
        w.write_array(l.v_b.data(), l.v_b.size());
        w.write(l.step);
    }
    return w.take();
}

inline NetworkParams params_from_binary(const std::string& data) {
    io::BinaryReader r(data);
    r.expect_magic("BWT1");
    NetworkParams net;
    uint32_t count = r.read<uint32_t>();
    for (uint32_t i = 0; i < count; ++i) {
        Layer l;
        uint8_t kind = r.read<uint8_t>();
        if (kind < 1 || kind > 6) throw CorruptFileError("weights: bad layer kind");
        l.kind = static_cast<LayerKind>(kind);
        l.frozen = r.read<uint8_t>() != 0;
        uint32_t name_len = r.read<uint32_t>();
        if (name_len > 4096) throw CorruptFileError("weights: implausible name length");
        l.name.resize(name_len);
        r.read_array(l.name.data(), name_len);
        uint32_t rank = r.read<uint32_t>();
        std::vector<uint64_t> dims(rank);
        for (auto& d : dims) d = r.read<uint64_t>();
        size_t w_len = 0, b_len = 0;
        switch (l.kind) {
            case LayerKind::Conv3d: {
                if (rank != 5) throw CorruptFileError("weights: conv dims");
                l.filters = static_cast<int>(dims[0]);
                l.in_channels = static_cast<int>(dims[1]);
                l.kernel = static_cast<int>(dims[2]);
                l.stride = static_cast<int>(dims[3]);
                l.input_side = static_cast<int>(dims[4]);
                w_len = static_cast<size_t>(l.filters) * l.in_channels * l.kernel * l.kernel *
                        l.kernel;
                b_len = l.filters;
                break;
            }
            case LayerKind::Dense: {
                if (rank != 3) throw CorruptFileError("weights: dense dims");
                l.out_units = static_cast<int>(dims[0]);
                l.in_units = static_cast<int>(dims[1]);
                l.extra_units = static_cast<int>(dims[2]);
                w_len = static_cast<size_t>(l.out_units) * (l.in_units + l.extra_units);
                b_len = l.out_units;
                break;
            }
            case LayerKind::Dropout: {
                if (rank != 1) throw CorruptFileError("weights: dropout dims");
                l.rate = std::bit_cast<double>(dims[0]);
                break;
            }
            default:
                if (rank != 0) throw CorruptFileError("weights: unexpected dims");
                break;
        }
        l.w.resize(w_len);
        l.b.resize(b_len);
        l.m_w.resize(w_len);
        l.m_b.resize(b_len);
        l.v_w.resize(w_len);
        l.v_b.resize(b_len);
        r.read_array(l.w.data(), w_len);
        r.read_array(l.b.data(), b_len);
        r.read_array(l.m_w.data(), w_len);
        r.read_array(l.m_b.data(), b_len);
        r.read_array(l.v_w.data(), w_len);
        r.read_array(l.v_b.data(), b_len);
        l.step = r.read<uint64_t>();
        net.layers.push_back(std::move(l));
    }
    if (!r.at_end()) throw CorruptFileError("weights: trailing bytes");
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Conv3d) {
            net.input_dim = l.input_side;
            break;
        }
    if (net.input_dim <= 0) throw CorruptFileError("weights: missing conv input side");
    return net;
}

inline void save_weights(const NetworkParams& net, const std::string& path) {
    io::write_file(path, to_binary(net));
}
inline NetworkParams load_weights(const std::string& path) {
    return params_from_binary(io::read_file(path));
}

}  // namespace bplan::nn
