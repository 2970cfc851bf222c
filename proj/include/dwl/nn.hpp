#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dwl/errors.hpp"
#include "dwl/matrix.hpp"
#include "dwl/rng.hpp"

namespace dwl {

// Dense tensor of up to 4 axes (batch, channel, height, width); dense paths
// use 2 axes (batch, features).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return s.empty() ? 0 : n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t axes() const { return shape.size(); }

    // 2-axis access
    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    // 4-axis access
    double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
        return data[((b * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }
    double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return data[((b * shape[1] + c) * shape[2] + y) * shape[3] + x];
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape == b.shape && a.data == b.data;
    }
};

Tensor tensor_from_matrix(const RealMatrix& m);  // m rows x cols -> 2-axis tensor
RealMatrix matrix_from_tensor(const Tensor& t);  // 2-axis tensor -> matrix

enum class Padding { Same, Valid };

// Layer description. Parameter-free layers leave the size fields at zero.
struct LayerSpec {
    enum class Kind { Dense, Relu, Conv2d, MaxPool2, Flatten };
    Kind kind = Kind::Relu;
    std::size_t in = 0, out = 0;        // Dense
    std::size_t in_ch = 0, out_ch = 0;  // Conv2d
    std::size_t kernel = 3;             // Conv2d, fixed 3
    Padding pad = Padding::Same;        // Conv2d

    static LayerSpec dense(std::size_t in, std::size_t out) {
        LayerSpec s;
        s.kind = Kind::Dense;
        s.in = in;
        s.out = out;
        return s;
    }
    static LayerSpec relu() { return LayerSpec{}; }
    static LayerSpec conv2d(std::size_t in_ch, std::size_t out_ch, Padding pad = Padding::Same) {
        LayerSpec s;
        s.kind = Kind::Conv2d;
        s.in_ch = in_ch;
        s.out_ch = out_ch;
        s.pad = pad;
        return s;
    }
    static LayerSpec maxpool2() {
        LayerSpec s;
        s.kind = Kind::MaxPool2;
        return s;
    }
    static LayerSpec flatten() {
        LayerSpec s;
        s.kind = Kind::Flatten;
        return s;
    }

    bool has_params() const { return kind == Kind::Dense || kind == Kind::Conv2d; }
};

// Weights and bias of one layer; both empty for parameter-free layers.
// Dense: w is (out, in), b is (out). Conv2d: w is (out_ch, in_ch, k, k),
// b is (out_ch).
struct LayerParams {
    Tensor w;
    Tensor b;

    friend bool operator==(const LayerParams& a, const LayerParams& b) {
        return a.w == b.w && a.b == b.b;
    }
};

using ParamList = std::vector<LayerParams>;

// Output shape of one layer given its input shape; validates chaining.
std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape);

// Kaiming-initialized parameters: weights ~ Gaussian(0, sqrt(2/fan_in)),
// biases zero. fan_in is `in` for Dense and in_ch*kernel^2 for Conv2d.
LayerParams kaiming_init(SeededRng& rng, const LayerSpec& spec);
ParamList kaiming_init_all(SeededRng& rng, std::span<const LayerSpec> specs);

// Everything backward needs: the input fed to each layer and max-pool argmax
// positions (flat indices into the pool input).
struct ForwardCache {
    std::vector<Tensor> inputs;
    std::vector<std::vector<std::size_t>> pool_argmax;
};

struct ForwardResult {
    Tensor output;
    ForwardCache cache;
};

ForwardResult forward(std::span<const LayerSpec> specs,
                      std::span<const LayerParams> params, const Tensor& x);

struct BackwardResult {
    Tensor input_grad;
    ParamList param_grads;
};

BackwardResult backward(std::span<const LayerSpec> specs,
                        std::span<const LayerParams> params, const ForwardCache& cache,
                        const Tensor& output_grad);

struct LossResult {
    double loss = 0.0;
    Tensor grad;
};

// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);

// Mean over the batch of -log softmax(logits)[label]; gradient is
// (softmax - onehot) / batch.
LossResult softmax_ce(const Tensor& logits, std::span<const int> labels);

// Mean squared difference over all elements; gradient 2(pred-target)/count.
LossResult mse(const Tensor& pred, const Tensor& target);

// Standard bias-corrected Adam over a parameter list.
struct AdamState {
    double lr = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    ParamList m, v;  // lazily shaped on first call
};

void adam_step(AdamState& state, ParamList& params, const ParamList& grads);

// Max over all parameters of the relative disagreement between analytic and
// central-difference gradients of `loss(forward(x))`, with a stabilized
// denominator max(|analytic|, |fd|, 1e-12). h = 1e-6.
double grad_check(std::span<const LayerSpec> specs, ParamList params, const Tensor& x,
                  const std::function<LossResult(const Tensor&)>& loss);

}  // namespace dwl
