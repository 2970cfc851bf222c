#include "dwl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dwl {

Tensor tensor_from_matrix(const RealMatrix& m) {
    Tensor t({m.rows(), m.cols()});
    t.data = m.values();
    return t;
}

RealMatrix matrix_from_tensor(const Tensor& t) {
    if (t.axes() != 2) throw ShapeMismatch("matrix_from_tensor: tensor is not 2-axis");
    RealMatrix m(t.shape[0], t.shape[1]);
    m.values() = t.data;
    return m;
}

std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape) {
    using Kind = LayerSpec::Kind;
    switch (spec.kind) {
        case Kind::Dense:
            if (in_shape.size() != 2 || in_shape[1] != spec.in)
                throw ShapeMismatch("dense layer expects (batch, " + std::to_string(spec.in) +
                                    ")");
            return {in_shape[0], spec.out};
        case Kind::Relu:
            return in_shape;
        case Kind::Conv2d: {
            if (in_shape.size() != 4 || in_shape[1] != spec.in_ch)
                throw ShapeMismatch("conv2d expects (batch, " + std::to_string(spec.in_ch) +
                                    ", h, w)");
            const std::size_t k = spec.kernel;
            if (spec.pad == Padding::Same) return {in_shape[0], spec.out_ch, in_shape[2], in_shape[3]};
            if (in_shape[2] < k || in_shape[3] < k)
                throw ShapeMismatch("conv2d valid padding: image smaller than kernel");
            return {in_shape[0], spec.out_ch, in_shape[2] - k + 1, in_shape[3] - k + 1};
        }
        case Kind::MaxPool2:
            if (in_shape.size() != 4 || in_shape[2] < 2 || in_shape[3] < 2)
                throw ShapeMismatch("maxpool2 expects (batch, c, h>=2, w>=2)");
            return {in_shape[0], in_shape[1], in_shape[2] / 2, in_shape[3] / 2};
        case Kind::Flatten:
            if (in_shape.size() != 4) throw ShapeMismatch("flatten expects a 4-axis tensor");
            return {in_shape[0], in_shape[1] * in_shape[2] * in_shape[3]};
    }
    throw ShapeMismatch("unknown layer kind");
}

LayerParams kaiming_init(SeededRng& rng, const LayerSpec& spec) {
    LayerParams p;
    if (spec.kind == LayerSpec::Kind::Dense) {
        const double std_dev = std::sqrt(2.0 / static_cast<double>(spec.in));
        p.w = Tensor({spec.out, spec.in});
        for (double& v : p.w.data) v = rng.normal(0.0, std_dev);
        p.b = Tensor({spec.out});
    } else if (spec.kind == LayerSpec::Kind::Conv2d) {
        const double fan_in = static_cast<double>(spec.in_ch * spec.kernel * spec.kernel);
        const double std_dev = std::sqrt(2.0 / fan_in);
        p.w = Tensor({spec.out_ch, spec.in_ch, spec.kernel, spec.kernel});
        for (double& v : p.w.data) v = rng.normal(0.0, std_dev);
        p.b = Tensor({spec.out_ch});
    }
    return p;
}

ParamList kaiming_init_all(SeededRng& rng, std::span<const LayerSpec> specs) {
    ParamList out;
    out.reserve(specs.size());
    for (const LayerSpec& s : specs) out.push_back(kaiming_init(rng, s));
    return out;
}

namespace {

Tensor dense_forward(const LayerSpec& spec, const LayerParams& p, const Tensor& x) {
    const std::size_t batch = x.shape[0];
    Tensor y({batch, spec.out});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < spec.out; ++o) {
            double acc = p.b.data[o];
            for (std::size_t i = 0; i < spec.in; ++i)
                acc += x.at(b, i) * p.w.at(o, i);
            y.at(b, o) = acc;
        }
    return y;
}

Tensor conv_forward(const LayerSpec& spec, const LayerParams& p, const Tensor& x) {
    const std::size_t batch = x.shape[0], h = x.shape[2], w = x.shape[3];
    const std::size_t k = spec.kernel;
    const std::size_t off = (spec.pad == Padding::Same) ? k / 2 : 0;
    const auto out_shape = layer_output_shape(spec, x.shape);
    Tensor y(out_shape);
    const std::size_t oh = out_shape[2], ow = out_shape[3];
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t oc = 0; oc < spec.out_ch; ++oc)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = p.b.data[oc];
                    for (std::size_t ic = 0; ic < spec.in_ch; ++ic)
                        for (std::size_t u = 0; u < k; ++u)
                            for (std::size_t v = 0; v < k; ++v) {
                                const std::ptrdiff_t yy =
                                    static_cast<std::ptrdiff_t>(i + u) -
                                    static_cast<std::ptrdiff_t>(off);
                                const std::ptrdiff_t xx =
                                    static_cast<std::ptrdiff_t>(j + v) -
                                    static_cast<std::ptrdiff_t>(off);
                                if (yy < 0 || xx < 0 ||
                                    yy >= static_cast<std::ptrdiff_t>(h) ||
                                    xx >= static_cast<std::ptrdiff_t>(w))
                                    continue;
                                acc += x.at(b, ic, static_cast<std::size_t>(yy),
                                            static_cast<std::size_t>(xx)) *
                                       p.w.data[((oc * spec.in_ch + ic) * k + u) * k + v];
                            }
                    y.at(b, oc, i, j) = acc;
                }
    return y;
}

Tensor maxpool_forward(const Tensor& x, std::vector<std::size_t>& argmax) {
    const std::size_t batch = x.shape[0], ch = x.shape[1];
    const std::size_t oh = x.shape[2] / 2, ow = x.shape[3] / 2;
    Tensor y({batch, ch, oh, ow});
    argmax.assign(y.numel(), 0);
    std::size_t n = 0;
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    double best = x.at(b, c, 2 * i, 2 * j);
                    std::size_t best_idx =
                        ((b * ch + c) * x.shape[2] + 2 * i) * x.shape[3] + 2 * j;
                    // scan order fixed; strictly-greater keeps the first max
                    for (std::size_t u = 0; u < 2; ++u)
                        for (std::size_t v = 0; v < 2; ++v) {
                            const double cand = x.at(b, c, 2 * i + u, 2 * j + v);
                            if (cand > best) {
                                best = cand;
                                best_idx = ((b * ch + c) * x.shape[2] + 2 * i + u) *
                                               x.shape[3] +
                                           2 * j + v;
                            }
                        }
                    y.at(b, c, i, j) = best;
                    argmax[n++] = best_idx;
                }
    return y;
}

}  // namespace

ForwardResult forward(std::span<const LayerSpec> specs,
                      std::span<const LayerParams> params, const Tensor& x) {
    if (params.size() != specs.size())
        throw ShapeMismatch("forward: params/specs length mismatch");
    ForwardResult res;
    res.cache.inputs.reserve(specs.size());
    Tensor cur = x;
    for (std::size_t li = 0; li < specs.size(); ++li) {
        const LayerSpec& spec = specs[li];
        layer_output_shape(spec, cur.shape);  // validates chaining
        res.cache.inputs.push_back(cur);
        switch (spec.kind) {
            case LayerSpec::Kind::Dense:
                cur = dense_forward(spec, params[li], cur);
                break;
            case LayerSpec::Kind::Relu: {
                Tensor y = cur;
                for (double& v : y.data) v = std::max(0.0, v);
                cur = std::move(y);
                break;
            }
            case LayerSpec::Kind::Conv2d:
                cur = conv_forward(spec, params[li], cur);
                break;
            case LayerSpec::Kind::MaxPool2: {
                res.cache.pool_argmax.emplace_back();
                cur = maxpool_forward(cur, res.cache.pool_argmax.back());
                break;
            }
            case LayerSpec::Kind::Flatten: {
                Tensor y({cur.shape[0], cur.shape[1] * cur.shape[2] * cur.shape[3]});
                y.data = cur.data;
                cur = std::move(y);
                break;
            }
        }
    }
    res.output = std::move(cur);
    return res;
}

BackwardResult backward(std::span<const LayerSpec> specs,
                        std::span<const LayerParams> params, const ForwardCache& cache,
                        const Tensor& output_grad) {
    if (cache.inputs.size() != specs.size())
        throw ShapeMismatch("backward: cache does not match layer stack");
    BackwardResult res;
    res.param_grads.assign(specs.size(), LayerParams{});
    Tensor grad = output_grad;
    std::size_t pool_idx = cache.pool_argmax.size();

    for (std::size_t li = specs.size(); li-- > 0;) {
        const LayerSpec& spec = specs[li];
        const Tensor& x = cache.inputs[li];
        switch (spec.kind) {
            case LayerSpec::Kind::Dense: {
                const std::size_t batch = x.shape[0];
                LayerParams g;
                g.w = Tensor({spec.out, spec.in});
                g.b = Tensor({spec.out});
                Tensor dx({batch, spec.in});
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t o = 0; o < spec.out; ++o) {
                        const double go = grad.at(b, o);
                        g.b.data[o] += go;
                        for (std::size_t i = 0; i < spec.in; ++i) {
                            g.w.at(o, i) += go * x.at(b, i);
                            dx.at(b, i) += go * params[li].w.at(o, i);
                        }
                    }
                res.param_grads[li] = std::move(g);
                grad = std::move(dx);
                break;
            }
            case LayerSpec::Kind::Relu: {
                Tensor dx = grad;
                for (std::size_t i = 0; i < dx.numel(); ++i)
                    if (x.data[i] <= 0.0) dx.data[i] = 0.0;
                grad = std::move(dx);
                break;
            }
            case LayerSpec::Kind::Conv2d: {
                const std::size_t batch = x.shape[0], h = x.shape[2], w = x.shape[3];
                const std::size_t k = spec.kernel;
                const std::size_t off = (spec.pad == Padding::Same) ? k / 2 : 0;
                const auto out_shape = layer_output_shape(spec, x.shape);
                const std::size_t oh = out_shape[2], ow = out_shape[3];
                LayerParams g;
                g.w = Tensor({spec.out_ch, spec.in_ch, k, k});
                g.b = Tensor({spec.out_ch});
                Tensor dx(x.shape);
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t oc = 0; oc < spec.out_ch; ++oc)
                        for (std::size_t i = 0; i < oh; ++i)
                            for (std::size_t j = 0; j < ow; ++j) {
                                const double go = grad.at(b, oc, i, j);
                                if (go == 0.0) continue;
                                g.b.data[oc] += go;
                                for (std::size_t ic = 0; ic < spec.in_ch; ++ic)
                                    for (std::size_t u = 0; u < k; ++u)
                                        for (std::size_t v = 0; v < k; ++v) {
                                            const std::ptrdiff_t yy =
                                                static_cast<std::ptrdiff_t>(i + u) -
                                                static_cast<std::ptrdiff_t>(off);
                                            const std::ptrdiff_t xx =
                                                static_cast<std::ptrdiff_t>(j + v) -
                                                static_cast<std::ptrdiff_t>(off);
                                            if (yy < 0 || xx < 0 ||
                                                yy >= static_cast<std::ptrdiff_t>(h) ||
                                                xx >= static_cast<std::ptrdiff_t>(w))
                                                continue;
                                            const std::size_t widx =
                                                ((oc * spec.in_ch + ic) * k + u) * k + v;
                                            g.w.data[widx] +=
                                                go * x.at(b, ic,
                                                          static_cast<std::size_t>(yy),
                                                          static_cast<std::size_t>(xx));
                                            dx.at(b, ic, static_cast<std::size_t>(yy),
                                                  static_cast<std::size_t>(xx)) +=
                                                go * params[li].w.data[widx];
                                        }
                            }
                res.param_grads[li] = std::move(g);
                grad = std::move(dx);
                break;
            }
            case LayerSpec::Kind::MaxPool2: {
                --pool_idx;
                const std::vector<std::size_t>& argmax = cache.pool_argmax[pool_idx];
                Tensor dx(x.shape);
                for (std::size_t n = 0; n < grad.numel(); ++n)
                    dx.data[argmax[n]] += grad.data[n];
                grad = std::move(dx);
                break;
            }
            case LayerSpec::Kind::Flatten: {
                Tensor dx(x.shape);
                dx.data = grad.data;
                grad = std::move(dx);
                break;
            }
        }
    }
    res.input_grad = std::move(grad);
    return res;
}

Tensor softmax(const Tensor& logits) {
    if (logits.axes() != 2) throw ShapeMismatch("softmax: logits must be 2-axis");
    const std::size_t batch = logits.shape[0], k = logits.shape[1];
    Tensor p = logits;
    for (std::size_t b = 0; b < batch; ++b) {
        double mx = p.at(b, 0);
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, p.at(b, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p.at(b, j) = std::exp(p.at(b, j) - mx);
            sum += p.at(b, j);
        }
        for (std::size_t j = 0; j < k; ++j) p.at(b, j) /= sum;
    }
    return p;
}

LossResult softmax_ce(const Tensor& logits, std::span<const int> labels) {
    if (logits.axes() != 2) throw ShapeMismatch("softmax_ce: logits must be 2-axis");
    const std::size_t batch = logits.shape[0], k = logits.shape[1];
    if (labels.size() != batch) throw ShapeMismatch("softmax_ce: one label per row required");
    for (int lbl : labels)
        if (lbl < 0 || static_cast<std::size_t>(lbl) >= k)
            throw BadLabel("softmax_ce: label " + std::to_string(lbl) + " outside [0, " +
                           std::to_string(k) + ")");
    LossResult res;
    res.grad = softmax(logits);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t lbl = static_cast<std::size_t>(labels[b]);
        loss -= std::log(std::max(res.grad.at(b, lbl), 1e-300));
        res.grad.at(b, lbl) -= 1.0;
    }
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (double& v : res.grad.data) v *= inv_batch;
    res.loss = loss * inv_batch;
    return res;
}

LossResult mse(const Tensor& pred, const Tensor& target) {
    if (pred.shape != target.shape) throw ShapeMismatch("mse: shapes differ");
    LossResult res;
    res.grad = pred;
    const double inv_n = 1.0 / static_cast<double>(pred.numel());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double d = pred.data[i] - target.data[i];
        loss += d * d;
        res.grad.data[i] = 2.0 * d * inv_n;
    }
    res.loss = loss * inv_n;
    return res;
}

void adam_step(AdamState& state, ParamList& params, const ParamList& grads) {
    if (params.size() != grads.size()) throw ShapeMismatch("adam_step: list sizes differ");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].w = Tensor(params[i].w.shape);
            state.m[i].b = Tensor(params[i].b.shape);
            state.v[i].w = Tensor(params[i].w.shape);
            state.v[i].b = Tensor(params[i].b.shape);
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        if (p.shape != g.shape) throw ShapeMismatch("adam_step: grad shape differs");
        for (std::size_t i = 0; i < p.numel(); ++i) {
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        update(params[i].w, grads[i].w, state.m[i].w, state.v[i].w);
        update(params[i].b, grads[i].b, state.m[i].b, state.v[i].b);
    }
}

double grad_check(std::span<const LayerSpec> specs, ParamList params, const Tensor& x,
                  const std::function<LossResult(const Tensor&)>& loss) {
    ForwardResult fw = forward(specs, params, x);
    LossResult lr = loss(fw.output);
    BackwardResult bw = backward(specs, params, fw.cache, lr.grad);

    const double h = 1e-6;
    double worst = 0.0;
    auto probe = [&](Tensor& p, const Tensor& analytic) {
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double keep = p.data[i];
            p.data[i] = keep + h;
            const double up = loss(forward(specs, params, x).output).loss;
            p.data[i] = keep - h;
            const double dn = loss(forward(specs, params, x).output).loss;
            p.data[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double an = analytic.data[i];
            const double denom = std::max({std::fabs(an), std::fabs(fd), 1e-12});
            worst = std::max(worst, std::fabs(an - fd) / denom);
        }
    };
    for (std::size_t li = 0; li < params.size(); ++li) {
        probe(params[li].w, bw.param_grads[li].w);
        probe(params[li].b, bw.param_grads[li].b);
    }
    return worst;
}

}  // namespace dwl
