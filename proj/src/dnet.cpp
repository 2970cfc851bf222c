#include "dwl/dnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dwl/tolerances.hpp"

namespace dwl {

std::size_t FittedLd::width() const {
    switch (spec.kind) {
        case LdSourceSpec::Kind::Bdr:
            return bdr ? bdr->effective_components() : 0;
        case LdSourceSpec::Kind::Pca:
            return pca_basis.cols();
        case LdSourceSpec::Kind::None:
            return 0;
    }
    return 0;
}

FittedLd ld_fit(const LdSourceSpec& spec, const Dataset& train) {
    FittedLd fitted;
    fitted.spec = spec;
    if (spec.kind == LdSourceSpec::Kind::Bdr) {
        auto [model, report] = bdr_fit(train.x, spec.bdr);
        fitted.bdr = std::move(model);
    } else if (spec.kind == LdSourceSpec::Kind::Pca) {
        fitted.pca_basis = pca_baseline(train.x, spec.pca_r);
        fitted.pca_center.assign(train.dim(), 0.0);
        for (std::size_t f = 0; f < train.dim(); ++f) {
            double m = 0.0;
            for (std::size_t s = 0; s < train.n(); ++s) m += train.x(f, s);
            fitted.pca_center[f] = m / static_cast<double>(train.n());
        }
    }
    return fitted;
}

RealMatrix ld_project(const FittedLd& src, const Dataset& dataset) {
    switch (src.spec.kind) {
        case LdSourceSpec::Kind::Bdr:
            return bdr_project(*src.bdr, dataset.x);
        case LdSourceSpec::Kind::Pca: {
            if (dataset.dim() != src.pca_basis.rows())
                throw DimMismatch("ld_project: data dimension differs from PCA basis");
            RealMatrix xc = dataset.x;
            for (std::size_t f = 0; f < xc.rows(); ++f)
                for (std::size_t s = 0; s < xc.cols(); ++s) xc(f, s) -= src.pca_center[f];
            return matmul_tn(xc, src.pca_basis);  // N x r
        }
        case LdSourceSpec::Kind::None:
            return RealMatrix(dataset.n(), 0);
    }
    return RealMatrix();
}

namespace {

StandardizeStats fit_column_stats(const RealMatrix& features) {
    StandardizeStats st;
    const std::size_t n = features.rows(), d = features.cols();
    st.mean.resize(d);
    st.std.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += features(i, j);
        m /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = features(i, j) - m;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        st.mean[j] = m;
        st.std[j] = std::max(std::sqrt(var), tol::kStdFloor);
    }
    return st;
}

RealMatrix apply_column_stats(const RealMatrix& features, const StandardizeStats& st) {
    RealMatrix z = features;
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            z(i, j) = (features(i, j) - st.mean[j]) / st.std[j];
    return z;
}

}  // namespace

std::pair<RealMatrix, StandardizeStats> compute_ld_features(const FittedLd& src,
                                                            const Dataset& train,
                                                            bool standardize) {
    RealMatrix features = ld_project(src, train);
    StandardizeStats stats;
    if (standardize && features.cols() > 0) {
        stats = fit_column_stats(features);
        features = apply_column_stats(features, stats);
    }
    return {std::move(features), std::move(stats)};
}

RealMatrix compute_ld_features(const FittedLd& src, const Dataset& dataset,
                               const StandardizeStats& train_stats, bool standardize) {
    RealMatrix features = ld_project(src, dataset);
    if (standardize && features.cols() > 0) {
        if (train_stats.mean.size() != features.cols())
            throw DimMismatch("compute_ld_features: stats do not match feature width");
        features = apply_column_stats(features, train_stats);
    }
    return features;
}

Tensor aggregate(const Tensor& f_h, const Tensor& f_l, Aggregation mode) {
    if (f_h.axes() != 2 || f_l.axes() != 2)
        throw ShapeMismatch("aggregate: both feature blocks must be 2-axis");
    if (f_h.shape[0] != f_l.shape[0])
        throw ShapeMismatch("aggregate: batch sizes differ");
    const std::size_t batch = f_h.shape[0];
    if (mode == Aggregation::Sum) {
        if (f_h.shape[1] != f_l.shape[1])
            throw ShapeMismatch("aggregate: Sum requires equal widths, got " +
                                std::to_string(f_h.shape[1]) + " and " +
                                std::to_string(f_l.shape[1]));
        Tensor out = f_h;
        for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += f_l.data[i];
        return out;
    }
    Tensor out({batch, f_h.shape[1] + f_l.shape[1]});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t j = 0; j < f_h.shape[1]; ++j) out.at(b, j) = f_h.at(b, j);
        for (std::size_t j = 0; j < f_l.shape[1]; ++j)
            out.at(b, f_h.shape[1] + j) = f_l.at(b, j);
    }
    return out;
}

DNetModel dnet_build(const DNetConfig& config, const std::vector<std::size_t>& input_shape,
                     std::size_t ld_width, SeededRng& rng) {
    std::vector<std::size_t> shape = input_shape;
    for (const LayerSpec& spec : config.hd_layers) shape = layer_output_shape(spec, shape);
    if (shape.size() != 2)
        throw ShapeMismatch("dnet_build: HD stack must end with a 2-axis feature block");
    const std::size_t hd_w = shape[1];

    std::size_t fused_w = hd_w;
    if (config.ld_source.kind != LdSourceSpec::Kind::None) {
        if (config.aggregation == Aggregation::Concat)
            fused_w = hd_w + ld_width;
        else if (hd_w != ld_width)
            throw BadConfig("dnet_build: Sum aggregation needs HD width " +
                            std::to_string(hd_w) + " == LD width " + std::to_string(ld_width));
    }
    if (config.fusion_width == 0 || config.head.out == 0)
        throw BadConfig("dnet_build: fusion_width and head output must be >= 1");

    DNetModel model;
    model.config = config;
    model.fusion_specs = {LayerSpec::dense(fused_w, config.fusion_width)};
    if (config.fusion_relu) model.fusion_specs.push_back(LayerSpec::relu());
    model.head_specs = {LayerSpec::dense(config.fusion_width, config.head.out)};
    model.hd_params = kaiming_init_all(rng, config.hd_layers);
    model.fusion_params = kaiming_init_all(rng, model.fusion_specs);
    model.head_params = kaiming_init_all(rng, model.head_specs);
    return model;
}

DNetForwardResult dnet_forward(const DNetModel& model, const Tensor& batch_x,
                               const RealMatrix& batch_ld) {
    DNetForwardResult res;
    ForwardResult hd = forward(model.config.hd_layers, model.hd_params, batch_x);
    res.hd_out = hd.output;
    res.hd_cache = std::move(hd.cache);

    if (model.config.ld_source.kind != LdSourceSpec::Kind::None) {
        if (batch_ld.rows() != res.hd_out.shape[0])
            throw ShapeMismatch("dnet_forward: LD rows must align with the batch");
        res.fused = aggregate(res.hd_out, tensor_from_matrix(batch_ld),
                              model.config.aggregation);
    } else {
        res.fused = res.hd_out;
    }

    ForwardResult fusion = forward(model.fusion_specs, model.fusion_params, res.fused);
    res.pre_head = fusion.output;
    res.fusion_cache = std::move(fusion.cache);

    ForwardResult head = forward(model.head_specs, model.head_params, res.pre_head);
    res.output = head.output;
    res.head_cache = std::move(head.cache);
    return res;
}

DNetGrads dnet_backward(const DNetModel& model, const DNetForwardResult& fw,
                        const Tensor& output_grad) {
    DNetGrads grads;
    BackwardResult head = backward(model.head_specs, model.head_params, fw.head_cache,
                                   output_grad);
    grads.head = std::move(head.param_grads);

    BackwardResult fusion = backward(model.fusion_specs, model.fusion_params,
                                     fw.fusion_cache, head.input_grad);
    grads.fusion = std::move(fusion.param_grads);

    Tensor hd_grad;
    if (model.config.ld_source.kind != LdSourceSpec::Kind::None &&
        model.config.aggregation == Aggregation::Concat) {
        // HD block sits first in the concatenation; the LD block is a cached
        // constant and receives no gradient
        const std::size_t hd_w = fw.hd_out.shape[1];
        hd_grad = Tensor({fw.hd_out.shape[0], hd_w});
        for (std::size_t b = 0; b < hd_grad.shape[0]; ++b)
            for (std::size_t j = 0; j < hd_w; ++j)
                hd_grad.at(b, j) = fusion.input_grad.at(b, j);
    } else {
        hd_grad = fusion.input_grad;
    }
    BackwardResult hd = backward(model.config.hd_layers, model.hd_params, fw.hd_cache,
                                 hd_grad);
    grads.hd = std::move(hd.param_grads);
    return grads;
}

Tensor augment_batch(SeededRng& rng, const Tensor& images, const AugmentConfig& config) {
    if (images.axes() != 4) throw BadConfig("augment_batch: 4-axis image tensors only");
    if (config.translate_px < 0 ||
        static_cast<std::size_t>(config.translate_px) >= std::min(images.shape[2],
                                                                  images.shape[3]))
        throw BadConfig("augment_batch: translation magnitude must stay below image size");
    if (!(config.scale_min > 0.0) || config.scale_min > config.scale_max ||
        config.scale_max >= 2.0)
        throw BadConfig("augment_batch: scale range must sit inside (0, 2)");

    const bool do_reflect = config.reflect;
    const bool do_translate = config.translate_px > 0;
    const bool do_scale = !(config.scale_min == 1.0 && config.scale_max == 1.0);
    if (!do_reflect && !do_translate && !do_scale) return images;

    const std::size_t batch = images.shape[0], ch = images.shape[1];
    const std::size_t h = images.shape[2], w = images.shape[3];
    Tensor out(images.shape);

    for (std::size_t b = 0; b < batch; ++b) {
        const bool flip = do_reflect && rng.uniform() < 0.5;
        long long dy = 0, dx = 0;
        if (do_translate) {
            dy = rng.uniform_int(-config.translate_px, config.translate_px);
            dx = rng.uniform_int(-config.translate_px, config.translate_px);
        }
        const double scale = do_scale ? rng.uniform(config.scale_min, config.scale_max) : 1.0;
        const double cy = 0.5 * static_cast<double>(h - 1);
        const double cx = 0.5 * static_cast<double>(w - 1);

        // one sample of the composed map per output pixel: reflect, then
        // translate, then scale about the center
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    double sy = static_cast<double>(y);
                    double sx = static_cast<double>(x);
                    if (do_scale) {
                        sy = (sy - cy) / scale + cy;
                        sx = (sx - cx) / scale + cx;
                    }
                    const long long py = std::llround(sy) - dy;
                    long long px = std::llround(sx) - dx;
                    if (py < 0 || px < 0 || py >= static_cast<long long>(h) ||
                        px >= static_cast<long long>(w))
                        continue;  // zero fill
                    if (flip) px = static_cast<long long>(w) - 1 - px;
                    out.at(b, c, y, x) = images.at(b, c, static_cast<std::size_t>(py),
                                                   static_cast<std::size_t>(px));
                }
    }
    return out;
}

namespace {

bool wants_image_input(const DNetConfig& config) {
    if (config.hd_layers.empty()) return false;
    const LayerSpec::Kind k = config.hd_layers.front().kind;
    return k == LayerSpec::Kind::Conv2d || k == LayerSpec::Kind::MaxPool2 ||
           k == LayerSpec::Kind::Flatten;
}

Tensor gather_input(const Dataset& ds, const std::vector<std::size_t>& idx, bool image) {
    if (image) {
        const auto& shp = *ds.image_shape;
        Tensor t({idx.size(), shp[0], shp[1], shp[2]});
        const std::size_t d = ds.dim();
        for (std::size_t b = 0; b < idx.size(); ++b)
            for (std::size_t f = 0; f < d; ++f)
                t.data[b * d + f] = ds.x(f, idx[b]);
        return t;
    }
    Tensor t({idx.size(), ds.dim()});
    for (std::size_t b = 0; b < idx.size(); ++b)
        for (std::size_t f = 0; f < ds.dim(); ++f) t.at(b, f) = ds.x(f, idx[b]);
    return t;
}

RealMatrix gather_rows(const RealMatrix& m, const std::vector<std::size_t>& idx) {
    RealMatrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(idx[i], j);
    return out;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

struct EvalResult {
    double loss = 0.0;
    double metric = 0.0;  // accuracy, or negated loss for regression
};

LossResult batch_loss(const DNetModel& model, const DNetForwardResult& fw,
                      const Dataset& ds, const std::vector<std::size_t>& idx) {
    if (model.config.head.kind == HeadSpec::Kind::Classification) {
        std::vector<int> labels(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = ds.labels[idx[i]];
        return softmax_ce(fw.output, labels);
    }
    if (ds.targets.rows() != model.config.head.out)
        throw ShapeMismatch("dnet: regression targets must be head_out x N");
    Tensor target({idx.size(), model.config.head.out});
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t o = 0; o < model.config.head.out; ++o)
            target.at(i, o) = ds.targets(o, idx[i]);
    return mse(fw.output, target);
}

std::size_t count_correct(const Tensor& logits, const Dataset& ds,
                          const std::vector<std::size_t>& idx) {
    std::size_t hits = 0;
    for (std::size_t b = 0; b < idx.size(); ++b) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < logits.shape[1]; ++j)
            if (logits.at(b, j) > logits.at(b, arg)) arg = j;
        if (static_cast<int>(arg) == ds.labels[idx[b]]) ++hits;
    }
    return hits;
}

EvalResult evaluate(const DNetModel& model, const Dataset& ds, const RealMatrix& ld,
                    std::size_t batch_size, bool image) {
    EvalResult res;
    std::size_t correct = 0;
    const std::vector<std::size_t> all = iota_indices(ds.n());
    for (std::size_t start = 0; start < ds.n(); start += batch_size) {
        const std::size_t stop = std::min(ds.n(), start + batch_size);
        const std::vector<std::size_t> idx(all.begin() + start, all.begin() + stop);
        const Tensor xb = gather_input(ds, idx, image);
        const RealMatrix ldb =
            model.config.ld_source.kind == LdSourceSpec::Kind::None ? RealMatrix()
                                                                    : gather_rows(ld, idx);
        const DNetForwardResult fw = dnet_forward(model, xb, ldb);
        const LossResult lr = batch_loss(model, fw, ds, idx);
        res.loss += lr.loss * static_cast<double>(idx.size());
        if (model.config.head.kind == HeadSpec::Kind::Classification)
            correct += count_correct(fw.output, ds, idx);
    }
    res.loss /= static_cast<double>(ds.n());
    res.metric = model.config.head.kind == HeadSpec::Kind::Classification
                     ? static_cast<double>(correct) / static_cast<double>(ds.n())
                     : -res.loss;
    return res;
}

}  // namespace

std::pair<DNetModel, TrainHistory> dnet_train(const DNetConfig& config,
                                              const TrainConfig& tcfg, const Dataset& train,
                                              const Dataset& val) {
    if (train.n() == 0 || val.n() == 0) throw EmptySplit("dnet_train: empty train/val split");
    if (tcfg.batch_size < 1 || tcfg.patience < 1 || tcfg.max_epochs < 1)
        throw BadConfig("dnet_train: batch_size, patience and max_epochs must be >= 1");
    if (config.head.kind == HeadSpec::Kind::Classification) {
        for (int lbl : train.labels)
            if (lbl < 0 || static_cast<std::size_t>(lbl) >= config.head.out)
                throw BadLabel("dnet_train: training label outside head range");
    }

    const bool image = wants_image_input(config);
    if (image && !train.image_shape)
        throw BadConfig("dnet_train: HD stack expects images but dataset has no image shape");
    if (tcfg.augmentation && !image)
        throw BadConfig("dnet_train: augmentation requires an image HD stack");

    // LD channel: fitted on the training split only, cached for all epochs
    FittedLd fitted = ld_fit(config.ld_source, train);
    auto [train_ld, ld_stats] = compute_ld_features(fitted, train, config.ld_standardize);
    const RealMatrix val_ld =
        compute_ld_features(fitted, val, ld_stats, config.ld_standardize);

    std::vector<std::size_t> input_shape;
    if (image) {
        const auto& shp = *train.image_shape;
        input_shape = {1, shp[0], shp[1], shp[2]};
    } else {
        input_shape = {1, train.dim()};
    }

    SeededRng rng(tcfg.seed);
    DNetModel model = dnet_build(config, input_shape, fitted.width(), rng);
    model.ld = std::move(fitted);
    model.ld_stats = ld_stats;

    AdamState adam_hd, adam_fusion, adam_head;
    adam_hd.lr = adam_fusion.lr = adam_head.lr = tcfg.lr;

    TrainHistory history;
    double best_metric = -std::numeric_limits<double>::infinity();
    ParamList best_hd, best_fusion, best_head;
    std::size_t since_improved = 0;

    std::vector<std::size_t> order = iota_indices(train.n());
    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        if (tcfg.shuffle_each_epoch)
            for (std::size_t i = order.size(); i-- > 1;)
                std::swap(order[i], order[rng.uniform_u64(i + 1)]);

        double epoch_loss = 0.0;
        std::size_t correct = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < train.n(); start += tcfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(train.n(), start + tcfg.batch_size);
            const std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Tensor xb = gather_input(train, idx, image);
            if (tcfg.augmentation) xb = augment_batch(rng, xb, *tcfg.augmentation);
            const RealMatrix ldb =
                config.ld_source.kind == LdSourceSpec::Kind::None ? RealMatrix()
                                                                  : gather_rows(train_ld, idx);
            const DNetForwardResult fw = dnet_forward(model, xb, ldb);
            const LossResult lr = batch_loss(model, fw, train, idx);
            if (!std::isfinite(lr.loss))
                throw NanLoss("dnet_train: non-finite loss at epoch " +
                              std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index));
            DNetGrads grads = dnet_backward(model, fw, lr.grad);
            adam_step(adam_hd, model.hd_params, grads.hd);
            adam_step(adam_fusion, model.fusion_params, grads.fusion);
            adam_step(adam_head, model.head_params, grads.head);

            epoch_loss += lr.loss * static_cast<double>(idx.size());
            if (config.head.kind == HeadSpec::Kind::Classification)
                correct += count_correct(fw.output, train, idx);
        }
        const double train_loss = epoch_loss / static_cast<double>(train.n());
        const double train_metric =
            config.head.kind == HeadSpec::Kind::Classification
                ? static_cast<double>(correct) / static_cast<double>(train.n())
                : -train_loss;

        const EvalResult ev = evaluate(model, val, val_ld, tcfg.batch_size, image);
        history.train_loss.push_back(train_loss);
        history.train_acc.push_back(train_metric);
        history.val_loss.push_back(ev.loss);
        history.val_acc.push_back(ev.metric);

        if (ev.metric > best_metric) {
            best_metric = ev.metric;
            history.best_epoch = epoch;
            best_hd = model.hd_params;
            best_fusion = model.fusion_params;
            best_head = model.head_params;
            since_improved = 0;
        } else if (++since_improved >= tcfg.patience) {
            history.stopped_early = true;
            break;
        }
    }

    model.hd_params = std::move(best_hd);
    model.fusion_params = std::move(best_fusion);
    model.head_params = std::move(best_head);
    return {std::move(model), std::move(history)};
}

namespace {

DNetForwardResult full_forward(const DNetModel& model, const Dataset& data) {
    const bool image = wants_image_input(model.config);
    if (image && !data.image_shape)
        throw ShapeMismatch("dnet: model expects images but dataset has no image shape");
    const std::vector<std::size_t> all = iota_indices(data.n());
    const Tensor xb = gather_input(data, all, image);
    RealMatrix ld;
    if (model.config.ld_source.kind != LdSourceSpec::Kind::None)
        ld = compute_ld_features(model.ld, data, model.ld_stats, model.config.ld_standardize);
    return dnet_forward(model, xb, ld);
}

}  // namespace

std::vector<int> dnet_predict(const DNetModel& model, const Dataset& data) {
    if (model.config.head.kind != HeadSpec::Kind::Classification)
        throw BadConfig("dnet_predict: model head is not a classifier");
    const DNetForwardResult fw = full_forward(model, data);
    const Tensor probs = softmax(fw.output);
    std::vector<int> labels(data.n());
    for (std::size_t b = 0; b < data.n(); ++b) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < probs.shape[1]; ++j)
            if (probs.at(b, j) > probs.at(b, arg)) arg = j;  // ties keep the lowest index
        labels[b] = static_cast<int>(arg);
    }
    return labels;
}

RealMatrix dnet_predict_values(const DNetModel& model, const Dataset& data) {
    if (model.config.head.kind != HeadSpec::Kind::Regression)
        throw BadConfig("dnet_predict_values: model head is not a regressor");
    return matrix_from_tensor(full_forward(model, data).output);
}

RealMatrix extract_layer_features(const DNetModel& model, const Dataset& data, LayerTag tag) {
    const DNetForwardResult fw = full_forward(model, data);
    switch (tag) {
        case LayerTag::HdOut:
            return matrix_from_tensor(fw.hd_out);
        case LayerTag::Fused:
            return matrix_from_tensor(fw.fused);
        case LayerTag::PreHead:
            return matrix_from_tensor(fw.pre_head);
    }
    throw BadTag("extract_layer_features: unknown tag");
}

LayerTag layer_tag_from_string(const std::string& name) {
    if (name == "hd_out") return LayerTag::HdOut;
    if (name == "fused") return LayerTag::Fused;
    if (name == "pre_head") return LayerTag::PreHead;
    throw BadTag("unknown layer tag '" + name + "' (want hd_out, fused or pre_head)");
}

std::string layer_tag_name(LayerTag tag) {
    switch (tag) {
        case LayerTag::HdOut:
            return "hd_out";
        case LayerTag::Fused:
            return "fused";
        case LayerTag::PreHead:
            return "pre_head";
    }
    return "?";
}

double dnet_grad_check(DNetModel model, const Tensor& batch_x, const RealMatrix& batch_ld,
                       const std::vector<int>& labels) {
    auto loss_of = [&]() {
        const DNetForwardResult fw = dnet_forward(model, batch_x, batch_ld);
        return softmax_ce(fw.output, labels);
    };
    const DNetForwardResult fw = dnet_forward(model, batch_x, batch_ld);
    const LossResult base = softmax_ce(fw.output, labels);
    const DNetGrads grads = dnet_backward(model, fw, base.grad);

    const double h = 1e-6;
    double worst = 0.0;
    auto probe = [&](ParamList& params, const ParamList& analytic) {
        for (std::size_t li = 0; li < params.size(); ++li) {
            for (Tensor* field : {&params[li].w, &params[li].b}) {
                const Tensor& an_field =
                    (field == &params[li].w) ? analytic[li].w : analytic[li].b;
                for (std::size_t i = 0; i < field->numel(); ++i) {
                    const double keep = field->data[i];
                    field->data[i] = keep + h;
                    const double up = loss_of().loss;
                    field->data[i] = keep - h;
                    const double dn = loss_of().loss;
                    field->data[i] = keep;
                    const double fd = (up - dn) / (2.0 * h);
                    const double an = an_field.data[i];
                    const double denom = std::max({std::fabs(an), std::fabs(fd), 1e-12});
                    worst = std::max(worst, std::fabs(an - fd) / denom);
                }
            }
        }
    };
    probe(model.hd_params, grads.hd);
    probe(model.fusion_params, grads.fusion);
    probe(model.head_params, grads.head);
    return worst;
}

}  // namespace dwl
