#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwl/bdr.hpp"
#include "dwl/datasets.hpp"
#include "dwl/nn.hpp"

namespace dwl {

enum class Aggregation { Concat, Sum };
enum class LayerTag { HdOut, Fused, PreHead };

struct LdSourceSpec {
    enum class Kind { Bdr, Pca, None };
    Kind kind = Kind::None;
    BdrConfig bdr;          // when kind == Bdr
    std::size_t pca_r = 2;  // when kind == Pca

    static LdSourceSpec none() { return LdSourceSpec{}; }
    static LdSourceSpec from_bdr(BdrConfig cfg) {
        LdSourceSpec s;
        s.kind = Kind::Bdr;
        s.bdr = cfg;
        return s;
    }
    static LdSourceSpec from_pca(std::size_t r) {
        LdSourceSpec s;
        s.kind = Kind::Pca;
        s.pca_r = r;
        return s;
    }
};

struct HeadSpec {
    enum class Kind { Classification, Regression };
    Kind kind = Kind::Classification;
    std::size_t out = 2;  // class count or regression output width
};

struct DNetConfig {
    std::vector<LayerSpec> hd_layers;
    LdSourceSpec ld_source;
    Aggregation aggregation = Aggregation::Concat;
    std::size_t fusion_width = 16;
    bool fusion_relu = true;
    HeadSpec head;
    bool ld_standardize = true;
};

// Image augmentation ranges. An operation is disabled (and draws nothing
// from the stream) when reflect is false, translate_px is 0, or the scale
// interval collapses to [1, 1].
struct AugmentConfig {
    bool reflect = true;
    int translate_px = 3;
    double scale_min = 0.9;
    double scale_max = 1.1;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t max_epochs = 1000;
    std::size_t patience = 10;
    double lr = 0.002;
    std::uint64_t seed = 0;
    bool shuffle_each_epoch = true;
    std::optional<AugmentConfig> augmentation;
};

// Per-epoch record. Regression runs store the negated loss in the accuracy
// fields so the shared stopping rule ("higher is better") applies.
struct TrainHistory {
    std::vector<double> train_loss, train_acc, val_loss, val_acc;
    std::size_t best_epoch = 0;  // 1-based; earliest among ties
    bool stopped_early = false;

    std::size_t epochs() const { return train_loss.size(); }
};

// The frozen LD channel: a fitted projector of either flavor.
struct FittedLd {
    LdSourceSpec spec;
    std::optional<BdrModel> bdr;
    RealMatrix pca_basis;            // D x r when PCA
    std::vector<double> pca_center;  // length D when PCA

    bool active() const { return spec.kind != LdSourceSpec::Kind::None; }
    std::size_t width() const;
};

FittedLd ld_fit(const LdSourceSpec& spec, const Dataset& train);

// Projections of a dataset through the fitted source (N x R_eff), no
// standardization.
RealMatrix ld_project(const FittedLd& src, const Dataset& dataset);

// Training-split call: computes features and fits the z-score stats.
std::pair<RealMatrix, StandardizeStats> compute_ld_features(const FittedLd& src,
                                                            const Dataset& train,
                                                            bool standardize);
// Held-out call: applies the training-split stats.
RealMatrix compute_ld_features(const FittedLd& src, const Dataset& dataset,
                               const StandardizeStats& train_stats, bool standardize);

// Concat places the HD block first; Sum requires equal widths.
Tensor aggregate(const Tensor& f_h, const Tensor& f_l, Aggregation mode);

struct DNetModel {
    DNetConfig config;
    std::vector<LayerSpec> fusion_specs;  // dense (+ relu)
    std::vector<LayerSpec> head_specs;    // dense
    ParamList hd_params, fusion_params, head_params;
    FittedLd ld;
    StandardizeStats ld_stats;  // empty vectors when unused

    std::size_t output_width() const { return config.head.out; }
};

// Resolves fusion/head layer shapes from the HD stack output width and the
// LD width, and Kaiming-initializes every parameter from one seeded stream
// (HD layers first, then fusion, then head).
DNetModel dnet_build(const DNetConfig& config, const std::vector<std::size_t>& input_shape,
                     std::size_t ld_width, SeededRng& rng);

struct DNetForwardResult {
    Tensor hd_out, fused, pre_head, output;
    ForwardCache hd_cache, fusion_cache, head_cache;
};

// batch_ld must be index-aligned with the rows of batch_x; pass an empty
// matrix when the model has no LD channel.
DNetForwardResult dnet_forward(const DNetModel& model, const Tensor& batch_x,
                               const RealMatrix& batch_ld);

struct DNetGrads {
    ParamList hd, fusion, head;
};

DNetGrads dnet_backward(const DNetModel& model, const DNetForwardResult& fw,
                        const Tensor& output_grad);

// Per image independently: horizontal reflection with probability 0.5,
// integer translation uniform in [-t, t] with zero fill, then scaling about
// the center by a uniform factor with nearest-neighbor resampling.
Tensor augment_batch(SeededRng& rng, const Tensor& images, const AugmentConfig& config);

std::pair<DNetModel, TrainHistory> dnet_train(const DNetConfig& config,
                                              const TrainConfig& tcfg, const Dataset& train,
                                              const Dataset& val);

// Classification: argmax over class probabilities, ties to the lowest index.
std::vector<int> dnet_predict(const DNetModel& model, const Dataset& data);
// Regression: one row per sample.
RealMatrix dnet_predict_values(const DNetModel& model, const Dataset& data);

// Activations at the tagged point, one row per sample.
RealMatrix extract_layer_features(const DNetModel& model, const Dataset& data, LayerTag tag);
LayerTag layer_tag_from_string(const std::string& name);
std::string layer_tag_name(LayerTag tag);

// Finite-difference check of the composed dual-channel gradient; returns the
// max relative disagreement over every trainable parameter.
double dnet_grad_check(DNetModel model, const Tensor& batch_x, const RealMatrix& batch_ld,
                       const std::vector<int>& labels);

}  // namespace dwl
