#include "dwl/bundle.hpp"

#include <filesystem>
#include <fstream>

#include "dwl/errors.hpp"
#include "dwl/matrix_io.hpp"
#include "dwl/run_config.hpp"

namespace dwl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RealMatrix vec_to_matrix(const std::vector<double>& v) {
    RealMatrix m(1, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
    return m;
}

std::vector<double> matrix_to_vec(const RealMatrix& m) {
    return m.values();
}

RealMatrix tensor_to_matrix2(const Tensor& t) {
    // parameters flatten to (first axis, rest)
    if (t.numel() == 0) return RealMatrix();
    const std::size_t rows = t.shape[0];
    const std::size_t cols = t.numel() / t.shape[0];
    RealMatrix m(rows, cols);
    m.values() = t.data;
    return m;
}

Tensor matrix_to_tensor(const RealMatrix& m, const std::vector<std::size_t>& shape) {
    Tensor t(shape);
    if (t.numel() != m.size()) throw DimMismatch("bundle: parameter size mismatch on load");
    t.data = m.values();
    return t;
}

void save_params(const std::string& dir, const std::string& prefix,
                 std::span<const LayerSpec> specs, const ParamList& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!specs[i].has_params()) continue;
        write_dwlm(tensor_to_matrix2(params[i].w),
                   dir + "/" + prefix + "_" + std::to_string(i) + ".w.dwlm");
        write_dwlm(tensor_to_matrix2(params[i].b),
                   dir + "/" + prefix + "_" + std::to_string(i) + ".b.dwlm");
    }
}

ParamList load_params(const std::string& dir, const std::string& prefix,
                      std::span<const LayerSpec> specs) {
    ParamList params(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].has_params()) continue;
        const std::string stem = dir + "/" + prefix + "_" + std::to_string(i);
        const RealMatrix w = read_dwlm(stem + ".w.dwlm");
        const RealMatrix b = read_dwlm(stem + ".b.dwlm");
        if (specs[i].kind == LayerSpec::Kind::Dense) {
            params[i].w = matrix_to_tensor(w, {specs[i].out, specs[i].in});
            params[i].b = matrix_to_tensor(b, {specs[i].out});
        } else {
            params[i].w = matrix_to_tensor(
                w, {specs[i].out_ch, specs[i].in_ch, specs[i].kernel, specs[i].kernel});
            params[i].b = matrix_to_tensor(b, {specs[i].out_ch});
        }
    }
    return params;
}

void write_manifest(const json& manifest, const std::string& dir) {
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw IoError("bundle: cannot write " + dir + "/manifest.json");
    out << manifest.dump(2) << '\n';
}

json read_manifest(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw IoError("bundle: cannot open " + dir + "/manifest.json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("bundle: invalid manifest in " + dir + ": " + e.what());
    }
    return j;
}

}  // namespace

json bdr_config_to_json(const BdrConfig& cfg) {
    return {{"r", cfg.r},
            {"prior", cfg.prior_mode == PriorMode::Ard ? "ard" : "elementwise"},
            {"sigma_z_sq", cfg.sigma_z_sq},
            {"alpha_phi", cfg.alpha_phi},
            {"beta_phi", cfg.beta_phi},
            {"max_iter", cfg.max_iter},
            {"tol", cfg.tol},
            {"seed", cfg.seed},
            {"center", cfg.center_data},
            {"prune_threshold", cfg.prune_threshold}};
}

BdrConfig bdr_config_from_json(const json& j) {
    BdrConfig cfg;
    cfg.r = j.at("r").get<std::size_t>();
    cfg.prior_mode = j.at("prior").get<std::string>() == "ard" ? PriorMode::Ard
                                                               : PriorMode::ElementWise;
    cfg.sigma_z_sq = j.at("sigma_z_sq").get<double>();
    cfg.alpha_phi = j.at("alpha_phi").get<double>();
    cfg.beta_phi = j.at("beta_phi").get<double>();
    cfg.max_iter = j.at("max_iter").get<std::size_t>();
    cfg.tol = j.at("tol").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.center_data = j.at("center").get<bool>();
    cfg.prune_threshold = j.at("prune_threshold").get<double>();
    return cfg;
}

void save_bdr_bundle(const BdrModel& model, const std::string& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "bdr";
    manifest["config"] = bdr_config_to_json(model.config);
    manifest["retained"] = model.retained;
    manifest["fit"] = {{"iterations_run", model.fit_report.iterations_run},
                       {"converged", model.fit_report.converged},
                       {"final_delta", model.fit_report.final_delta}};
    write_manifest(manifest, dir);
    write_dwlm(model.q_orth, dir + "/q_orth.dwlm");
    write_dwlm(model.r_upper, dir + "/r_upper.dwlm");
    write_dwlm(vec_to_matrix(model.center), dir + "/center.dwlm");
    write_dwlm(model.fit_report.phi_final, dir + "/phi_final.dwlm");
}

BdrModel load_bdr_bundle(const std::string& dir) {
    const json manifest = read_manifest(dir);
    if (manifest.at("kind") != "bdr") throw IoError("bundle: not a bdr bundle: " + dir);
    BdrModel model;
    model.config = bdr_config_from_json(manifest.at("config"));
    model.retained = manifest.at("retained").get<std::vector<std::size_t>>();
    model.q_orth = read_dwlm(dir + "/q_orth.dwlm");
    model.r_upper = read_dwlm(dir + "/r_upper.dwlm");
    model.center = matrix_to_vec(read_dwlm(dir + "/center.dwlm"));
    model.fit_report.phi_final = read_dwlm(dir + "/phi_final.dwlm");
    model.fit_report.iterations_run = manifest.at("fit").at("iterations_run").get<std::size_t>();
    model.fit_report.converged = manifest.at("fit").at("converged").get<bool>();
    model.fit_report.final_delta = manifest.at("fit").at("final_delta").get<double>();
    return model;
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    const DNetModel& m = bundle.model;

    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "dnet";
    manifest["hd_layers"] = layer_specs_to_json(m.config.hd_layers);
    manifest["fusion"] = {{"width", m.config.fusion_width}, {"relu", m.config.fusion_relu}};
    manifest["head"] = {{"kind", m.config.head.kind == HeadSpec::Kind::Classification
                                     ? "classification"
                                     : "regression"},
                        {"out", m.config.head.out}};
    manifest["aggregation"] =
        m.config.aggregation == Aggregation::Concat ? "concat" : "sum";
    manifest["ld_standardize"] = m.config.ld_standardize;
    manifest["x_standardize"] = bundle.x_stats.has_value();
    manifest["metrics"] = bundle.metrics_summary;

    json ld;
    switch (m.config.ld_source.kind) {
        case LdSourceSpec::Kind::Bdr:
            ld["kind"] = "bdr";
            ld["bdr_config"] = bdr_config_to_json(m.config.ld_source.bdr);
            ld["retained"] = m.ld.bdr->retained;
            ld["fit"] = {{"iterations_run", m.ld.bdr->fit_report.iterations_run},
                         {"converged", m.ld.bdr->fit_report.converged},
                         {"final_delta", m.ld.bdr->fit_report.final_delta}};
            write_dwlm(m.ld.bdr->q_orth, dir + "/ld_q_orth.dwlm");
            write_dwlm(m.ld.bdr->r_upper, dir + "/ld_r_upper.dwlm");
            write_dwlm(vec_to_matrix(m.ld.bdr->center), dir + "/ld_center.dwlm");
            write_dwlm(m.ld.bdr->fit_report.phi_final, dir + "/ld_phi_final.dwlm");
            break;
        case LdSourceSpec::Kind::Pca:
            ld["kind"] = "pca";
            ld["r"] = m.config.ld_source.pca_r;
            write_dwlm(m.ld.pca_basis, dir + "/ld_basis.dwlm");
            write_dwlm(vec_to_matrix(m.ld.pca_center), dir + "/ld_center.dwlm");
            break;
        case LdSourceSpec::Kind::None:
            ld["kind"] = "none";
            break;
    }
    manifest["ld"] = ld;
    write_manifest(manifest, dir);

    save_params(dir, "hd", m.config.hd_layers, m.hd_params);
    save_params(dir, "fusion", m.fusion_specs, m.fusion_params);
    save_params(dir, "head", m.head_specs, m.head_params);

    if (!m.ld_stats.mean.empty()) {
        write_dwlm(vec_to_matrix(m.ld_stats.mean), dir + "/ld_mean.dwlm");
        write_dwlm(vec_to_matrix(m.ld_stats.std), dir + "/ld_std.dwlm");
    }
    if (bundle.x_stats) {
        write_dwlm(vec_to_matrix(bundle.x_stats->mean), dir + "/x_mean.dwlm");
        write_dwlm(vec_to_matrix(bundle.x_stats->std), dir + "/x_std.dwlm");
    }
}

ModelBundle load_bundle(const std::string& dir) {
    const json manifest = read_manifest(dir);
    if (manifest.at("kind") != "dnet") throw IoError("bundle: not a dnet bundle: " + dir);

    ModelBundle bundle;
    DNetModel& m = bundle.model;
    m.config.hd_layers = layer_specs_from_json(manifest.at("hd_layers"));
    m.config.fusion_width = manifest.at("fusion").at("width").get<std::size_t>();
    m.config.fusion_relu = manifest.at("fusion").at("relu").get<bool>();
    m.config.head.kind = manifest.at("head").at("kind") == "classification"
                             ? HeadSpec::Kind::Classification
                             : HeadSpec::Kind::Regression;
    m.config.head.out = manifest.at("head").at("out").get<std::size_t>();
    m.config.aggregation =
        manifest.at("aggregation") == "concat" ? Aggregation::Concat : Aggregation::Sum;
    m.config.ld_standardize = manifest.at("ld_standardize").get<bool>();
    bundle.metrics_summary = manifest.value("metrics", json::object());

    const json& ld = manifest.at("ld");
    const std::string ld_kind = ld.at("kind").get<std::string>();
    if (ld_kind == "bdr") {
        m.config.ld_source = LdSourceSpec::from_bdr(bdr_config_from_json(ld.at("bdr_config")));
        BdrModel bm;
        bm.config = m.config.ld_source.bdr;
        bm.retained = ld.at("retained").get<std::vector<std::size_t>>();
        bm.q_orth = read_dwlm(dir + "/ld_q_orth.dwlm");
        bm.r_upper = read_dwlm(dir + "/ld_r_upper.dwlm");
        bm.center = matrix_to_vec(read_dwlm(dir + "/ld_center.dwlm"));
        bm.fit_report.phi_final = read_dwlm(dir + "/ld_phi_final.dwlm");
        bm.fit_report.iterations_run = ld.at("fit").at("iterations_run").get<std::size_t>();
        bm.fit_report.converged = ld.at("fit").at("converged").get<bool>();
        bm.fit_report.final_delta = ld.at("fit").at("final_delta").get<double>();
        m.ld.spec = m.config.ld_source;
        m.ld.bdr = std::move(bm);
    } else if (ld_kind == "pca") {
        m.config.ld_source = LdSourceSpec::from_pca(ld.at("r").get<std::size_t>());
        m.ld.spec = m.config.ld_source;
        m.ld.pca_basis = read_dwlm(dir + "/ld_basis.dwlm");
        m.ld.pca_center = matrix_to_vec(read_dwlm(dir + "/ld_center.dwlm"));
    } else {
        m.config.ld_source = LdSourceSpec::none();
        m.ld.spec = m.config.ld_source;
    }

    m.fusion_specs.clear();
    // fused width recovers from the stored fusion weight matrix
    const RealMatrix fusion_w = read_dwlm(dir + "/fusion_0.w.dwlm");
    m.fusion_specs.push_back(LayerSpec::dense(fusion_w.cols(), m.config.fusion_width));
    if (m.config.fusion_relu) m.fusion_specs.push_back(LayerSpec::relu());
    m.head_specs = {LayerSpec::dense(m.config.fusion_width, m.config.head.out)};

    m.hd_params = load_params(dir, "hd", m.config.hd_layers);
    m.fusion_params = load_params(dir, "fusion", m.fusion_specs);
    m.head_params = load_params(dir, "head", m.head_specs);

    if (fs::exists(dir + "/ld_mean.dwlm")) {
        m.ld_stats.mean = matrix_to_vec(read_dwlm(dir + "/ld_mean.dwlm"));
        m.ld_stats.std = matrix_to_vec(read_dwlm(dir + "/ld_std.dwlm"));
    }
    if (manifest.at("x_standardize").get<bool>()) {
        StandardizeStats st;
        st.mean = matrix_to_vec(read_dwlm(dir + "/x_mean.dwlm"));
        st.std = matrix_to_vec(read_dwlm(dir + "/x_std.dwlm"));
        bundle.x_stats = st;
    }
    return bundle;
}

}  // namespace dwl
