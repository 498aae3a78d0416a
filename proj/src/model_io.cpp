#include <annulus/model_io.hpp>

#include <annulus/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace annulus {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "annulus-model/1";

// JSON has no inf/nan; those travel as strings.
json num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double get_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_double(j.get<std::string>());
    throw Error(ErrorKind::Schema, "expected a number");
}

json vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
    return out;
}

Eigen::VectorXd get_vec(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::Schema, "expected an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = get_num(j[i]);
    return v;
}

json mat(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
    return out;
}

Eigen::MatrixXd get_mat(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::Schema, "expected a matrix");
    if (j.empty()) return {};
    Eigen::MatrixXd m(j.size(), j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::VectorXd row = get_vec(j[r]);
        if (row.size() != m.cols()) throw Error(ErrorKind::Schema, "ragged matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

json tree_json(const DecisionTree& tree) {
    json f = json::array(), t = json::array(), l = json::array(), r = json::array(), c0 = json::array(),
         c1 = json::array(), d = json::array(), g = json::array();
    for (const auto& n : tree.nodes) {
        f.push_back(n.feature);
        t.push_back(num(n.threshold));
        l.push_back(n.left);
        r.push_back(n.right);
        c0.push_back(n.count0);
        c1.push_back(n.count1);
        d.push_back(n.depth);
        g.push_back(num(n.impurity));
    }
    return {{"feature", f}, {"threshold", t}, {"left", l},  {"right", r},
            {"count0", c0}, {"count1", c1},   {"depth", d}, {"impurity", g}};
}

DecisionTree parse_tree(const json& j, int n_features) {
    const auto& f = j.at("feature");
    DecisionTree tree;
    tree.nodes.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto& n = tree.nodes[i];
        n.feature = f[i].get<int>();
        n.threshold = get_num(j.at("threshold").at(i));
        n.left = j.at("left").at(i).get<int>();
        n.right = j.at("right").at(i).get<int>();
        n.count0 = j.at("count0").at(i).get<int>();
        n.count1 = j.at("count1").at(i).get<int>();
        n.depth = j.at("depth").at(i).get<int>();
        n.impurity = get_num(j.at("impurity").at(i));
    }
    // Structural sanity so prediction can't walk off the node array.
    const int size = static_cast<int>(tree.nodes.size());
    if (size == 0) throw Error(ErrorKind::Schema, "empty tree");
    for (int i = 0; i < size; ++i) {
        const auto& n = tree.nodes[i];
        if (n.feature < 0) continue;
        if (n.feature >= n_features || n.left <= i || n.right <= i || n.left >= size || n.right >= size)
            throw Error(ErrorKind::Schema, "malformed tree node " + std::to_string(i));
    }
    return tree;
}

} // namespace

std::string serialize_model(const SavedModel& model) {
    const auto& p = model.pipeline;
    json selection = json::array();
    for (const auto& r : p.selection.ranked)
        selection.push_back(
            {{"name", r.name}, {"column", r.column}, {"F", num(r.relevance)}, {"mrmr_score", num(r.mrmr_score)}});

    json j = {{"schema", kSchema},
              {"kind", model.kind},
              {"provenance",
               {{"tool", kToolName},
                {"version", kToolVersion},
                {"seed", model.provenance.seed},
                {"config", model.provenance.config_hash}}},
              {"selection", selection},
              {"standardizer", {{"mean", vec(p.standardizer.mean)}, {"scale", vec(p.standardizer.scale)}}}};

    if (model.kind == "lda") {
        if (!p.lda) throw Error(ErrorKind::Input, "pipeline has no LDA model");
        const auto& m = *p.lda;
        j["lda"] = {{"class_means", mat(m.class_means)},
                    {"pooled_covariance", mat(m.pooled_covariance)},
                    {"priors", vec(m.priors)},
                    {"coefficients", vec(m.coefficients)},
                    {"intercept", num(m.intercept)}};
    } else if (model.kind == "rf") {
        if (!p.forest) throw Error(ErrorKind::Input, "pipeline has no forest");
        const auto& m = *p.forest;
        json trees = json::array();
        for (const auto& t : m.trees) trees.push_back(tree_json(t));
        j["rf"] = {{"n_estimators", m.params.n_estimators},
                   {"max_features", to_string(m.params.max_features)},
                   {"max_depth", m.params.max_depth},
                   {"max_leaf_nodes", m.params.max_leaf_nodes},
                   {"seed", m.seed},
                   {"feature_names", m.feature_names},
                   {"trees", trees}};
    } else {
        throw Error(ErrorKind::Input, "unknown model kind '" + model.kind + "'");
    }
    return j.dump(1) + "\n";
}

SavedModel parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("model is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("schema", "") != kSchema) throw Error(ErrorKind::Schema, "unsupported model schema");
        SavedModel out;
        out.kind = j.at("kind").get<std::string>();
        const auto& prov = j.at("provenance");
        out.provenance.seed = prov.at("seed").get<std::uint64_t>();
        out.provenance.config_hash = prov.at("config").get<std::string>();

        auto& p = out.pipeline;
        for (const auto& r : j.at("selection"))
            p.selection.ranked.push_back({r.at("name").get<std::string>(), r.at("column").get<int>(),
                                          get_num(r.at("F")), get_num(r.at("mrmr_score"))});
        const int k = static_cast<int>(p.selection.k());
        p.standardizer.mean = get_vec(j.at("standardizer").at("mean"));
        p.standardizer.scale = get_vec(j.at("standardizer").at("scale"));
        if (p.standardizer.mean.size() != k || p.standardizer.scale.size() != k)
            throw Error(ErrorKind::Schema, "standardizer size does not match the selection");

        if (out.kind == "lda") {
            const auto& m = j.at("lda");
            LdaModel lda;
            lda.class_means = get_mat(m.at("class_means"));
            lda.pooled_covariance = get_mat(m.at("pooled_covariance"));
            const Eigen::VectorXd priors = get_vec(m.at("priors"));
            if (priors.size() != 2) throw Error(ErrorKind::Schema, "LDA needs two priors");
            lda.priors = priors;
            lda.coefficients = get_vec(m.at("coefficients"));
            lda.intercept = get_num(m.at("intercept"));
            if (lda.coefficients.size() != k) throw Error(ErrorKind::Schema, "LDA size does not match the selection");
            p.lda = std::move(lda);
        } else if (out.kind == "rf") {
            const auto& m = j.at("rf");
            ForestModel f;
            f.params.n_estimators = m.at("n_estimators").get<int>();
            f.params.max_features = parse_max_features(m.at("max_features").get<std::string>());
            f.params.max_depth = m.at("max_depth").get<int>();
            f.params.max_leaf_nodes = m.at("max_leaf_nodes").get<int>();
            f.seed = m.at("seed").get<std::uint64_t>();
            f.feature_names = m.at("feature_names").get<std::vector<std::string>>();
            if (static_cast<int>(f.feature_names.size()) != k)
                throw Error(ErrorKind::Schema, "forest inputs do not match the selection");
            for (const auto& t : m.at("trees")) f.trees.push_back(parse_tree(t, k));
            p.forest = std::move(f);
        } else {
            throw Error(ErrorKind::Schema, "unknown model kind '" + out.kind + "'");
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("malformed model: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const SavedModel& model) {
    write_file_atomic(path, serialize_model(model));
}

SavedModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

void bind_columns(FittedPipeline& pipeline, const std::vector<std::string>& names) {
    for (auto& r : pipeline.selection.ranked) {
        const auto it = std::find(names.begin(), names.end(), r.name);
        if (it == names.end()) throw Error(ErrorKind::Schema, "feature table lacks model input '" + r.name + "'");
        r.column = static_cast<int>(it - names.begin());
    }
}

} // namespace annulus
