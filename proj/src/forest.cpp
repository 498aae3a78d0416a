#include <annulus/models.hpp>

#include <annulus/error.hpp>
#include <annulus/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace annulus {

namespace {

double gini(int c0, int c1) {
    const double n = c0 + c1;
    if (n == 0) return 0.0;
    const double p0 = c0 / n, p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0;
    double gain = 0; // n * impurity - n_l * impurity_l - n_r * impurity_r
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const std::vector<int>& canonical,
                const ForestParams& params, std::mt19937_64& rng)
        : x_(x), y_(y), canonical_(canonical), params_(params), rng_(rng),
          mtry_(features_per_split(params.max_features, static_cast<int>(x.cols()))) {}

    DecisionTree build(std::vector<int> samples) {
        samples_ = std::move(samples);
        DecisionTree tree;
        nodes_.clear();
        ranges_.clear();
        splits_.clear();

        struct Entry {
            double gain;
            int node;
        };
        auto cmp = [](const Entry& a, const Entry& b) {
            if (a.gain != b.gain) return a.gain < b.gain;
            return a.node > b.node;
        };
        std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> frontier(cmp);

        auto push = [&](int node) {
            if (splits_[node].feature >= 0) frontier.push({splits_[node].gain, node});
        };
        push(make_node(0, static_cast<int>(samples_.size()), 0));

        int leaves = 1;
        while (!frontier.empty()) {
            if (params_.max_leaf_nodes > 0 && leaves >= params_.max_leaf_nodes) break;
            const int node = frontier.top().node;
            frontier.pop();

            const auto split = splits_[node];
            auto [begin, end] = ranges_[node];
            auto mid = std::stable_partition(samples_.begin() + begin, samples_.begin() + end,
                                             [&](int s) { return x_(s, split.feature) <= split.threshold; });
            const int mid_pos = static_cast<int>(mid - samples_.begin());
            const int depth = nodes_[node].depth + 1;

            nodes_[node].feature = split.feature;
            nodes_[node].threshold = split.threshold;
            const int left = make_node(begin, mid_pos, depth);
            const int right = make_node(mid_pos, end, depth);
            nodes_[node].left = left;
            nodes_[node].right = right;
            ++leaves;
            push(left);
            push(right);
        }
        tree.nodes = std::move(nodes_);
        return tree;
    }

private:
    int make_node(int begin, int end, int depth) {
        TreeNode node;
        node.depth = depth;
        for (int i = begin; i < end; ++i) (y_(samples_[i]) == 1 ? node.count1 : node.count0)++;
        node.impurity = gini(node.count0, node.count1);
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        ranges_.push_back({begin, end});

        SplitCandidate split;
        const bool can_split = node.count0 > 0 && node.count1 > 0 && end - begin >= 2 &&
                               (params_.max_depth < 0 || depth < params_.max_depth);
        if (can_split) split = best_split(begin, end, node);
        splits_.push_back(split);
        return id;
    }

    SplitCandidate best_split(int begin, int end, const TreeNode& node) {
        const int k = static_cast<int>(canonical_.size());
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        // Partial Fisher-Yates over canonical (name-sorted) feature positions.
        for (int i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<int> pick(i, k - 1);
            std::swap(order[i], order[pick(rng_)]);
        }

        const int n = end - begin;
        const double parent = n * node.impurity;
        std::vector<std::pair<double, int>> values(n);
        SplitCandidate best;
        for (int f = 0; f < mtry_; ++f) {
            const int column = canonical_[order[f]];
            for (int i = 0; i < n; ++i) {
                const int s = samples_[begin + i];
                values[i] = {x_(s, column), y_(s)};
            }
            std::sort(values.begin(), values.end());
            int left0 = 0, left1 = 0;
            for (int i = 0; i + 1 < n; ++i) {
                (values[i].second == 1 ? left1 : left0)++;
                if (!(values[i].first < values[i + 1].first)) continue;
                const int nl = i + 1, nr = n - nl;
                const int right0 = node.count0 - left0, right1 = node.count1 - left1;
                const double gain = parent - nl * gini(left0, left1) - nr * gini(right0, right1);
                if (best.feature < 0 || gain > best.gain) {
                    double threshold = 0.5 * (values[i].first + values[i + 1].first);
                    if (!(threshold < values[i + 1].first)) threshold = values[i].first;
                    best = {column, threshold, gain};
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXi& y_;
    const std::vector<int>& canonical_;
    const ForestParams& params_;
    std::mt19937_64& rng_;
    const int mtry_;

    std::vector<int> samples_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<int, int>> ranges_;
    std::vector<SplitCandidate> splits_;
};

std::mt19937_64 tree_stream(std::uint64_t seed, std::size_t tree) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tree), static_cast<std::uint32_t>(tree >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

const char* to_string(MaxFeatures rule) {
    switch (rule) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
    }
    return "sqrt";
}

MaxFeatures parse_max_features(const std::string& text) {
    if (text == "sqrt") return MaxFeatures::Sqrt;
    if (text == "log2") return MaxFeatures::Log2;
    if (text == "all") return MaxFeatures::All;
    throw Error(ErrorKind::Input, "unknown max_features rule '" + text + "'");
}

int features_per_split(MaxFeatures rule, int k) {
    int m = k;
    switch (rule) {
    case MaxFeatures::Sqrt: m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(k)))); break;
    case MaxFeatures::Log2: m = static_cast<int>(std::floor(std::log2(static_cast<double>(k)))); break;
    case MaxFeatures::All: m = k; break;
    }
    return std::clamp(m, 1, std::max(k, 1));
}

std::string ForestParams::describe() const {
    auto lim = [](int v) { return v < 0 ? std::string("none") : std::to_string(v); };
    return "n_estimators=" + std::to_string(n_estimators) + " max_features=" + to_string(max_features) +
           " max_depth=" + lim(max_depth) + " max_leaf_nodes=" + lim(max_leaf_nodes);
}

double DecisionTree::predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = row(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    const auto& leaf = nodes[i];
    return static_cast<double>(leaf.count1) / static_cast<double>(leaf.count0 + leaf.count1);
}

int DecisionTree::depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

int DecisionTree::leaf_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

ForestModel rf_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const std::vector<std::string>& names,
                   const ForestParams& params, std::uint64_t seed, unsigned threads) {
    if (y.size() != x.rows()) throw Error(ErrorKind::Input, "rf_fit: label count mismatch");
    if (static_cast<Eigen::Index>(names.size()) != x.cols())
        throw Error(ErrorKind::Input, "rf_fit: names do not match columns");
    if (x.cols() < 1 || x.rows() < 2) throw Error(ErrorKind::Input, "rf_fit: empty training data");
    if (params.n_estimators < 1) throw Error(ErrorKind::Input, "rf_fit: n_estimators must be positive");
    if (params.max_depth == 0 || params.max_depth < -1)
        throw Error(ErrorKind::Input, "rf_fit: max_depth must be positive or -1");
    if (params.max_leaf_nodes == 0 || params.max_leaf_nodes == 1 || params.max_leaf_nodes < -1)
        throw Error(ErrorKind::Input, "rf_fit: max_leaf_nodes must be >= 2 or -1");
    const auto positives = (y.array() == 1).count();
    if (positives == 0 || positives == y.size()) throw Error(ErrorKind::Data, "rf_fit: single-class labels");
    if (!x.allFinite()) throw Error(ErrorKind::Input, "rf_fit: non-finite features");

    std::vector<int> canonical(names.size());
    std::iota(canonical.begin(), canonical.end(), 0);
    std::stable_sort(canonical.begin(), canonical.end(), [&](int a, int b) { return names[a] < names[b]; });

    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.feature_names = names;
    model.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const int n = static_cast<int>(x.rows());
    parallel_for(model.trees.size(), threads, [&](std::size_t t) {
        auto rng = tree_stream(seed, t);
        std::uniform_int_distribution<int> draw(0, n - 1);
        std::vector<int> bootstrap(n);
        for (auto& s : bootstrap) s = draw(rng);
        TreeBuilder builder(x, y, canonical, params, rng);
        model.trees[t] = builder.build(std::move(bootstrap));
    });
    return model;
}

Prediction rf_predict(const ForestModel& model, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != model.feature_names.size())
        throw Error(ErrorKind::Input, "rf_predict: dimension mismatch");
    Prediction p;
    p.labels.resize(x.rows());
    p.scores.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double sum = 0;
        for (const auto& tree : model.trees) sum += tree.predict_proba(x.row(i));
        p.scores(i) = sum / static_cast<double>(model.trees.size());
        p.labels(i) = p.scores(i) > 0.5 ? 1 : 0;
    }
    return p;
}

Eigen::VectorXd rf_feature_importance(const ForestModel& model) {
    const auto k = static_cast<Eigen::Index>(model.feature_names.size());
    Eigen::VectorXd total = Eigen::VectorXd::Zero(k);
    for (const auto& tree : model.trees) {
        Eigen::VectorXd imp = Eigen::VectorXd::Zero(k);
        const double root = tree.nodes[0].count0 + tree.nodes[0].count1;
        for (const auto& node : tree.nodes) {
            if (node.feature < 0) continue;
            const auto& l = tree.nodes[node.left];
            const auto& r = tree.nodes[node.right];
            const double decrease = (node.count0 + node.count1) * node.impurity -
                                    (l.count0 + l.count1) * l.impurity - (r.count0 + r.count1) * r.impurity;
            imp(node.feature) += std::max(0.0, decrease) / root;
        }
        const double s = imp.sum();
        if (s > 0) total += imp / s;
    }
    const double s = total.sum();
    if (!(s > 0)) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    return total / s;
}

} // namespace annulus
