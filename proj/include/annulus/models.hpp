#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace annulus {

/// Per-feature z-scoring with training statistics (population std).
/// Constant features get scale 0 and transform to 0.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& x);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

struct Prediction {
    Eigen::VectorXi labels;
    Eigen::VectorXd scores; // probability of class 1 (MR)
};

// ---------------------------------------------------------------------------
// Linear discriminant analysis
// ---------------------------------------------------------------------------

struct LdaModel {
    Eigen::MatrixXd class_means;       // 2 x k, row c = mean of class c
    Eigen::MatrixXd pooled_covariance; // k x k, regularised
    Eigen::Vector2d priors = Eigen::Vector2d::Constant(0.5);
    Eigen::VectorXd coefficients;      // w = inv(cov) (mu1 - mu0)
    double intercept = 0;              // -w.(mu0 + mu1)/2 + log(pi1 / pi0)

    /// Log posterior odds of class 1.
    double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Shared-covariance Gaussian classifier. The pooled covariance gets
/// lambda * I added, lambda = 1e-6 * trace / k.
LdaModel lda_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y);

/// label 1 iff posterior > 0.5; score = logistic(decision).
Prediction lda_predict(const LdaModel& model, const Eigen::MatrixXd& x);

// ---------------------------------------------------------------------------
// CART trees and random forest
// ---------------------------------------------------------------------------

enum class MaxFeatures { Sqrt, Log2, All };

const char* to_string(MaxFeatures rule);
MaxFeatures parse_max_features(const std::string& text);

/// Candidate features per split for k columns: floor(sqrt k) or floor(log2 k), at least 1.
int features_per_split(MaxFeatures rule, int k);

struct ForestParams {
    int n_estimators = 100;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    int max_depth = -1;      // -1: unlimited
    int max_leaf_nodes = -1; // -1: unlimited

    std::string describe() const;
    bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
    int feature = -1;      // input column; -1 marks a leaf
    double threshold = 0;  // x <= threshold goes left
    int left = -1;
    int right = -1;
    int count0 = 0;        // bootstrap samples of each class routed here
    int count1 = 0;
    int depth = 0;
    double impurity = 0;   // Gini
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    int depth() const;
    int leaf_count() const;
};

struct ForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names; // in input column order
    std::vector<DecisionTree> trees;
};

/// Bootstrap-aggregated Gini trees. Each tree draws from its own stream
/// seeded by (seed, tree index); per-split feature subsets are drawn over the
/// columns sorted by feature name, so permuting columns together with their
/// names yields the same forest up to column relabelling.
ForestModel rf_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const std::vector<std::string>& names,
                   const ForestParams& params, std::uint64_t seed, unsigned threads = 1);

/// score = mean leaf class-1 fraction over trees; label 1 iff score > 0.5.
Prediction rf_predict(const ForestModel& model, const Eigen::MatrixXd& x);

/// Mean decrease in Gini impurity, weighted by node sample fraction,
/// normalised per tree and then across the forest. Sums to 1.
Eigen::VectorXd rf_feature_importance(const ForestModel& model);

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct FoldData {
    Eigen::MatrixXd train_x;
    Eigen::VectorXi train_y;
    Eigen::MatrixXd val_x;
    Eigen::VectorXi val_y;
    std::vector<std::string> names;
};

struct GridCell {
    ForestParams params;
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0;
    double std_accuracy = 0; // population std over folds
};

struct GridSearchResult {
    std::vector<GridCell> cells; // grid order
    std::size_t best = 0;

    const ForestParams& best_params() const { return cells[best].params; }
};

/// Named hyperparameter grids: "default" (72 cells spanning estimators,
/// max_features, depth and leaf limits) and "quick" (a single cell).
std::vector<ForestParams> grid_preset(const std::string& name);

/// Evaluates every cell by mean validation accuracy over the folds. Ties go
/// to fewer estimators, then shallower trees, then fewer leaves.
GridSearchResult grid_search(const std::vector<FoldData>& folds, const std::vector<ForestParams>& grid,
                             std::uint64_t seed, unsigned threads = 1);

/// Convenience overload taking row-index folds over one matrix.
GridSearchResult grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                             const std::vector<std::string>& names, const std::vector<ForestParams>& grid,
                             const std::vector<std::pair<std::vector<int>, std::vector<int>>>& folds,
                             std::uint64_t seed, unsigned threads = 1);

double accuracy(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted);

} // namespace annulus
