#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <annulus/feature_table.hpp>
#include <annulus/io.hpp>
#include <annulus/models.hpp>
#include <annulus/selection.hpp>

namespace annulus {

struct Fold {
    std::vector<int> train;
    std::vector<int> validation;
};

struct SplitPlan {
    std::vector<int> holdout; // held out of cross-validation entirely
    std::vector<Fold> folds;  // partition the remaining rows
    std::uint64_t seed = 0;

    std::vector<int> cv_rows() const; // all non-holdout rows, ascending
};

/// Per class: seeded shuffle, the first `holdout_per_class` rows go to the
/// holdout, the rest are dealt round-robin over the folds. Dealing continues
/// from class 0 into class 1 so fold sizes differ by at most one.
SplitPlan stratified_split(const Eigen::VectorXi& labels, int holdout_per_class, int folds, std::uint64_t seed);

struct Metrics {
    double accuracy = 0;
    double specificity = 0;
    double sensitivity = 0;
    double f1 = 0;
    double auc = 0;
};

/// Positive class is MR (1). Ratios with a zero denominator are reported as 0.
Metrics confusion_metrics(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted);

/// Mann-Whitney AUC with average ranks for tied scores.
double roc_auc(const Eigen::VectorXi& truth, const Eigen::VectorXd& scores);

Metrics evaluate_prediction(const Eigen::VectorXi& truth, const Prediction& prediction);

struct MetricSummary {
    std::vector<Metrics> folds;
    Metrics mean;
    Metrics std; // population std over folds
};

MetricSummary summarize(const std::vector<Metrics>& folds);

enum class SelectionMode { PerFold, Global };

const char* to_string(SelectionMode mode);
SelectionMode parse_selection_mode(const std::string& text);

struct PipelineConfig {
    std::size_t k = 25;
    int folds = 5;
    int holdout_per_class = 10;
    std::uint64_t seed = 42;
    SelectionMode selection = SelectionMode::PerFold;
    std::string grid = "default";
    unsigned threads = 0; // 0 = all hardware threads
    bool run_lda = true;
    bool run_rf = true;

    /// Stable text form used for the artifact config hash (threads excluded).
    std::string canonical() const;
};

/// Everything fitted on one training split: selection, scaler and both models.
struct FittedPipeline {
    SelectionResult selection;
    Standardizer standardizer; // over the selected columns
    std::optional<LdaModel> lda;
    std::optional<ForestModel> forest;

    Eigen::MatrixXd select(const Eigen::MatrixXd& all_features) const;
    Prediction predict_lda(const Eigen::MatrixXd& all_features) const;
    Prediction predict_rf(const Eigen::MatrixXd& all_features) const;
};

/// Fits the pipeline on `train_rows` only. With `fixed_selection` the MRMR
/// step is skipped and that ranking is used instead.
FittedPipeline fit_pipeline(const FeatureTable& data, const std::vector<int>& train_rows,
                            const PipelineConfig& config, const std::optional<ForestParams>& forest_params,
                            const SelectionResult* fixed_selection = nullptr);

struct CvReport {
    PipelineConfig config;
    SplitPlan plan;
    std::vector<SelectionResult> fold_selections;
    std::optional<SelectionResult> global_selection;
    std::optional<MetricSummary> lda_validation;
    std::optional<MetricSummary> rf_validation;
    std::optional<GridSearchResult> grid;
    std::optional<Metrics> lda_test;
    std::optional<Metrics> rf_test;
    FittedPipeline final_pipeline; // refit on all non-holdout rows
};

/// Stratified CV with a fixed holdout. Selection, scaling and models are fit
/// on each fold's training rows; RF hyperparameters come from a grid search
/// over the same folds; the holdout is only used for the final test rows.
CvReport run_cv(const FeatureTable& data, const PipelineConfig& config);

/// Table-shaped metrics CSV: one row per model x split.
std::string format_metrics_report(const CvReport& report, const Provenance& prov);

/// Human-readable "mean±std" table.
std::string format_metrics_table(const CvReport& report);

/// Selected features with F, LDA coefficient, RF importance and per-class mean/std.
std::string format_feature_report(const CvReport& report, const FeatureTable& data, const Provenance& prov);

std::string format_grid_report(const GridSearchResult& grid, const Provenance& prov);

} // namespace annulus
