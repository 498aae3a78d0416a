#include <annulus/evaluation.hpp>

#include <annulus/error.hpp>
#include <annulus/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace annulus {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
    return out;
}

Eigen::VectorXi gather(const Eigen::VectorXi& y, const std::vector<int>& rows) {
    Eigen::VectorXi out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(i) = y(rows[i]);
    return out;
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = x.col(cols[j]);
    return out;
}

template <typename Fn>
Metrics combine(const std::vector<Metrics>& ms, Fn&& fn) {
    Metrics out;
    out.accuracy = fn([](const Metrics& m) { return m.accuracy; });
    out.specificity = fn([](const Metrics& m) { return m.specificity; });
    out.sensitivity = fn([](const Metrics& m) { return m.sensitivity; });
    out.f1 = fn([](const Metrics& m) { return m.f1; });
    out.auc = fn([](const Metrics& m) { return m.auc; });
    (void)ms;
    return out;
}

std::string metrics_row(const std::string& label, const Metrics& mean, const Metrics* std) {
    std::string row = label;
    for (auto [m, s] : {std::pair{mean.accuracy, std ? std->accuracy : 0.0},
                        std::pair{mean.specificity, std ? std->specificity : 0.0},
                        std::pair{mean.sensitivity, std ? std->sensitivity : 0.0},
                        std::pair{mean.f1, std ? std->f1 : 0.0}, std::pair{mean.auc, std ? std->auc : 0.0}}) {
        row += "," + format_double(m) + ",";
        if (std) row += format_double(s);
    }
    return row + "\n";
}

std::string table_row(const std::string& label, const Metrics& mean, const Metrics* std) {
    char buf[256];
    std::string row;
    std::snprintf(buf, sizeof(buf), "%-22s", label.c_str());
    row += buf;
    for (auto [m, s] : {std::pair{mean.accuracy, std ? std->accuracy : 0.0},
                        std::pair{mean.specificity, std ? std->specificity : 0.0},
                        std::pair{mean.sensitivity, std ? std->sensitivity : 0.0},
                        std::pair{mean.f1, std ? std->f1 : 0.0}, std::pair{mean.auc, std ? std->auc : 0.0}}) {
        std::string cell = fixed(m, 2);
        std::size_t width = cell.size();
        if (std) {
            cell += "±" + fixed(s, 2);
            width += 1 + fixed(s, 2).size(); // '±' is two bytes but one column
        }
        row += " | " + cell + std::string(width < 11 ? 11 - width : 0, ' ');
    }
    return row + "\n";
}

} // namespace

std::vector<int> SplitPlan::cv_rows() const {
    std::vector<int> rows;
    for (const auto& f : folds) rows.insert(rows.end(), f.validation.begin(), f.validation.end());
    std::sort(rows.begin(), rows.end());
    return rows;
}

SplitPlan stratified_split(const Eigen::VectorXi& labels, int holdout_per_class, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorKind::Input, "stratified_split needs at least 2 folds");
    if (holdout_per_class < 0) throw Error(ErrorKind::Input, "holdout per class must be >= 0");
    std::vector<int> by_class[2];
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) != 0 && labels(i) != 1) throw Error(ErrorKind::Input, "labels must be 0 or 1");
        by_class[labels(i)].push_back(static_cast<int>(i));
    }
    if (by_class[0].empty() || by_class[1].empty()) throw Error(ErrorKind::Data, "labels contain a single class");
    for (int c = 0; c < 2; ++c)
        if (static_cast<int>(by_class[c].size()) < holdout_per_class + folds)
            throw Error(ErrorKind::Input, "class " + std::to_string(c) + " has " +
                                              std::to_string(by_class[c].size()) + " samples; need at least " +
                                              std::to_string(holdout_per_class + folds));

    SplitPlan plan;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(folds));
    std::mt19937_64 rng(seed);
    int next_fold = 0;
    for (int c = 0; c < 2; ++c) {
        auto rows = by_class[c];
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) < holdout_per_class) {
                plan.holdout.push_back(rows[i]);
            } else {
                plan.folds[next_fold].validation.push_back(rows[i]);
                next_fold = (next_fold + 1) % folds;
            }
        }
    }
    std::sort(plan.holdout.begin(), plan.holdout.end());
    for (auto& f : plan.folds) std::sort(f.validation.begin(), f.validation.end());
    for (int f = 0; f < folds; ++f) {
        for (int g = 0; g < folds; ++g)
            if (g != f)
                plan.folds[f].train.insert(plan.folds[f].train.end(), plan.folds[g].validation.begin(),
                                           plan.folds[g].validation.end());
        std::sort(plan.folds[f].train.begin(), plan.folds[f].train.end());
    }
    return plan;
}

Metrics confusion_metrics(const Eigen::VectorXi& truth, const Eigen::VectorXi& predicted) {
    if (truth.size() != predicted.size()) throw Error(ErrorKind::Input, "confusion_metrics: length mismatch");
    if (truth.size() == 0) throw Error(ErrorKind::Input, "confusion_metrics: empty input");
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const bool t = truth(i) == 1, p = predicted(i) == 1;
        if (t && p) ++tp;
        else if (!t && !p) ++tn;
        else if (p) ++fp;
        else ++fn;
    }
    auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    Metrics m;
    m.accuracy = (tp + tn) / static_cast<double>(truth.size());
    m.sensitivity = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    m.f1 = ratio(2 * tp, 2 * tp + fp + fn); // harmonic mean of precision and recall, without rounding detours
    return m;
}

double roc_auc(const Eigen::VectorXi& truth, const Eigen::VectorXd& scores) {
    if (truth.size() != scores.size()) throw Error(ErrorKind::Input, "roc_auc: length mismatch");
    const Eigen::Index n = truth.size();
    const double n1 = static_cast<double>((truth.array() == 1).count());
    const double n0 = static_cast<double>(n) - n1;
    if (n1 == 0 || n0 == 0) throw Error(ErrorKind::Input, "roc_auc needs both classes");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });
    double rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores(order[j + 1]) == scores(order[i])) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (truth(order[t]) == 1) rank_sum += avg_rank;
        i = j + 1;
    }
    return (rank_sum - n1 * (n1 + 1) / 2) / (n1 * n0);
}

Metrics evaluate_prediction(const Eigen::VectorXi& truth, const Prediction& prediction) {
    Metrics m = confusion_metrics(truth, prediction.labels);
    m.auc = roc_auc(truth, prediction.scores);
    return m;
}

MetricSummary summarize(const std::vector<Metrics>& folds) {
    MetricSummary s;
    s.folds = folds;
    const double n = static_cast<double>(folds.size());
    s.mean = combine(folds, [&](auto get) {
        double sum = 0;
        for (const auto& m : folds) sum += get(m);
        return sum / n;
    });
    s.std = combine(folds, [&](auto get) {
        double sum = 0;
        for (const auto& m : folds) sum += get(m);
        const double mean = sum / n;
        double ss = 0;
        for (const auto& m : folds) ss += (get(m) - mean) * (get(m) - mean);
        return std::sqrt(ss / n);
    });
    return s;
}

const char* to_string(SelectionMode mode) { return mode == SelectionMode::PerFold ? "per-fold" : "global"; }

SelectionMode parse_selection_mode(const std::string& text) {
    if (text == "per-fold") return SelectionMode::PerFold;
    if (text == "global") return SelectionMode::Global;
    throw Error(ErrorKind::Input, "selection must be per-fold or global");
}

std::string PipelineConfig::canonical() const {
    return "k=" + std::to_string(k) + ";folds=" + std::to_string(folds) +
           ";holdout=" + std::to_string(holdout_per_class) + ";seed=" + std::to_string(seed) +
           ";selection=" + to_string(selection) + ";grid=" + grid + ";lda=" + std::to_string(run_lda) +
           ";rf=" + std::to_string(run_rf);
}

Eigen::MatrixXd FittedPipeline::select(const Eigen::MatrixXd& all_features) const {
    return gather_cols(all_features, selection.columns());
}

Prediction FittedPipeline::predict_lda(const Eigen::MatrixXd& all_features) const {
    if (!lda) throw Error(ErrorKind::Input, "pipeline has no LDA model");
    return lda_predict(*lda, standardizer.transform(select(all_features)));
}

Prediction FittedPipeline::predict_rf(const Eigen::MatrixXd& all_features) const {
    if (!forest) throw Error(ErrorKind::Input, "pipeline has no forest");
    return rf_predict(*forest, select(all_features));
}

FittedPipeline fit_pipeline(const FeatureTable& data, const std::vector<int>& train_rows,
                            const PipelineConfig& config, const std::optional<ForestParams>& forest_params,
                            const SelectionResult* fixed_selection) {
    const Eigen::MatrixXd x = gather_rows(data.values, train_rows);
    const Eigen::VectorXi y = gather(data.labels, train_rows);

    FittedPipeline p;
    p.selection = fixed_selection ? *fixed_selection : mrmr_select(x, y, data.names, config.k);
    const Eigen::MatrixXd selected = gather_cols(x, p.selection.columns());
    p.standardizer = Standardizer::fit(selected);
    if (config.run_lda) p.lda = lda_fit(p.standardizer.transform(selected), y);
    if (forest_params) p.forest = rf_fit(selected, y, p.selection.names(), *forest_params, config.seed, config.threads);
    return p;
}

CvReport run_cv(const FeatureTable& data, const PipelineConfig& config) {
    if (data.rows() != data.labels.size()) throw Error(ErrorKind::Input, "feature table is inconsistent");
    const auto positives = (data.labels.array() == 1).count();
    if (positives == 0 || positives == data.labels.size())
        throw Error(ErrorKind::Data, "dataset contains a single class");

    CvReport report;
    report.config = config;
    report.plan = stratified_split(data.labels, config.holdout_per_class, config.folds, config.seed);
    const auto cv_rows = report.plan.cv_rows();
    const std::size_t n_folds = report.plan.folds.size();

    if (config.selection == SelectionMode::Global) {
        const Eigen::MatrixXd x = gather_rows(data.values, cv_rows);
        report.global_selection = mrmr_select(x, gather(data.labels, cv_rows), data.names, config.k);
    }
    const SelectionResult* fixed = report.global_selection ? &*report.global_selection : nullptr;

    // Selection, scaling and LDA per fold.
    std::vector<FittedPipeline> fitted(n_folds);
    parallel_for(n_folds, config.threads, [&](std::size_t f) {
        PipelineConfig fold_config = config;
        fold_config.threads = 1;
        try {
            fitted[f] = fit_pipeline(data, report.plan.folds[f].train, fold_config, std::nullopt, fixed);
        } catch (const Error& e) {
            throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
        }
    });
    for (const auto& p : fitted) report.fold_selections.push_back(p.selection);

    std::vector<FoldData> fold_data(n_folds);
    for (std::size_t f = 0; f < n_folds; ++f) {
        const auto& fold = report.plan.folds[f];
        const auto cols = fitted[f].selection.columns();
        fold_data[f].names = fitted[f].selection.names();
        fold_data[f].train_x = gather_cols(gather_rows(data.values, fold.train), cols);
        fold_data[f].train_y = gather(data.labels, fold.train);
        fold_data[f].val_x = gather_cols(gather_rows(data.values, fold.validation), cols);
        fold_data[f].val_y = gather(data.labels, fold.validation);
    }

    if (config.run_lda) {
        std::vector<Metrics> ms;
        for (std::size_t f = 0; f < n_folds; ++f)
            ms.push_back(evaluate_prediction(fold_data[f].val_y, fitted[f].predict_lda(
                                                                     gather_rows(data.values, report.plan.folds[f].validation))));
        report.lda_validation = summarize(ms);
    }

    std::optional<ForestParams> best;
    if (config.run_rf) {
        report.grid = grid_search(fold_data, grid_preset(config.grid), config.seed, config.threads);
        best = report.grid->best_params();
        std::vector<Metrics> ms(n_folds);
        parallel_for(n_folds, config.threads, [&](std::size_t f) {
            const auto model = rf_fit(fold_data[f].train_x, fold_data[f].train_y, fold_data[f].names, *best, config.seed, 1);
            ms[f] = evaluate_prediction(fold_data[f].val_y, rf_predict(model, fold_data[f].val_x));
        });
        report.rf_validation = summarize(ms);
    }

    report.final_pipeline = fit_pipeline(data, cv_rows, config, best, fixed);
    if (!report.plan.holdout.empty()) {
        const Eigen::MatrixXd hx = gather_rows(data.values, report.plan.holdout);
        const Eigen::VectorXi hy = gather(data.labels, report.plan.holdout);
        if (config.run_lda) report.lda_test = evaluate_prediction(hy, report.final_pipeline.predict_lda(hx));
        if (config.run_rf) report.rf_test = evaluate_prediction(hy, report.final_pipeline.predict_rf(hx));
    }
    return report;
}

std::string format_metrics_report(const CvReport& report, const Provenance& prov) {
    std::string out = "# " + prov.tag() + "\n";
    out += "model,accuracy,accuracy_std,specificity,specificity_std,sensitivity,sensitivity_std,f1,f1_std,auc,auc_std\n";
    if (report.lda_validation)
        out += metrics_row("LDA (Validation set)", report.lda_validation->mean, &report.lda_validation->std);
    if (report.rf_validation)
        out += metrics_row("RF (Validation set)", report.rf_validation->mean, &report.rf_validation->std);
    if (report.lda_test) out += metrics_row("LDA (Test set)", *report.lda_test, nullptr);
    if (report.rf_test) out += metrics_row("RF (Test set)", *report.rf_test, nullptr);
    return out;
}

std::string format_metrics_table(const CvReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-22s | %-11s | %-11s | %-11s | %-11s | %-11s\n", "Model", "Accuracy",
                  "Specificity", "Sensitivity", "F1-Score", "AUC");
    std::string out = buf;
    if (report.lda_validation)
        out += table_row("LDA (Validation set)", report.lda_validation->mean, &report.lda_validation->std);
    if (report.rf_validation)
        out += table_row("RF (Validation set)", report.rf_validation->mean, &report.rf_validation->std);
    if (report.lda_test) out += table_row("LDA (Test set)", *report.lda_test, nullptr);
    if (report.rf_test) out += table_row("RF (Test set)", *report.rf_test, nullptr);
    return out;
}

std::string format_feature_report(const CvReport& report, const FeatureTable& data, const Provenance& prov) {
    const auto& p = report.final_pipeline;
    const auto cv_rows = report.plan.cv_rows();
    Eigen::VectorXd importance;
    if (p.forest) importance = rf_feature_importance(*p.forest);

    std::string out = "# " + prov.tag() + "\n";
    out += "rank,feature,F,LDA,RF,mean_no_mr,std_no_mr,mean_mr,std_mr\n";
    for (std::size_t i = 0; i < p.selection.ranked.size(); ++i) {
        const auto& r = p.selection.ranked[i];
        double sum[2] = {0, 0}, sq[2] = {0, 0}, cnt[2] = {0, 0};
        for (int row : cv_rows) {
            const int c = data.labels(row);
            const double v = data.values(row, r.column);
            sum[c] += v;
            sq[c] += v * v;
            cnt[c] += 1;
        }
        auto mean = [&](int c) { return sum[c] / cnt[c]; };
        auto sd = [&](int c) { return std::sqrt(std::max(0.0, sq[c] / cnt[c] - mean(c) * mean(c))); };
        out += std::to_string(i + 1) + "," + r.name + "," + format_double(r.relevance) + "," +
               (p.lda ? format_double(p.lda->coefficients(i)) : std::string()) + "," +
               (p.forest ? format_double(importance(i)) : std::string()) + "," + format_double(mean(0)) + "," +
               format_double(sd(0)) + "," + format_double(mean(1)) + "," + format_double(sd(1)) + "\n";
    }
    return out;
}

std::string format_grid_report(const GridSearchResult& grid, const Provenance& prov) {
    std::string out = "# " + prov.tag() + "\n";
    out += "n_estimators,max_features,max_depth,max_leaf_nodes,mean_accuracy,std_accuracy,best\n";
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        const auto& cell = grid.cells[c];
        out += std::to_string(cell.params.n_estimators) + "," + to_string(cell.params.max_features) + "," +
               std::to_string(cell.params.max_depth) + "," + std::to_string(cell.params.max_leaf_nodes) + "," +
               format_double(cell.mean_accuracy) + "," + format_double(cell.std_accuracy) + "," +
               (c == grid.best ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace annulus
