#include <doctest.h>

#include <annulus/error.hpp>
#include <annulus/evaluation.hpp>
#include <annulus/selection.hpp>

#include "support.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <set>

using namespace annulus;

namespace {

// AUC as the fraction of (positive, negative) pairs ranked correctly, ties counting half.
double auc_pairs(const Eigen::VectorXi& y, const Eigen::VectorXd& s) {
    double good = 0, pairs = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        for (Eigen::Index j = 0; j < y.size(); ++j)
            if (y(i) == 1 && y(j) == 0) {
                pairs += 1;
                good += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
            }
    return good / pairs;
}

Eigen::VectorXi labels_98_89() {
    Eigen::VectorXi y(187);
    for (int i = 0; i < 187; ++i) y(i) = i < 98 ? 0 : 1;
    return y;
}

FeatureTable table_from(const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
    FeatureTable t;
    t.values = x;
    t.labels = y;
    for (Eigen::Index j = 0; j < x.cols(); ++j) t.names.push_back("f" + std::to_string(j));
    for (Eigen::Index i = 0; i < x.rows(); ++i) t.patient_ids.push_back("p" + std::to_string(i));
    return t;
}

FeatureTable noisy_table(std::uint64_t seed, int n, int m, double shift) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    Eigen::MatrixXd x(n, m);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = i % 2;
        for (int j = 0; j < m; ++j) x(i, j) = g(rng) + (j < 4 ? shift * y(i) : 0.0);
    }
    return table_from(x, y);
}

PipelineConfig quick_config(std::size_t k) {
    PipelineConfig c;
    c.k = k;
    c.grid = "quick";
    c.threads = 1;
    return c;
}

} // namespace

TEST_SUITE("evaluation") {

TEST_CASE("confusion TP=7 TN=7 FP=3 FN=3 gives 0.70 everywhere") {
    Eigen::VectorXi truth(20), pred(20);
    for (int i = 0; i < 20; ++i) {
        truth(i) = i < 10;
        pred(i) = i < 10 ? (i < 7) : (i < 13);
    }
    const auto m = confusion_metrics(truth, pred);
    CHECK(m.accuracy == 0.7);
    CHECK(m.sensitivity == 0.7);
    CHECK(m.specificity == 0.7);
    CHECK(m.f1 == 0.7);
}

TEST_CASE("zero denominators report 0") {
    Eigen::VectorXi truth(4), pred(4);
    truth << 0, 0, 0, 0;
    pred << 0, 0, 0, 0;
    const auto m = confusion_metrics(truth, pred);
    CHECK(m.accuracy == 1.0);
    CHECK(m.sensitivity == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.specificity == 1.0);
}

TEST_CASE("AUC matches pair counting on random instances with ties") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> coarse(0, 8);
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXi y(20);
        Eigen::VectorXd s(20);
        for (int i = 0; i < 20; ++i) {
            y(i) = rng() % 2;
            s(i) = coarse(rng) / 8.0;
        }
        y(0) = 0;
        y(1) = 1;
        CHECK(std::abs(roc_auc(y, s) - auc_pairs(y, s)) < 1e-12);
    }
}

TEST_CASE("summaries use the population std") {
    std::vector<Metrics> ms(2);
    ms[0].accuracy = 0.6;
    ms[1].accuracy = 0.8;
    const auto s = summarize(ms);
    CHECK(s.mean.accuracy == doctest::Approx(0.7));
    CHECK(s.std.accuracy == doctest::Approx(0.1));
}

TEST_CASE("split of 98/89 with 10 per class held out gives 134/33 folds") {
    const auto plan = stratified_split(labels_98_89(), 10, 5, 42);
    CHECK(plan.holdout.size() == 20);
    std::multiset<std::size_t> train, val;
    for (const auto& f : plan.folds) train.insert(f.train.size()), val.insert(f.validation.size());
    CHECK(train.count(134) >= 1);
    CHECK(val.count(33) >= 1);
    for (const auto& f : plan.folds) CHECK(f.train.size() + f.validation.size() == 167);
}

TEST_CASE("split is a stratified partition and deterministic") {
    const auto y = labels_98_89();
    const auto plan = stratified_split(y, 10, 5, 7);
    std::vector<int> seen(187, 0);
    for (int r : plan.holdout) ++seen[r];
    int holdout_mr = 0;
    for (int r : plan.holdout) holdout_mr += y(r);
    CHECK(holdout_mr == 10);
    for (const auto& f : plan.folds) {
        for (int r : f.validation) ++seen[r];
        int mr = 0;
        for (int r : f.validation) mr += y(r);
        CHECK(std::abs(mr - 79.0 / 5) <= 1.0);
        std::vector<int> overlap;
        std::set_intersection(f.train.begin(), f.train.end(), f.validation.begin(), f.validation.end(),
                              std::back_inserter(overlap));
        CHECK(overlap.empty());
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

    const auto again = stratified_split(y, 10, 5, 7);
    CHECK(again.holdout == plan.holdout);
    CHECK(stratified_split(y, 10, 5, 8).holdout != plan.holdout);
}

TEST_CASE("split validation") {
    Eigen::VectorXi one = Eigen::VectorXi::Zero(30);
    try {
        stratified_split(one, 2, 5, 1);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
    Eigen::VectorXi small(12);
    for (int i = 0; i < 12; ++i) small(i) = i % 2;
    CHECK_THROWS_AS(stratified_split(small, 3, 5, 1), Error);
}

TEST_CASE("perfectly separable data gives 1.0 +- 0") {
    auto t = noisy_table(1, 100, 10, 0.0);
    for (Eigen::Index i = 0; i < t.rows(); ++i) t.values(i, 0) = t.labels(i) ? 10.0 + 0.01 * i : -10.0 - 0.01 * i;
    const auto r = run_cv(t, quick_config(3));
    CHECK(r.lda_validation->mean.accuracy == 1.0);
    CHECK(r.lda_validation->std.accuracy == 0.0);
    CHECK(r.rf_validation->mean.accuracy == 1.0);
    CHECK(r.rf_validation->std.accuracy == 0.0);
    CHECK(r.lda_test->accuracy == 1.0);
}

TEST_CASE("single-class data is a data error") {
    auto t = noisy_table(1, 40, 5, 0.0);
    t.labels.setZero();
    try {
        run_cv(t, quick_config(3));
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(exit_code(e.kind()) == 4);
    }
}

TEST_CASE("leakage sentinel: holdout rows never influence cross-validation") {
    const auto base = noisy_table(3, 120, 12, 0.7);
    auto poisoned = base;
    const auto plan = stratified_split(base.labels, 10, 5, 42);
    // Turn the holdout into a perfect label oracle; CV must not notice.
    for (int r : plan.holdout) {
        poisoned.values.row(r).setConstant(poisoned.labels(r) ? 1e6 : -1e6);
    }
    for (auto mode : {SelectionMode::PerFold, SelectionMode::Global}) {
        auto c = quick_config(5);
        c.selection = mode;
        const auto a = run_cv(base, c), b = run_cv(poisoned, c);
        CHECK(a.lda_validation->mean.accuracy == b.lda_validation->mean.accuracy);
        CHECK(a.rf_validation->mean.accuracy == b.rf_validation->mean.accuracy);
        CHECK(a.lda_validation->mean.auc == b.lda_validation->mean.auc);
        for (std::size_t f = 0; f < a.fold_selections.size(); ++f)
            CHECK(a.fold_selections[f].names() == b.fold_selections[f].names());
    }
}

TEST_CASE("per-fold selection only sees the fold's training rows") {
    const auto t = noisy_table(4, 100, 15, 0.6);
    const auto r = run_cv(t, quick_config(6));
    for (std::size_t f = 0; f < r.plan.folds.size(); ++f) {
        const auto sub = t.subset_rows(r.plan.folds[f].train);
        const auto want = mrmr_select(sub.values, sub.labels, sub.names, 6);
        CHECK(r.fold_selections[f].names() == want.names());
    }
}

TEST_CASE("fit_pipeline ignores rows outside the training set") {
    auto t = noisy_table(5, 60, 8, 0.8);
    std::vector<int> train;
    for (int i = 0; i < 60; ++i)
        if (i % 4 < 2) train.push_back(i);
    auto poisoned = t;
    for (int i = 0; i < 60; ++i)
        if (i % 4 >= 2) poisoned.values.row(i).setConstant(std::nan(""));
    ForestParams fp;
    fp.n_estimators = 10;
    const auto a = fit_pipeline(t, train, quick_config(4), fp);
    const auto b = fit_pipeline(poisoned, train, quick_config(4), fp);
    CHECK(a.selection.names() == b.selection.names());
    CHECK(a.lda->coefficients == b.lda->coefficients);
    const Eigen::MatrixXd probe = t.values.topRows(10);
    CHECK(a.predict_rf(probe).scores == b.predict_rf(probe).scores);
}

TEST_CASE("cross-validation is deterministic across thread counts") {
    const auto t = noisy_table(6, 100, 12, 0.5);
    auto c1 = quick_config(5), c4 = quick_config(5);
    c4.threads = 4;
    const Provenance prov{42, "x"};
    const auto a = run_cv(t, c1), b = run_cv(t, c4);
    CHECK(format_metrics_report(a, prov) == format_metrics_report(b, prov));
    CHECK(format_feature_report(a, t, prov) == format_feature_report(b, t, prov));
    CHECK(format_grid_report(*a.grid, prov) == format_grid_report(*b.grid, prov));
}

TEST_CASE("metrics report has the four labelled rows") {
    const auto t = noisy_table(7, 80, 8, 0.8);
    const auto r = run_cv(t, quick_config(4));
    const auto rows = testing::csv_rows(format_metrics_report(r, Provenance{42, "x"}));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "LDA (Validation set)");
    CHECK(rows[1][0] == "RF (Validation set)");
    CHECK(rows[2][0] == "LDA (Test set)");
    CHECK(rows[3][0] == "RF (Test set)");
    CHECK(rows[2][2].empty()); // test rows carry no std
    const auto table = format_metrics_table(r);
    CHECK(table.find("±") != std::string::npos);
}

}
