#include <doctest.h>

#include <annulus/error.hpp>
#include <annulus/selection.hpp>

#include "support.hpp"

#include <cmath>
#include <limits>

using namespace annulus;

namespace {

// Textbook one-way ANOVA, written out independently of the library.
double anova_oracle(const std::vector<double>& x, const std::vector<int>& y) {
    const int k = 2;
    const double n = static_cast<double>(x.size());
    double grand = 0;
    for (double v : x) grand += v;
    grand /= n;
    double ssb = 0, ssw = 0;
    for (int g = 0; g < k; ++g) {
        double s = 0, c = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (y[i] == g) s += x[i], c += 1;
        const double m = s / c;
        ssb += c * (m - grand) * (m - grand);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (y[i] == g) ssw += (x[i] - m) * (x[i] - m);
    }
    return (ssb / (k - 1)) / (ssw / (n - k));
}

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

struct OracleStep {
    int column;
    double score;
};

// Greedy MRMR recomputed from scratch at every step: relevance / mean |r| over the chosen set.
std::vector<OracleStep> mrmr_oracle(const std::vector<std::vector<double>>& cols, const std::vector<int>& y,
                                    std::size_t k) {
    const std::size_t m = cols.size();
    std::vector<double> f(m);
    for (std::size_t j = 0; j < m; ++j) f[j] = anova_oracle(cols[j], y);
    std::vector<OracleStep> out;
    std::vector<bool> used(m, false);
    while (out.size() < k) {
        int best = -1;
        double best_score = -1;
        for (std::size_t j = 0; j < m; ++j) {
            if (used[j]) continue;
            double score = f[j];
            if (!out.empty()) {
                double red = 0;
                for (const auto& s : out) red += std::abs(pearson_oracle(cols[j], cols[s.column]));
                score = f[j] / std::max(red / out.size(), 1e-6);
            }
            if (best < 0 || score > best_score) best = static_cast<int>(j), best_score = score;
        }
        used[best] = true;
        out.push_back({best, best_score});
    }
    return out;
}

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    std::vector<int> labels;
};

Problem random_problem(std::mt19937_64& rng, int n, int m) {
    std::normal_distribution<double> g(0, 1);
    std::uniform_real_distribution<double> shift(0, 1.5), mix(-0.8, 0.8);
    Problem p;
    p.x.resize(n, m);
    p.y.resize(n);
    for (int i = 0; i < n; ++i) p.y(i) = i % 2;
    for (int j = 0; j < m; ++j) {
        const double s = shift(rng);
        for (int i = 0; i < n; ++i) p.x(i, j) = s * p.y(i) + g(rng);
        if (j > 0) p.x.col(j) += mix(rng) * p.x.col(j - 1); // induce redundancy
        p.names.push_back("f" + std::to_string(j));
    }
    for (int j = 0; j < m; ++j) p.cols.emplace_back(p.x.col(j).data(), p.x.col(j).data() + n);
    p.labels.assign(p.y.data(), p.y.data() + n);
    return p;
}

} // namespace

TEST_SUITE("selection") {

TEST_CASE("F-statistic on a hand-computed ANOVA") {
    Eigen::VectorXd x(6);
    x << 1, 2, 3, 2, 3, 4;
    Eigen::VectorXi y(6);
    y << 0, 0, 0, 1, 1, 1;
    // SSB = 6 * 0.25 = 1.5 (df 1); SSW = 2 + 2 = 4 (df 4) -> F = 1.5 / 1.
    CHECK(f_statistic(x, y) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("F-statistic equals the squared pooled two-sample t") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        auto p = random_problem(rng, 30 + t, 1);
        CHECK(f_statistic(p.x.col(0), p.y) == doctest::Approx(anova_oracle(p.cols[0], p.labels)).epsilon(1e-10));
    }
}

TEST_CASE("F-statistic edge cases") {
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    Eigen::VectorXd sep(4), flat(4);
    sep << 1, 1, 2, 2;
    flat << 3, 3, 3, 3;
    CHECK(std::isinf(f_statistic(sep, y)));
    CHECK(f_statistic(flat, y) == 0.0);
    Eigen::VectorXi one(4);
    one << 1, 1, 1, 1;
    try {
        f_statistic(sep, one);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("F-statistic follows F(1, n-2) under the null (Monte Carlo)") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    const int n = 40, trials = 4000;
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) y(i) = i % 2;
    double sum = 0;
    int exceed = 0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = g(rng);
        const double f = f_statistic(x, y);
        sum += f;
        exceed += f > 4.0982; // 95th percentile of F(1, 38)
    }
    CHECK(std::abs(sum / trials - 38.0 / 36.0) < 0.1);
    CHECK(std::abs(exceed / double(trials) - 0.05) < 0.015);
}

TEST_CASE("pearson matches the textbook formula") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        auto p = random_problem(rng, 25, 2);
        CHECK(pearson(p.x.col(0), p.x.col(1)) == doctest::Approx(pearson_oracle(p.cols[0], p.cols[1])).epsilon(1e-12));
    }
    Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 2.0), v = Eigen::VectorXd::LinSpaced(5, 0, 1);
    CHECK(pearson(c, v) == 0.0);
    CHECK(pearson(v, -3 * v) == doctest::Approx(-1.0));
}

TEST_CASE("greedy MRMR matches a from-scratch oracle for every K") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 60; ++t) {
        const int m = 2 + t % 7; // up to 8 features
        auto p = random_problem(rng, 40 + t, m);
        for (int k = 1; k <= m; ++k) {
            const auto got = mrmr_select(p.x, p.y, p.names, k);
            const auto want = mrmr_oracle(p.cols, p.labels, k);
            REQUIRE(got.k() == static_cast<std::size_t>(k));
            for (int r = 0; r < k; ++r) {
                CHECK(got.ranked[r].column == want[r].column);
                CHECK(got.ranked[r].mrmr_score == doctest::Approx(want[r].score).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("redundant copy is ranked after an independent feature (f1, f3, f2)") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0, 1);
    const int n = 100;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = i % 2;
        x(i, 0) = 1.5 * y(i) + g(rng);
        x(i, 1) = x(i, 0) + 0.05 * g(rng);
        x(i, 2) = 0.8 * y(i) + g(rng);
    }
    const auto r = mrmr_select(x, y, {"f1", "f2", "f3"}, 3);
    CHECK(r.names() == std::vector<std::string>{"f1", "f3", "f2"});
}

TEST_CASE("an exact duplicate never displaces a feature more relevant than its penalized score") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0, 1);
    for (int t = 0; t < 100; ++t) {
        const int n = 60;
        Eigen::MatrixXd x(n, 6);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i) {
            y(i) = i % 2;
            x(i, 0) = 1.0 * y(i) + g(rng);
            for (int j = 2; j < 6; ++j) x(i, j) = 0.6 * y(i) + g(rng);
        }
        x.col(1) = x.col(0);
        const auto r = mrmr_select(x, y, {"a", "dup", "c", "d", "e", "f"}, 6);
        const auto pos = [&](const std::string& name) {
            for (std::size_t i = 0; i < r.ranked.size(); ++i)
                if (r.ranked[i].name == name) return i;
            return r.ranked.size();
        };
        const std::size_t d = pos("dup");
        CHECK(pos("a") < d); // ties resolve to the original
        for (const char* other : {"c", "d", "e", "f"}) {
            const auto& f = r.ranked[pos(other)];
            if (f.relevance > r.ranked[d].mrmr_score) CHECK(pos(other) < d);
        }
    }
}

TEST_CASE("ties go to the lower column") {
    Eigen::MatrixXd x(6, 3);
    x.col(0) << 1, 2, 3, 2, 3, 4;
    x.col(1) = x.col(0);
    x.col(2) = x.col(0);
    Eigen::VectorXi y(6);
    y << 0, 0, 0, 1, 1, 1;
    const auto r = mrmr_select(x, y, {"a", "b", "c"}, 3);
    CHECK(r.columns() == std::vector<int>{0, 1, 2});
}

TEST_CASE("argument validation") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
    Eigen::VectorXi y(10);
    for (int i = 0; i < 10; ++i) y(i) = i % 2;
    CHECK_THROWS_AS(mrmr_select(x, y, {"a", "b"}, 1), Error);
    CHECK_THROWS_AS(mrmr_select(x, y, {"a", "b", "c"}, 4), Error);
    CHECK(mrmr_select(x, y, {"a", "b", "c"}, 0).k() == 0);
}

TEST_CASE("selection report layout") {
    Eigen::MatrixXd x(6, 2);
    x.col(0) << 1, 2, 3, 2, 3, 4;
    x.col(1) << 0, 1, 0, 1, 0, 2;
    Eigen::VectorXi y(6);
    y << 0, 0, 0, 1, 1, 1;
    const auto text = format_selection_report(mrmr_select(x, y, {"a", "b"}, 2), Provenance{1, "h"});
    const auto rows = testing::csv_rows(text, true);
    CHECK(rows[0] == std::vector<std::string>{"rank", "feature", "F", "mrmr_score"});
    CHECK(rows[1][1] == "a");
    CHECK(rows[1][2] == "1.5");
    CHECK(text.rfind("# annulus", 0) == 0);
}

}
