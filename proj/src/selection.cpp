#include <annulus/selection.hpp>

#include <annulus/error.hpp>

#include <cmath>
#include <limits>

namespace annulus {

namespace {

constexpr double kTinyMeanSquare = 1e-12;
constexpr double kRedundancyFloor = 1e-6;

// Centred column scaled to unit norm; zero when the column is constant.
Eigen::VectorXd unit_deviation(const Eigen::Ref<const Eigen::VectorXd>& x) {
    Eigen::VectorXd d = x.array() - x.mean();
    const double ss = d.squaredNorm();
    if (!(ss > 1e-28 * x.squaredNorm()) || ss == 0.0) return Eigen::VectorXd::Zero(x.size());
    return d / std::sqrt(ss);
}

void require_two_classes(const Eigen::Ref<const Eigen::VectorXi>& y) {
    const auto positives = (y.array() == 1).count();
    if (positives == 0 || positives == y.size())
        throw Error(ErrorKind::Data, "labels contain a single class");
    if (((y.array() != 0) && (y.array() != 1)).any()) throw Error(ErrorKind::Input, "labels must be 0 or 1");
}

} // namespace

std::vector<int> SelectionResult::columns() const {
    std::vector<int> out;
    for (const auto& r : ranked) out.push_back(r.column);
    return out;
}

std::vector<std::string> SelectionResult::names() const {
    std::vector<std::string> out;
    for (const auto& r : ranked) out.push_back(r.name);
    return out;
}

double f_statistic(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXi>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::Input, "f_statistic: length mismatch");
    if (x.size() < 3) throw Error(ErrorKind::Input, "f_statistic needs at least 3 samples");
    require_two_classes(y);

    double sum[2] = {0, 0};
    double count[2] = {0, 0};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sum[y(i)] += x(i);
        count[y(i)] += 1;
    }
    const double mean[2] = {sum[0] / count[0], sum[1] / count[1]};
    const double grand = (sum[0] + sum[1]) / (count[0] + count[1]);

    double within = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x(i) - mean[y(i)];
        within += d * d;
    }
    const double between = count[0] * (mean[0] - grand) * (mean[0] - grand) +
                           count[1] * (mean[1] - grand) * (mean[1] - grand);
    const double ms_between = between; // one degree of freedom
    const double ms_within = within / static_cast<double>(x.size() - 2);
    if (ms_within < kTinyMeanSquare)
        return ms_between < kTinyMeanSquare ? 0.0 : std::numeric_limits<double>::infinity();
    return ms_between / ms_within;
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::Input, "pearson: length mismatch");
    if (x.size() < 2) throw Error(ErrorKind::Input, "pearson needs at least 2 samples");
    const double r = unit_deviation(x).dot(unit_deviation(y));
    return std::clamp(r, -1.0, 1.0);
}

SelectionResult mrmr_select(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                            const std::vector<std::string>& names, std::size_t k) {
    const auto m = static_cast<std::size_t>(features.cols());
    if (names.size() != m) throw Error(ErrorKind::Input, "mrmr_select: names do not match columns");
    if (labels.size() != features.rows()) throw Error(ErrorKind::Input, "mrmr_select: label count mismatch");
    if (k > m) throw Error(ErrorKind::Input, "mrmr_select: k exceeds the number of features");
    require_two_classes(labels);

    SelectionResult result;
    if (k == 0) return result;

    std::vector<double> relevance(m);
    Eigen::MatrixXd unit(features.rows(), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        relevance[j] = f_statistic(features.col(j), labels);
        unit.col(j) = unit_deviation(features.col(j));
    }

    std::vector<bool> chosen(m, false);
    std::vector<double> redundancy_sum(m, 0.0);

    std::size_t seed = 0;
    for (std::size_t j = 1; j < m; ++j)
        if (relevance[j] > relevance[seed]) seed = j;

    auto take = [&](std::size_t j, double score) {
        chosen[j] = true;
        result.ranked.push_back({names[j], static_cast<int>(j), relevance[j], score});
        for (std::size_t c = 0; c < m; ++c)
            if (!chosen[c]) redundancy_sum[c] += std::min(1.0, std::abs(unit.col(c).dot(unit.col(j))));
    };
    take(seed, relevance[seed]);

    while (result.ranked.size() < k) {
        const double selected = static_cast<double>(result.ranked.size());
        std::size_t best = m;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (chosen[j]) continue;
            const double score = relevance[j] / std::max(redundancy_sum[j] / selected, kRedundancyFloor);
            if (best == m || score > best_score) {
                best = j;
                best_score = score;
            }
        }
        take(best, best_score);
    }
    return result;
}

std::string format_selection_report(const SelectionResult& result, const Provenance& prov) {
    std::string out = "# " + prov.tag() + "\n";
    out += "rank,feature,F,mrmr_score\n";
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
        const auto& r = result.ranked[i];
        out += std::to_string(i + 1) + "," + r.name + "," + format_double(r.relevance) + "," +
               format_double(r.mrmr_score) + "\n";
    }
    return out;
}

} // namespace annulus
