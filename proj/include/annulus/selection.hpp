#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include <annulus/io.hpp>

namespace annulus {

struct RankedFeature {
    std::string name;
    int column = -1;        // index in the input matrix
    double relevance = 0;   // F-statistic
    double mrmr_score = 0;  // relevance / mean |pearson| with already-selected; F for the seed
};

struct SelectionResult {
    std::vector<RankedFeature> ranked;

    std::size_t k() const { return ranked.size(); }
    std::vector<int> columns() const;
    std::vector<std::string> names() const;
};

/// One-way ANOVA F for two groups (labels 0/1). Returns +inf when the groups
/// are internally constant but differ, and 0 when both mean squares vanish.
double f_statistic(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXi>& y);

/// Product-moment correlation; 0 when either input has zero variance.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Greedy MRMR with F-statistic relevance and mean |Pearson| redundancy,
/// combined as a quotient. The redundancy is floored at 1e-6 and ties go to
/// the lower column index.
SelectionResult mrmr_select(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                            const std::vector<std::string>& names, std::size_t k);

/// "rank,feature,F,mrmr_score" CSV with a provenance comment line.
std::string format_selection_report(const SelectionResult& result, const Provenance& prov);

} // namespace annulus
