#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <annulus/features.hpp>
#include <annulus/io.hpp>

namespace annulus {

/// Patients x features matrix with ids and binary labels.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<std::string> patient_ids;
    Eigen::VectorXi labels;
    Eigen::MatrixXd values; // rows = patients

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    FeatureTable subset_rows(const std::vector<int>& rows) const;
    FeatureTable subset_cols(const std::vector<int>& cols) const;
};

FeatureTable make_feature_table(const std::vector<FeatureVector>& vectors);

/// CSV text: one '#' provenance line, then "patient_id,label,<names...>".
/// `name_prefix` is prepended to each feature column name ("gt_" for ground truth).
std::string format_feature_table(const FeatureTable& table, const Provenance& prov,
                                 const std::string& name_prefix = "");

/// Parses the CSV written by format_feature_table; '#' lines are skipped and a
/// "gt_" prefix on every feature column is stripped.
FeatureTable parse_feature_table(const std::string& text);

FeatureTable read_feature_table(const std::filesystem::path& path);

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table,
                         const Provenance& prov, const std::string& name_prefix = "");

} // namespace annulus
