#include <annulus/feature_table.hpp>

#include <annulus/error.hpp>

#include <sstream>

namespace annulus {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

} // namespace

FeatureTable FeatureTable::subset_rows(const std::vector<int>& rows) const {
    FeatureTable out;
    out.names = names;
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.patient_ids.push_back(patient_ids[rows[i]]);
        out.labels(i) = labels(rows[i]);
        out.values.row(i) = values.row(rows[i]);
    }
    return out;
}

FeatureTable FeatureTable::subset_cols(const std::vector<int>& cols) const {
    FeatureTable out;
    out.patient_ids = patient_ids;
    out.labels = labels;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.names.push_back(names[cols[j]]);
        out.values.col(j) = values.col(cols[j]);
    }
    return out;
}

FeatureTable make_feature_table(const std::vector<FeatureVector>& vectors) {
    FeatureTable table;
    table.names = feature_names();
    const auto n = static_cast<Eigen::Index>(vectors.size());
    table.labels.resize(n);
    table.values.resize(n, static_cast<Eigen::Index>(kNumFeatures));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& fv = vectors[i];
        if (fv.values.size() != kNumFeatures)
            throw Error(ErrorKind::Input, "feature vector of " + fv.patient_id + " has wrong length");
        table.patient_ids.push_back(fv.patient_id);
        table.labels(i) = static_cast<int>(fv.label);
        for (std::size_t j = 0; j < kNumFeatures; ++j) table.values(i, j) = fv.values[j];
    }
    return table;
}

std::string format_feature_table(const FeatureTable& table, const Provenance& prov,
                                 const std::string& name_prefix) {
    std::string out = "# " + prov.tag() + "\n";
    out += "patient_id,label";
    for (const auto& name : table.names) out += "," + name_prefix + name;
    out += "\n";
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        out += table.patient_ids[i] + "," + std::to_string(table.labels(i));
        for (Eigen::Index j = 0; j < table.cols(); ++j) out += "," + format_double(table.values(i, j));
        out += "\n";
    }
    return out;
}

FeatureTable parse_feature_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        header = split(line, ',');
        break;
    }
    if (header.size() < 3 || header[0] != "patient_id" || header[1] != "label")
        throw Error(ErrorKind::Schema, "feature table must start with patient_id,label,<features>");

    FeatureTable table;
    bool all_gt = true;
    for (std::size_t j = 2; j < header.size(); ++j) all_gt = all_gt && header[j].rfind("gt_", 0) == 0;
    for (std::size_t j = 2; j < header.size(); ++j)
        table.names.push_back(all_gt ? header[j].substr(3) : header[j]);

    std::vector<int> labels;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size())
            throw Error(ErrorKind::Schema, "feature table row " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(header.size()));
        table.patient_ids.push_back(fields[0]);
        if (fields[1] != "0" && fields[1] != "1")
            throw Error(ErrorKind::Schema, "label must be 0 or 1 (patient " + fields[0] + ")");
        labels.push_back(fields[1] == "1" ? 1 : 0);
        std::vector<double> row;
        row.reserve(fields.size() - 2);
        for (std::size_t j = 2; j < fields.size(); ++j) row.push_back(parse_double(fields[j]));
        rows.push_back(std::move(row));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    table.labels.resize(n);
    table.values.resize(n, static_cast<Eigen::Index>(table.names.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        table.labels(i) = labels[i];
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) table.values(i, j) = rows[i][j];
    }
    return table;
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
    return parse_feature_table(read_file(path));
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table,
                         const Provenance& prov, const std::string& name_prefix) {
    write_file_atomic(path, format_feature_table(table, prov, name_prefix));
}

} // namespace annulus
