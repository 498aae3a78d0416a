#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <annulus/evaluation.hpp>
#include <annulus/io.hpp>

namespace annulus {

/// A trained pipeline as persisted by `annulus train`: the MRMR selection, the
/// scaler over the selected columns and exactly one model.
struct SavedModel {
    std::string kind; // "lda" or "rf"
    FittedPipeline pipeline;
    Provenance provenance;
};

/// JSON document, schema "annulus-model/1". Doubles round-trip exactly.
std::string serialize_model(const SavedModel& model);
SavedModel parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const SavedModel& model);
SavedModel load_model(const std::filesystem::path& path);

/// Re-points the selection at the columns of `names` with matching feature
/// names; throws Error(Schema) when one is missing.
void bind_columns(FittedPipeline& pipeline, const std::vector<std::string>& names);

} // namespace annulus
