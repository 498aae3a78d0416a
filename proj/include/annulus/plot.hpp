#pragma once

#include <string>
#include <vector>

#include <annulus/evaluation.hpp>
#include <annulus/feature_table.hpp>
#include <annulus/io.hpp>

namespace annulus {

/// Scatter of the two selected features with the largest |LDA coefficient|,
/// coloured by class, with the LDA boundary drawn through the remaining
/// selected features held at their training mean.
std::string lda_scatter_svg(const FeatureTable& data, const FittedPipeline& pipeline, const Provenance& prov);

/// All canonical feature names sharing `name`'s family, i.e. differing only in
/// the phase or transition tag ("area_CP0" -> area_CP0..area_CP25).
std::vector<std::string> feature_family(const std::string& name);

/// Family label with the phase/transition tag replaced by '*'.
std::string family_label(const std::string& name);

/// Per-cohort mean +- std of one feature family across phases/transitions.
std::string family_profile_svg(const FeatureTable& data, const std::string& name, const Provenance& prov);

} // namespace annulus
