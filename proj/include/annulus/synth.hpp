#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <annulus/feature_table.hpp>
#include <annulus/features.hpp>
#include <annulus/landmarks.hpp>

namespace annulus {

struct Distribution {
    double mean = 0;
    double std = 0;
};

/// Generative model for one cohort. Shapes are anchored at a reference
/// phase (axes at CP10, height at CP5) and modulated per phase by a
/// fractional profile; profiles hold one entry per labelled phase.
struct CohortSpec {
    ClassLabel label = ClassLabel::NoMR;
    int n = 100;

    Distribution a_cp10;     // semi-major axis at CP10, mm (normal)
    Distribution axis_ratio; // b / a at CP10 (normal, clipped to [0.4, 0.97])
    std::array<double, kNumPhases> a_profile{};
    std::array<double, kNumPhases> b_profile{};
    double profile_jitter = 0.02; // std of per-phase fractional noise on a and b

    Distribution height_cp5; // saddle height at CP5, mm (gamma)
    std::array<double, kNumPhases> height_profile{};

    /// Displacement magnitude of the anchor point per transition, mm (gamma).
    std::array<Distribution, kNumTransitions> anchor_displacement{};
    std::size_t anchor_point = 2;

    double inplane_rotation_std_deg = 4.0; // per-phase spin of the ellipse, relative to CP0
    double tilt_std_deg = 3.0;             // per-phase tilt of the annular plane, relative to CP0

    /// Angular position of P0..P5 on the ellipse, degrees from the major axis.
    std::array<double, kNumPoints> point_angles_deg = {90, 270, 200, 20, 160, 340};

    bool random_pose = true;
    double pose_translation_mm = 100.0; // uniform in [-t, t] per axis
    double noise_mm = 1.0;              // isotropic landmark noise

    /// Throws Error(Input) for negative spreads, empty cohorts or bad profiles.
    void validate() const;
};

CohortSpec default_no_mr_spec();
CohortSpec default_mr_spec();

struct SynthCohort {
    std::vector<LandmarkSet> landmarks;         // noisy, posed
    std::vector<FeatureVector> ground_truth;    // exact pre-noise features
};

/// Samples the No-MR cohort first, then the MR cohort; patient ids are
/// "N0000".. and "M0000"... Deterministic given the seed.
SynthCohort generate_cohorts(const CohortSpec& no_mr, const CohortSpec& mr, std::uint64_t seed);

/// Saddle weights for the given point angles: zero mean, orthogonal to the
/// in-plane coordinates (so the best-fit plane stays the ellipse plane) and
/// scaled so max - min = 2.
std::array<double, kNumPoints> saddle_weights(const std::array<double, kNumPoints>& angles_deg);

std::string describe_spec(const CohortSpec& spec); // JSON

} // namespace annulus
