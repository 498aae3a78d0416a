#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace annulus {

/// Labelled cardiac phases (out of 30); CP0 is end-diastole.
inline constexpr std::array<int, 6> kPhases = {0, 5, 10, 15, 20, 25};
inline constexpr std::size_t kNumPhases = kPhases.size();
inline constexpr std::size_t kNumPoints = 6;
inline constexpr std::size_t kNumTransitions = kNumPhases - 1;

/// Annulus insertion points, two per long-axis view:
/// P0 anterior (2ch), P1 posterior (2ch), P2 septal (3ch),
/// P3 free wall (3ch), P4 septal (4ch), P5 free wall (4ch).
enum class AnnulusPoint : std::size_t { P0 = 0, P1, P2, P3, P4, P5 };

/// Order of the insertion points walking once around the annulus.
inline constexpr std::array<std::size_t, kNumPoints> kRingOrder = {0, 4, 2, 1, 5, 3};

enum class ClassLabel : int { NoMR = 0, MR = 1 };

/// Index of a phase value in kPhases, or -1.
constexpr int phase_index(int phase) {
    for (std::size_t i = 0; i < kNumPhases; ++i)
        if (kPhases[i] == phase) return static_cast<int>(i);
    return -1;
}

inline std::string point_name(std::size_t point) { return "P" + std::to_string(point); }

/// Per-patient landmarks in patient coordinates (mm), indexed [phase][point].
struct LandmarkSet {
    std::string patient_id;
    ClassLabel label = ClassLabel::NoMR;
    std::array<std::array<Eigen::Vector3d, kNumPoints>, kNumPhases> points;

    const Eigen::Vector3d& at(std::size_t phase_idx, std::size_t point) const {
        return points[phase_idx][point];
    }
};

} // namespace annulus
