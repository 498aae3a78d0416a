#pragma once

#include <array>

#include <Eigen/Core>

#include <annulus/geometry.hpp>
#include <annulus/landmarks.hpp>

namespace annulus {

using PhasePoints = Eigen::Matrix<double, kNumPoints, 3, Eigen::RowMajor>;

struct RegisteredPhase {
    int phase = 0;
    PhasePoints points3d;                          // rows P0..P5, registered frame
    PlaneFit<double> plane;
    EllipseFit<double> ellipse;
    Eigen::Matrix<double, kNumPoints, 1> signed_distances;
};

using RegisteredPatient = std::array<RegisteredPhase, kNumPhases>;

/// One rigid transform per patient, fixed at CP0: the CP0 centroid goes to
/// the origin, the CP0 plane normal to +z, and the CP0 major axis to +x.
struct RegistrationTransform {
    Eigen::Vector3d translation = Eigen::Vector3d::Zero(); // subtracted first
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * (p - translation); }
};

PhasePoints phase_points(const LandmarkSet& set, std::size_t phase_idx);

/// Fits plane and ellipse to one phase that is already in its final frame.
RegisteredPhase fit_phase(int phase, const PhasePoints& points);

/// Derives the CP0 registration transform. The normal sign and the major-axis
/// direction are taken from the anatomical labels (ring winding order and the
/// septal-to-free-wall direction), so the result does not depend on the pose
/// of the input.
RegistrationTransform registration_transform(const LandmarkSet& set);

/// Registers all six phases with the CP0 transform and refits each phase.
/// Geometry errors are rethrown with the offending phase in the message.
RegisteredPatient register_patient(const LandmarkSet& set);

} // namespace annulus
