#pragma once

#include <array>
#include <string>
#include <vector>

#include <annulus/landmarks.hpp>
#include <annulus/registration.hpp>

namespace annulus {

inline constexpr std::size_t kNumFeatures = 187;

/// Per-phase scalar shape features, in canonical order.
inline constexpr std::array<const char*, 7> kShapeFeatureNames = {
    "area", "perimeter", "a", "b", "eccentricity", "ba_ratio", "height"};

struct PhaseFeatures {
    double area = 0;         // mm^2
    double perimeter = 0;    // mm
    double a = 0;            // mm
    double b = 0;            // mm
    double eccentricity = 0;
    double ba_ratio = 0;
    double height = 0;       // mm
    Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

struct Displacement {
    double ux = 0, uy = 0, uz = 0, umag = 0;
};

/// [point][transition]; transition t runs from kPhases[t] to kPhases[t + 1].
using DisplacementTable = std::array<std::array<Displacement, kNumTransitions>, kNumPoints>;

struct FeatureVector {
    std::string patient_id;
    ClassLabel label = ClassLabel::NoMR;
    std::vector<double> values; // canonical order, size kNumFeatures
};

/// The frozen list of 187 feature names, in canonical order:
///   7 shape features x 6 phases      "<base>_CP<p>"
///   normal nx, ny, nz x CP5..CP25     "<n?>_CP<p>"
///   delta_tilt, delta_theta x 5       "<base>.CP<p2>-<p1>"
///   u_x, u_y, u_z, u_mag x 6 points x 5 transitions  "<base>.P<k>.CP<p2>-<p1>"
const std::vector<std::string>& feature_names();

/// Position of `name` in the canonical list, or -1.
int feature_index(const std::string& name);

/// Ramanujan's second approximation of the ellipse circumference.
double ellipse_perimeter(double a, double b);

/// max - min of the signed point-to-plane distances.
double annular_height(const Eigen::Ref<const Eigen::VectorXd>& signed_distances);

/// Angle between the plane and the horizontal (xy) plane, degrees in [0, 90].
double tilt(const PlaneFit<double>& plane);

/// Difference of two undirected axis angles, wrapped into [-90, 90).
double delta_theta(double theta_next, double theta_prev);

PhaseFeatures phase_features(const RegisteredPhase& phase);

DisplacementTable displacements(const RegisteredPatient& phases);

FeatureVector extract_features(const RegisteredPatient& phases);

/// ingest -> registration -> features for one patient.
FeatureVector extract_features(const LandmarkSet& set);

} // namespace annulus
