#include <annulus/features.hpp>

#include <annulus/error.hpp>

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace annulus {

namespace {

std::string transition_suffix(std::size_t t) {
    return "CP" + std::to_string(kPhases[t + 1]) + "-" + std::to_string(kPhases[t]);
}

std::vector<std::string> build_names() {
    std::vector<std::string> names;
    names.reserve(kNumFeatures);
    for (int phase : kPhases)
        for (const char* base : kShapeFeatureNames)
            names.push_back(std::string(base) + "_CP" + std::to_string(phase));
    // CP0 normal is (0,0,1) for every patient after registration, so it is not a feature.
    for (std::size_t pi = 1; pi < kNumPhases; ++pi)
        for (const char* base : {"nx", "ny", "nz"})
            names.push_back(std::string(base) + "_CP" + std::to_string(kPhases[pi]));
    for (const char* base : {"delta_tilt", "delta_theta"})
        for (std::size_t t = 0; t < kNumTransitions; ++t)
            names.push_back(std::string(base) + "." + transition_suffix(t));
    for (std::size_t point = 0; point < kNumPoints; ++point)
        for (std::size_t t = 0; t < kNumTransitions; ++t)
            for (const char* base : {"u_x", "u_y", "u_z", "u_mag"})
                names.push_back(std::string(base) + "." + point_name(point) + "." + transition_suffix(t));
    return names;
}

} // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = build_names();
    return names;
}

int feature_index(const std::string& name) {
    static const auto index = [] {
        std::unordered_map<std::string, int> m;
        const auto& names = feature_names();
        for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], static_cast<int>(i));
        return m;
    }();
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
}

double ellipse_perimeter(double a, double b) {
    if (!(b > 0) || !(a >= b) || !std::isfinite(a))
        throw Error(ErrorKind::Input, "ellipse_perimeter requires a >= b > 0");
    const double r = (a - b) / (a + b);
    const double h = r * r;
    return std::numbers::pi * (a + b) * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
}

double annular_height(const Eigen::Ref<const Eigen::VectorXd>& signed_distances) {
    if (signed_distances.size() == 0) return 0.0;
    return signed_distances.maxCoeff() - signed_distances.minCoeff();
}

double tilt(const PlaneFit<double>& plane) {
    const double c = std::min(1.0, std::abs(plane.normal.z()));
    return rad_to_deg(std::acos(c));
}

double delta_theta(double theta_next, double theta_prev) {
    return wrap_half_turn(theta_next - theta_prev);
}

PhaseFeatures phase_features(const RegisteredPhase& phase) {
    PhaseFeatures f;
    f.a = phase.ellipse.a;
    f.b = phase.ellipse.b;
    f.area = std::numbers::pi * f.a * f.b;
    f.perimeter = ellipse_perimeter(f.a, f.b);
    f.ba_ratio = f.b / f.a;
    f.eccentricity = std::sqrt(std::max(0.0, 1.0 - f.ba_ratio * f.ba_ratio));
    f.height = annular_height(phase.signed_distances);
    f.normal = phase.plane.normal;
    return f;
}

DisplacementTable displacements(const RegisteredPatient& phases) {
    DisplacementTable table;
    for (std::size_t point = 0; point < kNumPoints; ++point)
        for (std::size_t t = 0; t < kNumTransitions; ++t) {
            const Eigen::Vector3d d =
                (phases[t + 1].points3d.row(point) - phases[t].points3d.row(point)).transpose();
            table[point][t] = {d.x(), d.y(), d.z(), d.norm()};
        }
    return table;
}

FeatureVector extract_features(const RegisteredPatient& phases) {
    const auto& names = feature_names();
    FeatureVector fv;
    fv.values.reserve(kNumFeatures);

    std::array<PhaseFeatures, kNumPhases> per_phase;
    for (std::size_t pi = 0; pi < kNumPhases; ++pi) {
        per_phase[pi] = phase_features(phases[pi]);
        const auto& f = per_phase[pi];
        for (double v : {f.area, f.perimeter, f.a, f.b, f.eccentricity, f.ba_ratio, f.height})
            fv.values.push_back(v);
    }
    for (std::size_t pi = 1; pi < kNumPhases; ++pi)
        for (int c = 0; c < 3; ++c) fv.values.push_back(per_phase[pi].normal[c]);
    for (std::size_t t = 0; t < kNumTransitions; ++t)
        fv.values.push_back(tilt(phases[t + 1].plane) - tilt(phases[t].plane));
    for (std::size_t t = 0; t < kNumTransitions; ++t)
        fv.values.push_back(delta_theta(phases[t + 1].ellipse.theta, phases[t].ellipse.theta));
    const auto disp = displacements(phases);
    for (std::size_t point = 0; point < kNumPoints; ++point)
        for (std::size_t t = 0; t < kNumTransitions; ++t) {
            const auto& d = disp[point][t];
            for (double v : {d.ux, d.uy, d.uz, d.umag}) fv.values.push_back(v);
        }

    for (std::size_t i = 0; i < fv.values.size(); ++i)
        if (!std::isfinite(fv.values[i]))
            throw Error(ErrorKind::Numerical, "non-finite value for feature " + names[i]);
    return fv;
}

FeatureVector extract_features(const LandmarkSet& set) {
    auto fv = extract_features(register_patient(set));
    fv.patient_id = set.patient_id;
    fv.label = set.label;
    return fv;
}

} // namespace annulus
