#include <annulus/registration.hpp>

#include <annulus/error.hpp>

namespace annulus {

namespace {

// Vector area of the annulus polygon walked in ring order.
Eigen::Vector3d ring_vector_area(const PhasePoints& pts) {
    Eigen::Vector3d area = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < kNumPoints; ++k) {
        const Eigen::Vector3d p = pts.row(kRingOrder[k]).transpose();
        const Eigen::Vector3d q = pts.row(kRingOrder[(k + 1) % kNumPoints]).transpose();
        area += p.cross(q);
    }
    return 0.5 * area;
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& axis, double angle_deg) {
    Eigen::Matrix3d r;
    for (int c = 0; c < 3; ++c)
        r.col(c) = rodrigues_rotation<double>(Eigen::Vector3d::Unit(c), axis, angle_deg);
    return r;
}

std::string phase_tag(int phase) { return "CP" + std::to_string(phase) + ": "; }

} // namespace

PhasePoints phase_points(const LandmarkSet& set, std::size_t phase_idx) {
    PhasePoints pts;
    for (std::size_t i = 0; i < kNumPoints; ++i) pts.row(i) = set.points[phase_idx][i].transpose();
    return pts;
}

RegisteredPhase fit_phase(int phase, const PhasePoints& points) {
    RegisteredPhase out;
    out.phase = phase;
    out.points3d = points;
    try {
        out.plane = fit_plane(points);
        auto proj = project_to_plane(points, out.plane);
        out.signed_distances = proj.signed_distances;
        out.ellipse = fit_ellipse(proj.in_plane);
    } catch (const Error& e) {
        throw Error(e.kind(), phase_tag(phase) + e.what());
    }
    return out;
}

RegistrationTransform registration_transform(const LandmarkSet& set) {
    const PhasePoints cp0 = phase_points(set, 0);
    RegistrationTransform tf;
    try {
        const auto plane = fit_plane(cp0);
        Eigen::Vector3d normal = plane.normal;
        const double winding = ring_vector_area(cp0).dot(normal);
        if (winding < 0) normal = -normal;

        Eigen::Vector3d axis;
        double angle = 0;
        Eigen::Matrix3d tilt = Eigen::Matrix3d::Identity();
        if (rotation_to_z<double>(normal, axis, angle)) tilt = rotation_matrix(axis, angle);

        tf.translation = plane.centroid;
        tf.rotation = tilt;
        PhasePoints levelled;
        for (std::size_t i = 0; i < kNumPoints; ++i)
            levelled.row(i) = tf.apply(cp0.row(i).transpose()).transpose();

        const auto ellipse = fit_ellipse(levelled.leftCols<2>());
        double theta = ellipse.theta;
        const Eigen::Vector2d major(std::cos(deg_to_rad(theta)), std::sin(deg_to_rad(theta)));
        // The major axis is undirected; point it from the septal towards the free-wall insertions.
        const Eigen::Vector3d septal_to_free = (cp0.row(3) - cp0.row(2) + cp0.row(5) - cp0.row(4)).transpose();
        const Eigen::Vector3d levelled_dir = tilt * septal_to_free;
        if (major.dot(levelled_dir.head<2>()) < 0) theta += 180.0;

        tf.rotation = rotation_matrix(Eigen::Vector3d::UnitZ(), -theta) * tilt;
    } catch (const Error& e) {
        throw Error(e.kind(), phase_tag(0) + e.what());
    }
    return tf;
}

RegisteredPatient register_patient(const LandmarkSet& set) {
    const auto tf = registration_transform(set);
    RegisteredPatient out;
    for (std::size_t pi = 0; pi < kNumPhases; ++pi) {
        PhasePoints pts;
        for (std::size_t i = 0; i < kNumPoints; ++i)
            pts.row(i) = tf.apply(set.points[pi][i]).transpose();
        out[pi] = fit_phase(kPhases[pi], pts);
    }
    return out;
}

} // namespace annulus
