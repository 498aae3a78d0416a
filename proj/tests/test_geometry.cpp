#include <doctest.h>

#include <annulus/error.hpp>
#include <annulus/features.hpp>
#include <annulus/geometry.hpp>
#include <annulus/registration.hpp>

#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <numbers>

using namespace annulus;

namespace {

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    return Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
}

// Normal of the covariance matrix's smallest eigenvalue; an oracle independent of the SVD path.
Eigen::Vector3d covariance_normal(const Eigen::MatrixX3d& pts) {
    const Eigen::RowVector3d mean = pts.colwise().mean();
    const Eigen::MatrixX3d c = pts.rowwise() - mean;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c.transpose() * c);
    return es.eigenvectors().col(0);
}

double axis_angle_difference(double a, double b) {
    double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("plane normal agrees with the covariance eigenvector") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0, 1);
    for (int t = 0; t < 200; ++t) {
        Eigen::MatrixX3d pts(6 + t % 10, 3);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) << 20 * g(rng), 10 * g(rng), 2 * g(rng);
        const auto fit = fit_plane(pts);
        const Eigen::Vector3d oracle = covariance_normal(pts);
        CHECK(std::abs(std::abs(fit.normal.dot(oracle)) - 1.0) < 1e-10);
        CHECK(std::abs(fit.normal.norm() - 1.0) < 1e-12);
        CHECK(fit.normal.z() >= 0);
    }
}

TEST_CASE("plane normal within 1e-3 of truth under 0.01 mm jitter") {
    // six ring points on x+y+z=1, each pushed off the plane by up to 0.01 mm
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> jitter(-0.01, 0.01), radius(15, 25), phase(0, 2 * std::numbers::pi),
        offset(-30, 30);
    const Eigen::Vector3d n = Eigen::Vector3d::Ones().normalized();
    const Eigen::Vector3d e1 = n.unitOrthogonal(), e2 = n.cross(e1);
    for (int t = 0; t < 500; ++t) {
        const Eigen::Vector3d c = n / std::sqrt(3.0) + offset(rng) * e1 + offset(rng) * e2;
        const double r = radius(rng), p0 = phase(rng);
        Eigen::MatrixX3d pts(6, 3);
        for (int i = 0; i < 6; ++i) {
            const double p = p0 + i * std::numbers::pi / 3;
            pts.row(i) = (c + r * std::cos(p) * e1 + r * std::sin(p) * e2 + jitter(rng) * n).transpose();
        }
        for (int i = 0; i < 6; ++i) CHECK(std::abs(pts.row(i).sum() - 1.0) <= 0.01 * std::sqrt(3.0) + 1e-9);
        const auto fit = fit_plane(pts);
        CHECK((fit.normal - n).norm() < 1e-3);
        CHECK(std::abs(std::abs(fit.normal.dot(covariance_normal(pts))) - 1.0) < 1e-10);
    }
}

TEST_CASE("orient_normal sign convention") {
    CHECK(orient_normal<double>(Eigen::Vector3d(0, 0, -1)) == Eigen::Vector3d(0, 0, 1));
    CHECK(orient_normal<double>(Eigen::Vector3d(1, -1, 0)) == Eigen::Vector3d(-1, 1, 0));
    CHECK(orient_normal<double>(Eigen::Vector3d(-1, 0, 0)) == Eigen::Vector3d(1, 0, 0));
}

TEST_CASE("collinear points are degenerate") {
    Eigen::MatrixX3d pts(5, 3);
    for (int i = 0; i < 5; ++i) pts.row(i) << i, 2 * i, -i;
    try {
        fit_plane(pts);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
}

TEST_CASE("Rodrigues rotation matches the axis-angle matrix oracle") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ang(-360, 360);
    std::normal_distribution<double> g(0, 10);
    for (int t = 0; t < 1000; ++t) {
        const Eigen::Vector3d k = random_unit(rng), v(g(rng), g(rng), g(rng));
        const double deg = ang(rng);
        const Eigen::Matrix3d r = Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, k).toRotationMatrix();
        CHECK((rodrigues_rotation<double>(v, k, deg) - r * v).norm() <= 1e-12 * std::max(1.0, v.norm()));
    }
    CHECK_THROWS_AS(rodrigues_rotation<double>(Eigen::Vector3d::UnitX(), Eigen::Vector3d(0, 0, 2), 10.0), Error);
}

TEST_CASE("rotation_to_z sends the vector to +z, including the antiparallel case") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Vector3d v = random_unit(rng);
        Eigen::Vector3d axis;
        double angle = 0;
        REQUIRE(rotation_to_z<double>(v, axis, angle));
        CHECK((rodrigues_rotation<double>(v, axis, angle) - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
    }
    Eigen::Vector3d axis;
    double angle = 0;
    CHECK_FALSE(rotation_to_z<double>(Eigen::Vector3d::UnitZ(), axis, angle));
    REQUIRE(rotation_to_z<double>(-Eigen::Vector3d::UnitZ(), axis, angle));
    CHECK((rodrigues_rotation<double>(-Eigen::Vector3d::UnitZ(), axis, angle) - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
}

TEST_CASE("projection preserves in-plane distances and reports offsets") {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> g(0, 5);
    Eigen::MatrixX3d pts(6, 3);
    for (int i = 0; i < 6; ++i) pts.row(i) << 4 * g(rng), 3 * g(rng), 0.3 * g(rng);
    const Eigen::Matrix3d r = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    pts = (pts * r.transpose()).eval();
    const auto plane = fit_plane(pts);
    const auto proj = project_to_plane(pts, plane);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const Eigen::Vector3d d = (pts.row(i) - pts.row(j)).transpose();
            const double in_plane = (d - d.dot(plane.normal) * plane.normal).norm();
            CHECK(std::abs((proj.in_plane.row(i) - proj.in_plane.row(j)).norm() - in_plane) < 1e-10);
        }
    CHECK(std::abs(proj.signed_distances.sum()) < 1e-10);
}

TEST_CASE("exact ellipse recovery for a/b in [1, 3]") {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> ratio(1.0, 3.0), th(-90, 90), ctr(-30, 30), size(5, 40), phi(0, 360);
    for (int t = 0; t < 500; ++t) {
        const double a = size(rng), b = a / ratio(rng), theta = th(rng);
        const Eigen::Vector2d c(ctr(rng), ctr(rng));
        Eigen::MatrixX2d pts(6, 2);
        const double ct = std::cos(theta * std::numbers::pi / 180), st = std::sin(theta * std::numbers::pi / 180);
        for (int i = 0; i < 6; ++i) {
            const double p = (phi(rng) / 6 + 60.0 * i) * std::numbers::pi / 180; // spread round the ring
            const double x = a * std::cos(p), y = b * std::sin(p);
            pts.row(i) << c.x() + ct * x - st * y, c.y() + st * x + ct * y;
        }
        const auto fit = fit_ellipse(pts);
        CHECK(std::abs(fit.a - a) <= 1e-6 * a);
        CHECK(std::abs(fit.b - b) <= 1e-6 * b);
        CHECK((fit.center - c).norm() <= 1e-6 * a);
        if (a / b > 1.001) CHECK(axis_angle_difference(fit.theta, theta) < 1e-4);
        CHECK(fit.theta >= -90.0);
        CHECK(fit.theta < 90.0);
        CHECK(fit.residual < 1e-6);
    }
}

TEST_CASE("ellipse fit works for float scalars and rejects a line") {
    Eigen::Matrix<float, 6, 2> pts;
    for (int i = 0; i < 6; ++i) {
        const float p = static_cast<float>(i) * 1.0471976f;
        pts.row(i) << 3.0f * std::cos(p), 2.0f * std::sin(p);
    }
    const auto fit = fit_ellipse(pts);
    CHECK(fit.a == doctest::Approx(3.0f).epsilon(1e-4));
    CHECK(fit.b == doctest::Approx(2.0f).epsilon(1e-4));

    Eigen::MatrixX2d line(6, 2);
    for (int i = 0; i < 6; ++i) line.row(i) << i, 0.5 * i;
    try {
        fit_ellipse(line);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
}

TEST_CASE("registration: CP0 is levelled, centred and major-axis aligned") {
    const auto set = testing::cohort(1, 0.0, 21).landmarks[0];
    const auto reg = register_patient(set);
    const auto& cp0 = reg[0];
    CHECK(cp0.plane.centroid.norm() < 1e-9);
    CHECK((cp0.plane.normal - Eigen::Vector3d::UnitZ()).norm() < 1e-9);
    CHECK(std::abs(cp0.ellipse.theta) < 1e-6);
    // Free-wall insertions lie on the +x side.
    CHECK(cp0.points3d(3, 0) + cp0.points3d(5, 0) > cp0.points3d(2, 0) + cp0.points3d(4, 0));
}

TEST_CASE("features are invariant to a global rigid motion of the landmarks") {
    std::mt19937_64 rng(22);
    const auto sets = testing::cohort(5, 1.0, 22).landmarks;
    for (const auto& set : sets) {
        const Eigen::Matrix3d r = Eigen::Quaterniond(Eigen::Vector4d::Random().normalized()).toRotationMatrix();
        const Eigen::Vector3d t = 100 * Eigen::Vector3d::Random();
        LandmarkSet moved = set;
        for (auto& phase : moved.points)
            for (auto& p : phase) p = r * p + t;
        const auto a = extract_features(set).values, b = extract_features(moved).values;
        for (std::size_t j = 0; j < a.size(); ++j)
            CHECK_MESSAGE(std::abs(a[j] - b[j]) < 1e-7 * std::max(1.0, std::abs(a[j])), feature_names()[j]);
    }
}

}
