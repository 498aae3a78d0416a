#pragma once

// Plane and ellipse fitting on small landmark clouds. Everything here is
// templated on the scalar type and accepts any Eigen dense expression.

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include <annulus/error.hpp>

namespace annulus {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Points3 = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;
template <typename Scalar>
using Points2 = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) { return deg * std::numbers::pi_v<Scalar> / Scalar(180); }
template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) { return rad * Scalar(180) / std::numbers::pi_v<Scalar>; }

/// Maps an angle in degrees onto [-90, 90), the range of an undirected line.
template <typename Scalar>
Scalar wrap_half_turn(Scalar deg) {
    Scalar wrapped = deg - Scalar(180) * std::floor((deg + Scalar(90)) / Scalar(180));
    if (wrapped >= Scalar(90)) wrapped -= Scalar(180); // rounding at the upper edge
    return wrapped;
}

template <typename Scalar>
struct PlaneFit {
    Vec3<Scalar> centroid = Vec3<Scalar>::Zero();
    Vec3<Scalar> normal = Vec3<Scalar>::UnitZ(); // unit; z >= 0, then y >= 0, then x >= 0
    Scalar rms_residual = 0;
};

template <typename Scalar>
struct EllipseFit {
    Vec2<Scalar> center = Vec2<Scalar>::Zero();
    Scalar a = 0;        // semi-major
    Scalar b = 0;        // semi-minor
    Scalar theta = 0;    // major axis vs local x, degrees in [-90, 90)
    Scalar residual = 0; // RMS Sampson distance
};

template <typename Scalar>
struct PlaneProjection {
    Points2<Scalar> in_plane;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> signed_distances;
};

/// Flips `n` so that its leading non-zero component (z, then y, then x) is positive.
template <typename Scalar>
Vec3<Scalar> orient_normal(Vec3<Scalar> n) {
    constexpr Scalar tie = Scalar(1e-12);
    Scalar key = n.z();
    if (std::abs(key) <= tie) key = n.y();
    if (std::abs(key) <= tie) key = n.x();
    if (key < 0) n = -n;
    return n;
}

/// Least-squares plane through >= 3 points (rows of an N x 3 expression).
/// The normal is the right singular vector of the centred cloud with the
/// smallest singular value.
template <typename Derived>
PlaneFit<typename Derived::Scalar> fit_plane(const Eigen::MatrixBase<Derived>& points) {
    using Scalar = typename Derived::Scalar;
    if (points.cols() != 3) throw Error(ErrorKind::Input, "fit_plane expects N x 3 points");
    if (points.rows() < 3) throw Error(ErrorKind::Input, "fit_plane needs at least 3 points");
    if (!points.allFinite()) throw Error(ErrorKind::Input, "fit_plane: non-finite coordinates");

    PlaneFit<Scalar> fit;
    fit.centroid = points.colwise().mean().transpose();
    const Points3<Scalar> centred = points.rowwise() - fit.centroid.transpose();

    Eigen::JacobiSVD<Points3<Scalar>> svd(centred, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0) || sv(1) < Scalar(1e-9) * sv(0))
        throw Error(ErrorKind::Degenerate, "fit_plane: points are collinear or coincident");

    fit.normal = orient_normal<Scalar>(svd.matrixV().col(2).normalized());
    const auto distances = centred * fit.normal;
    fit.rms_residual = std::sqrt(distances.squaredNorm() / Scalar(points.rows()));
    return fit;
}

/// Rotates v about a unit axis by angle_deg (right-hand rule).
template <typename Scalar>
Vec3<Scalar> rodrigues_rotation(const Vec3<Scalar>& v, const Vec3<Scalar>& axis, Scalar angle_deg) {
    if (!axis.allFinite() || std::abs(axis.norm() - Scalar(1)) > Scalar(1e-9))
        throw Error(ErrorKind::Input, "rodrigues_rotation: axis must be a unit vector");
    const Scalar t = deg_to_rad(angle_deg);
    const Scalar c = std::cos(t);
    const Scalar s = std::sin(t);
    return v * c + axis.cross(v) * s + axis * (axis.dot(v) * (Scalar(1) - c));
}

/// Axis and angle (degrees) of the minimal rotation taking unit vector `from` onto +z.
/// Returns false when `from` is already +z (no rotation needed).
template <typename Scalar>
bool rotation_to_z(const Vec3<Scalar>& from, Vec3<Scalar>& axis, Scalar& angle_deg) {
    const Vec3<Scalar> z = Vec3<Scalar>::UnitZ();
    const Vec3<Scalar> cross = from.cross(z);
    const Scalar sin_t = cross.norm();
    const Scalar cos_t = from.dot(z);
    if (sin_t <= Scalar(1e-12)) {
        if (cos_t > 0) return false;
        axis = Vec3<Scalar>::UnitX(); // antiparallel: any perpendicular axis works
        angle_deg = Scalar(180);
        return true;
    }
    axis = cross / sin_t;
    angle_deg = rad_to_deg(std::atan2(sin_t, cos_t));
    return true;
}

/// Centres points on the plane centroid and rotates the plane normal onto +z.
/// Returns the in-plane (x, y) coordinates and the signed point-plane distances.
template <typename Derived>
PlaneProjection<typename Derived::Scalar> project_to_plane(const Eigen::MatrixBase<Derived>& points,
                                                           const PlaneFit<typename Derived::Scalar>& plane) {
    using Scalar = typename Derived::Scalar;
    if (points.cols() != 3) throw Error(ErrorKind::Input, "project_to_plane expects N x 3 points");

    const Eigen::Index n = points.rows();
    const Points3<Scalar> centred = points.rowwise() - plane.centroid.transpose();

    PlaneProjection<Scalar> out;
    out.signed_distances = centred * plane.normal;
    out.in_plane.resize(n, 2);

    const bool aligned = (plane.normal - Vec3<Scalar>::UnitZ()).norm() <= Scalar(1e-12) ||
                         (plane.normal + Vec3<Scalar>::UnitZ()).norm() <= Scalar(1e-12);
    Vec3<Scalar> axis;
    Scalar angle = 0;
    const bool rotate = !aligned && rotation_to_z(plane.normal, axis, angle);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec3<Scalar> p = centred.row(i).transpose();
        if (rotate) p = rodrigues_rotation<Scalar>(p, axis, angle);
        out.in_plane.row(i) << p.x(), p.y();
    }
    return out;
}

/// Direct least-squares ellipse fit (Fitzgibbon's ellipse-specific conic fit
/// with the Halir-Flusser block decomposition of the scatter matrix). Points
/// are centred and scaled to unit RMS radius before fitting.
template <typename Derived>
EllipseFit<typename Derived::Scalar> fit_ellipse(const Eigen::MatrixBase<Derived>& points) {
    using Scalar = typename Derived::Scalar;
    using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
    using Vec6 = Eigen::Matrix<Scalar, 6, 1>;

    if (points.cols() != 2) throw Error(ErrorKind::Input, "fit_ellipse expects N x 2 points");
    if (points.rows() < 5) throw Error(ErrorKind::Input, "fit_ellipse needs at least 5 points");
    if (!points.allFinite()) throw Error(ErrorKind::Input, "fit_ellipse: non-finite coordinates");

    const Eigen::Index n = points.rows();
    const Vec2<Scalar> mean = points.colwise().mean().transpose();
    Points2<Scalar> q = points.rowwise() - mean.transpose();
    const Scalar scale = std::sqrt(q.squaredNorm() / Scalar(n));
    if (!(scale > 0)) throw Error(ErrorKind::Degenerate, "fit_ellipse: coincident points");
    q /= scale;

    Eigen::Matrix<Scalar, Eigen::Dynamic, 3> quad(n, 3), lin(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar x = q(i, 0), y = q(i, 1);
        quad.row(i) << x * x, x * y, y * y;
        lin.row(i) << x, y, Scalar(1);
    }
    const Mat3 s1 = quad.transpose() * quad;
    const Mat3 s2 = quad.transpose() * lin;
    const Mat3 s3 = lin.transpose() * lin;

    // Collinear points leave the linear scatter block singular.
    Eigen::SelfAdjointEigenSolver<Mat3> s3_eig(s3, Eigen::EigenvaluesOnly);
    if (s3_eig.eigenvalues()(0) <= Scalar(1e-10) * s3_eig.eigenvalues()(2))
        throw Error(ErrorKind::Degenerate, "fit_ellipse: points are collinear");

    const Mat3 t = -s3.ldlt().solve(s2.transpose());
    const Mat3 m = s1 + s2 * t;
    Mat3 reduced; // inverse of the ellipse constraint matrix applied to m
    reduced.row(0) = m.row(2) / Scalar(2);
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / Scalar(2);

    Eigen::EigenSolver<Mat3> eig(reduced);
    int best = -1;
    Scalar best_value = std::numeric_limits<Scalar>::infinity();
    for (int i = 0; i < 3; ++i) {
        const auto vc = eig.eigenvectors().col(i);
        if (vc.imag().norm() > Scalar(1e-9) * vc.real().norm()) continue;
        const Vec3<Scalar> v = vc.real();
        const Scalar cond = Scalar(4) * v(0) * v(2) - v(1) * v(1);
        if (cond <= 0) continue;
        const Scalar value = std::abs(eig.eigenvalues()(i).real());
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    if (best < 0) throw Error(ErrorKind::Degenerate, "fit_ellipse: no ellipse-constrained solution");

    Vec6 conic;
    const Vec3<Scalar> quad_part = eig.eigenvectors().col(best).real();
    conic << quad_part, t * quad_part;
    const Scalar A = conic(0), B = conic(1), C = conic(2), D = conic(3), E = conic(4), F = conic(5);

    const Scalar disc = Scalar(4) * A * C - B * B;
    if (!(disc > 0)) throw Error(ErrorKind::Degenerate, "fit_ellipse: conic is not an ellipse");

    Eigen::Matrix<Scalar, 2, 2> hessian;
    hessian << Scalar(2) * A, B, B, Scalar(2) * C;
    const Vec2<Scalar> centre = hessian.inverse() * Vec2<Scalar>(-D, -E);
    const Scalar f0 = F + (D * centre.x() + E * centre.y()) / Scalar(2);

    Eigen::Matrix<Scalar, 2, 2> shape;
    shape << A, B / Scalar(2), B / Scalar(2), C;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 2, 2>> shape_eig(shape);
    const Scalar sq0 = -f0 / shape_eig.eigenvalues()(0);
    const Scalar sq1 = -f0 / shape_eig.eigenvalues()(1);
    if (!(sq0 > 0) || !(sq1 > 0) || !std::isfinite(sq0) || !std::isfinite(sq1))
        throw Error(ErrorKind::Degenerate, "fit_ellipse: imaginary ellipse");
    const int major = sq0 >= sq1 ? 0 : 1;
    const Vec2<Scalar> dir = shape_eig.eigenvectors().col(major);

    EllipseFit<Scalar> fit;
    fit.center = mean + scale * centre;
    fit.a = scale * std::sqrt(std::max(sq0, sq1));
    fit.b = scale * std::sqrt(std::min(sq0, sq1));
    fit.theta = wrap_half_turn(rad_to_deg(std::atan2(dir.y(), dir.x())));

    Scalar sum_sq = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar x = q(i, 0), y = q(i, 1);
        const Scalar value = A * x * x + B * x * y + C * y * y + D * x + E * y + F;
        const Vec2<Scalar> grad(Scalar(2) * A * x + B * y + D, B * x + Scalar(2) * C * y + E);
        const Scalar g = grad.norm();
        const Scalar dist = g > 0 ? value / g : Scalar(0);
        sum_sq += dist * dist;
    }
    fit.residual = scale * std::sqrt(sum_sq / Scalar(n));
    return fit;
}

} // namespace annulus
