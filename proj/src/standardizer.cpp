#include <annulus/models.hpp>

#include <annulus/error.hpp>

#include <cmath>

namespace annulus {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) throw Error(ErrorKind::Input, "Standardizer::fit on empty matrix");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.mean(j)).square().mean();
        const double sd = std::sqrt(var);
        s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(j))) ? sd : 0.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size()) throw Error(ErrorKind::Input, "Standardizer: column count mismatch");
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (scale(j) == 0.0)
            out.col(j).setZero();
        else
            out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
    }
    return out;
}

} // namespace annulus
