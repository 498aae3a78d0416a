#include <annulus/models.hpp>

#include <annulus/error.hpp>

#include <Eigen/Cholesky>
#include <cmath>

namespace annulus {

double LdaModel::decision(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return coefficients.dot(x) + intercept;
}

LdaModel lda_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
    const Eigen::Index n = x.rows(), k = x.cols();
    if (y.size() != n) throw Error(ErrorKind::Input, "lda_fit: label count mismatch");
    if (k < 1) throw Error(ErrorKind::Input, "lda_fit: no features");
    const Eigen::Index n1 = (y.array() == 1).count();
    const Eigen::Index n0 = (y.array() == 0).count();
    if (n0 + n1 != n) throw Error(ErrorKind::Input, "lda_fit: labels must be 0 or 1");
    if (n0 < 2 || n1 < 2) throw Error(ErrorKind::Data, "lda_fit: each class needs at least 2 samples");

    LdaModel m;
    m.class_means = Eigen::MatrixXd::Zero(2, k);
    for (Eigen::Index i = 0; i < n; ++i) m.class_means.row(y(i)) += x.row(i);
    m.class_means.row(0) /= static_cast<double>(n0);
    m.class_means.row(1) /= static_cast<double>(n1);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = x.row(i) - m.class_means.row(y(i));
        cov.noalias() += d.transpose() * d;
    }
    cov /= static_cast<double>(n - 2);
    const double lambda = 1e-6 * cov.trace() / static_cast<double>(k);
    cov.diagonal().array() += lambda;
    m.pooled_covariance = cov;

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || !(lambda > 0))
        throw Error(ErrorKind::Numerical, "lda_fit: pooled covariance is singular");

    m.priors << static_cast<double>(n0) / n, static_cast<double>(n1) / n;
    const Eigen::VectorXd diff = (m.class_means.row(1) - m.class_means.row(0)).transpose();
    m.coefficients = llt.solve(diff);
    const Eigen::VectorXd mid = 0.5 * (m.class_means.row(1) + m.class_means.row(0)).transpose();
    m.intercept = -m.coefficients.dot(mid) + std::log(m.priors(1) / m.priors(0));
    if (!m.coefficients.allFinite() || !std::isfinite(m.intercept))
        throw Error(ErrorKind::Numerical, "lda_fit: non-finite discriminant");
    return m;
}

Prediction lda_predict(const LdaModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.coefficients.size()) throw Error(ErrorKind::Input, "lda_predict: dimension mismatch");
    Prediction p;
    p.labels.resize(x.rows());
    p.scores.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double g = model.decision(x.row(i).transpose());
        p.scores(i) = 1.0 / (1.0 + std::exp(-g));
        p.labels(i) = p.scores(i) > 0.5 ? 1 : 0;
    }
    return p;
}

} // namespace annulus
