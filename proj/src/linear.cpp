#include "crossgp/linear.hpp"

#include <set>

#include "crossgp/error.hpp"
#include "crossgp/math.hpp"

namespace crossgp {

double LogisticRegression::objective(const Eigen::MatrixXd& xz, const Eigen::VectorXi& y,
                                     const Eigen::MatrixXd& w, const Eigen::Vector3d& b,
                                     double l2) {
    const Eigen::Index n = xz.rows();
    Eigen::MatrixXd logits = xz * w.transpose();
    logits.rowwise() += b.transpose();
    const Eigen::VectorXd lse = logSumExpRows(logits);
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        nll += lse[i] - logits(i, y[i]);
    }
    return nll / static_cast<double>(n) + 0.5 * l2 * w.squaredNorm();
}

void LogisticRegression::gradient(const Eigen::MatrixXd& xz, const Eigen::VectorXi& y,
                                  const Eigen::MatrixXd& w, const Eigen::Vector3d& b, double l2,
                                  Eigen::MatrixXd& grad_w, Eigen::Vector3d& grad_b) {
    const Eigen::Index n = xz.rows();
    Eigen::MatrixXd logits = xz * w.transpose();
    logits.rowwise() += b.transpose();
    Eigen::MatrixXd residual = softmaxRows(logits);  // n x 3
    for (Eigen::Index i = 0; i < n; ++i) residual(i, y[i]) -= 1.0;
    residual /= static_cast<double>(n);
    grad_w.noalias() = residual.transpose() * xz;
    grad_w += l2 * w;
    grad_b = residual.colwise().sum();
}

LogisticRegression LogisticRegression::train(const Eigen::MatrixXd& x_raw,
                                             const Eigen::VectorXi& y,
                                             const Normalization& norm,
                                             const LogisticHyper& hyper,
                                             std::vector<double>* objective_log) {
    if (x_raw.rows() != y.size() || x_raw.rows() == 0) {
        throw ValidationError("training matrix and labels disagree");
    }
    std::set<int> classes(y.begin(), y.end());
    if (classes.size() < 2) {
        throw ValidationError("logistic regression needs at least 2 classes in train");
    }

    const Eigen::MatrixXd xz = standardizeRows(x_raw, norm.mean, norm.std);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumClasses, xz.cols());
    Eigen::Vector3d b = Eigen::Vector3d::Zero();

    if (objective_log) objective_log->push_back(objective(xz, y, w, b, hyper.l2));

    Eigen::MatrixXd grad_w(kNumClasses, xz.cols());
    Eigen::Vector3d grad_b;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        gradient(xz, y, w, b, hyper.l2, grad_w, grad_b);
        w -= hyper.step * grad_w;
        b -= hyper.step * grad_b;
        if (!w.allFinite() || !b.allFinite()) {
            throw ValidationError("logistic regression diverged at epoch " +
                                  std::to_string(epoch));
        }
        if (objective_log) objective_log->push_back(objective(xz, y, w, b, hyper.l2));
    }
    return LogisticRegression(std::move(w), std::move(b), norm);
}

Eigen::Vector3d LogisticRegression::predictProba(const Eigen::VectorXd& features) const {
    const Eigen::VectorXd xz = standardizeVec(features, norm_);
    Eigen::Vector3d logits = weights_ * xz + intercepts_;
    return softmaxRows(logits.transpose()).transpose();
}

Eigen::MatrixXd LogisticRegression::predictProbaBatch(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd logits = standardizeRows(x, norm_.mean, norm_.std) * weights_.transpose();
    logits.rowwise() += intercepts_.transpose();
    return softmaxRows(logits);
}

NativeImportance LogisticRegression::nativeImportance() const {
    NativeImportance imp;
    imp.available = true;
    imp.scores = weights_.cwiseAbs().colwise().mean();
    const double sum = imp.scores.sum();
    if (sum > 0.0) {
        imp.scores /= sum;
    } else {
        imp.degenerate = true;
        imp.scores.setConstant(1.0 / static_cast<double>(imp.scores.size()));
    }
    return imp;
}

}  // namespace crossgp
