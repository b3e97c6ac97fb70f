#pragma once

#include <Eigen/Dense>

namespace crossgp {

// Row-wise log-sum-exp, computed through the max-shifted form.
template <typename Derived>
Eigen::VectorXd logSumExpRows(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::VectorXd mx = logits.rowwise().maxCoeff();
    return mx.array() +
           (logits.colwise() - mx).array().exp().rowwise().sum().log().matrix().array();
}

// Row-wise softmax of a logit matrix.
template <typename Derived>
Eigen::MatrixXd softmaxRows(const Eigen::MatrixBase<Derived>& logits) {
    Eigen::VectorXd mx = logits.rowwise().maxCoeff();
    Eigen::MatrixXd e = (logits.colwise() - mx).array().exp();
    return e.array().colwise() / e.rowwise().sum().array();
}

// Index of the largest coefficient; ties go to the lowest index.
template <typename Derived>
int argmaxLowest(const Eigen::MatrixBase<Derived>& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

// Per-row argmaxLowest of a matrix.
template <typename Derived>
Eigen::VectorXi argmaxRowsLowest(const Eigen::MatrixBase<Derived>& m) {
    Eigen::VectorXi out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        int best = 0;
        for (Eigen::Index j = 1; j < m.cols(); ++j) {
            if (m(i, j) > m(i, best)) best = static_cast<int>(j);
        }
        out(i) = best;
    }
    return out;
}

// (x - mean) / std, column-wise.
template <typename Derived>
Eigen::MatrixXd standardizeRows(const Eigen::MatrixBase<Derived>& x,
                                const Eigen::VectorXd& mean, const Eigen::VectorXd& std) {
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

}  // namespace crossgp
