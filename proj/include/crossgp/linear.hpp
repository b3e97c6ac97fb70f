#pragma once

#include <vector>

#include "crossgp/classifier.hpp"

namespace crossgp {

struct LogisticHyper {
    double step = 0.1;
    int epochs = 2000;
    double l2 = 1e-4;
};

// Multinomial (softmax) logistic regression trained by full-batch gradient
// descent on the L2-penalized mean negative log-likelihood. Intercepts are
// not penalized. The binary sigmoid model is the two-class special case.
class LogisticRegression : public Classifier {
public:
    LogisticRegression() = default;
    LogisticRegression(Eigen::MatrixXd weights, Eigen::Vector3d intercepts, Normalization norm)
        : weights_(std::move(weights)), intercepts_(std::move(intercepts)),
          norm_(std::move(norm)) {}

    // x_raw is n x d raw features; training standardizes with `norm`.
    // Pre: at least two classes present in y. `objective_log`, when given,
    // receives the penalized mean NLL before training and after each epoch.
    static LogisticRegression train(const Eigen::MatrixXd& x_raw, const Eigen::VectorXi& y,
                                    const Normalization& norm, const LogisticHyper& hyper,
                                    std::vector<double>* objective_log = nullptr);

    // Penalized mean negative log-likelihood on standardized features.
    static double objective(const Eigen::MatrixXd& xz, const Eigen::VectorXi& y,
                            const Eigen::MatrixXd& w, const Eigen::Vector3d& b, double l2);

    // Analytic gradient of `objective`.
    static void gradient(const Eigen::MatrixXd& xz, const Eigen::VectorXi& y,
                         const Eigen::MatrixXd& w, const Eigen::Vector3d& b, double l2,
                         Eigen::MatrixXd& grad_w, Eigen::Vector3d& grad_b);

    Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const override;
    Eigen::MatrixXd predictProbaBatch(const Eigen::MatrixXd& x) const override;
    NativeImportance nativeImportance() const override;
    const char* kind() const override { return "lr"; }

    const Eigen::MatrixXd& weights() const { return weights_; }
    const Eigen::Vector3d& intercepts() const { return intercepts_; }
    const Normalization& norm() const { return norm_; }

private:
    Eigen::MatrixXd weights_;      // 3 x d
    Eigen::Vector3d intercepts_ = Eigen::Vector3d::Zero();
    Normalization norm_;
};

}  // namespace crossgp
