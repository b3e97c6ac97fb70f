#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "crossgp/classifier.hpp"
#include "crossgp/tree.hpp"

namespace crossgp {

struct GbtHyper {
    int rounds = 100;     // K
    double eta = 0.1;     // shrinkage applied to leaf weights
    double lambda = 1.0;  // L2 penalty on leaf weights
    double gamma = 0.0;   // per-leaf penalty; a split must gain more than this
    int max_depth = 4;
    std::uint64_t seed = 0;  // reserved; exact greedy training uses no randomness
};

// Second-order gradient boosting with softmax cross-entropy loss. Each round
// fits one regression tree per class to the gradient/Hessian of the current
// margins; exact greedy splits use the gain
//   0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda))
// accepted when it exceeds gamma, and leaf weight -G/(H+lambda). Leaf
// weights are stored pre-scaled by eta.
class GradientBoostedTrees : public Classifier {
public:
    using Round = std::array<DecisionTree, kNumClasses>;

    GradientBoostedTrees() = default;
    GradientBoostedTrees(Eigen::Vector3d base_score, std::vector<Round> rounds, GbtHyper hyper,
                         Normalization norm)
        : base_score_(std::move(base_score)), rounds_(std::move(rounds)), hyper_(hyper),
          norm_(std::move(norm)) {}

    // `objective_log`, when given, receives the regularized objective
    // (summed cross-entropy plus gamma*T + 0.5*lambda*|w|^2 over all stored
    // trees) before boosting and after each round.
    static GradientBoostedTrees train(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                      const GbtHyper& hyper, const Normalization& norm,
                                      std::vector<double>* objective_log = nullptr);

    Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const override;
    NativeImportance nativeImportance() const override;
    const char* kind() const override { return "gbt"; }

    Eigen::Vector3d margins(const Eigen::VectorXd& features) const;

    const Eigen::Vector3d& baseScore() const { return base_score_; }
    const std::vector<Round>& rounds() const { return rounds_; }
    const GbtHyper& hyper() const { return hyper_; }
    const Normalization& norm() const { return norm_; }

private:
    Eigen::Vector3d base_score_ = Eigen::Vector3d::Zero();
    std::vector<Round> rounds_;
    GbtHyper hyper_;
    Normalization norm_;  // carried for the artifact; not applied to inputs
};

}  // namespace crossgp
