#pragma once

#include <cstdint>
#include <vector>

#include "crossgp/classifier.hpp"
#include "crossgp/tree.hpp"

namespace crossgp {

struct ForestHyper {
    int n_trees = 100;
    int max_depth = 8;          // <= 0 means unlimited
    int min_leaf = 2;
    int features_per_split = 3; // <= 0 means all features
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

// Random forest of Gini-impurity classification trees grown on bootstrap
// resamples with a random feature subset per split. The model prediction is
// the arithmetic mean of the per-tree leaf probability vectors.
class RandomForest : public Classifier {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, ForestHyper hyper, Normalization norm)
        : trees_(std::move(trees)), hyper_(hyper), norm_(std::move(norm)) {}

    // Deterministic given hyper.seed; tree features are raw (no z-scoring).
    static RandomForest train(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                              const ForestHyper& hyper, const Normalization& norm);

    Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const override;
    NativeImportance nativeImportance() const override;
    const char* kind() const override { return "rf"; }

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestHyper& hyper() const { return hyper_; }
    const Normalization& norm() const { return norm_; }

private:
    std::vector<DecisionTree> trees_;
    ForestHyper hyper_;
    Normalization norm_;  // carried for the artifact; not applied to inputs
};

}  // namespace crossgp
