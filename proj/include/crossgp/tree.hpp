#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crossgp/types.hpp"

namespace crossgp {

// Node of a binary decision tree, stored in a flat array with index links.
// Internal nodes route x[feature] <= threshold to `left`, else `right`.
// Leaves (feature < 0) carry either a class-probability vector
// (classification trees) or a scalar weight (boosting trees).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double gain = 0.0;  // split gain, accumulated for feature importance
    Eigen::Vector3d probs = Eigen::Vector3d::Zero();
    double weight = 0.0;

    bool isLeaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& leafFor(const Eigen::VectorXd& x) const;
    Eigen::Vector3d predictProbs(const Eigen::VectorXd& x) const { return leafFor(x).probs; }
    double predictWeight(const Eigen::VectorXd& x) const { return leafFor(x).weight; }

    int numLeaves() const;

    // Per-feature sum of node gains over internal nodes.
    void accumulateGains(Eigen::VectorXd& per_feature) const;
};

}  // namespace crossgp
