#include "crossgp/tree.hpp"

namespace crossgp {

const TreeNode& DecisionTree::leafFor(const Eigen::VectorXd& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].isLeaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)];
}

int DecisionTree::numLeaves() const {
    int count = 0;
    for (const auto& n : nodes) {
        if (n.isLeaf()) ++count;
    }
    return count;
}

void DecisionTree::accumulateGains(Eigen::VectorXd& per_feature) const {
    for (const auto& n : nodes) {
        if (!n.isLeaf()) per_feature[n.feature] += n.gain;
    }
}

}  // namespace crossgp
