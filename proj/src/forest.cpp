#include "crossgp/forest.hpp"

#include <algorithm>

#include "crossgp/error.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

namespace {

double giniImpurity(const Eigen::Vector3d& counts, double n) {
    if (n <= 0.0) return 0.0;
    return 1.0 - (counts / n).squaredNorm();
}

Eigen::Vector3d classCounts(const Eigen::VectorXi& y, const std::vector<int>& idx) {
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (int i : idx) counts[y[i]] += 1.0;
    return counts;
}

struct GiniSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity_decrease = 0.0;  // unweighted, within-node
};

class GiniTreeBuilder {
public:
    GiniTreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                    const ForestHyper& hyper, Rng& rng)
        : x_(x), y_(y), hyper_(hyper), rng_(rng),
          n_total_(static_cast<double>(x.rows())) {}

    DecisionTree build(std::vector<int> idx) {
        tree_.nodes.clear();
        grow(std::move(idx), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<int> idx, int depth) {
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        const Eigen::Vector3d counts = classCounts(y_, idx);
        const double n = static_cast<double>(idx.size());
        const double impurity = giniImpurity(counts, n);

        const bool depth_ok = hyper_.max_depth <= 0 || depth < hyper_.max_depth;
        GiniSplit split;
        if (depth_ok && impurity > 0.0 &&
            idx.size() >= 2 * static_cast<std::size_t>(hyper_.min_leaf)) {
            split = bestSplit(idx, counts, impurity);
        }

        if (!split.found) {
            tree_.nodes[static_cast<std::size_t>(node_id)].probs = counts / n;
            return node_id;
        }

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            (x_(i, split.feature) <= split.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        const int left = grow(std::move(left_idx), depth + 1);
        const int right = grow(std::move(right_idx), depth + 1);
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        node.gain = (n / n_total_) * split.impurity_decrease;
        return node_id;
    }

    GiniSplit bestSplit(const std::vector<int>& idx, const Eigen::Vector3d& counts,
                        double impurity) {
        const int d = static_cast<int>(x_.cols());
        int k = hyper_.features_per_split;
        if (k <= 0 || k > d) k = d;
        const std::vector<int> features = rng_.sampleIndices(d, k);

        GiniSplit best;
        const double n = static_cast<double>(idx.size());
        std::vector<std::pair<double, int>> vals(idx.size());
        for (int f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                vals[i] = {x_(idx[i], f), y_[idx[i]]};
            }
            std::sort(vals.begin(), vals.end());

            Eigen::Vector3d left = Eigen::Vector3d::Zero();
            Eigen::Vector3d right = counts;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left[vals[i].second] += 1.0;
                right[vals[i].second] -= 1.0;
                if (vals[i].first == vals[i + 1].first) continue;
                const double n_left = static_cast<double>(i + 1);
                const double n_right = n - n_left;
                if (n_left < hyper_.min_leaf || n_right < hyper_.min_leaf) continue;
                const double child_impurity =
                    (n_left * giniImpurity(left, n_left) + n_right * giniImpurity(right, n_right)) /
                    n;
                const double decrease = impurity - child_impurity;
                if (decrease > best.impurity_decrease + 1e-12) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    best.impurity_decrease = decrease;
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXi& y_;
    const ForestHyper& hyper_;
    Rng& rng_;
    double n_total_;
    DecisionTree tree_;
};

}  // namespace

RandomForest RandomForest::train(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                 const ForestHyper& hyper, const Normalization& norm) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw ValidationError("training matrix and labels disagree");
    }
    if (hyper.n_trees < 1) throw ValidationError("n_trees must be >= 1");

    const std::size_t n = static_cast<std::size_t>(x.rows());
    std::vector<DecisionTree> trees;
    trees.reserve(static_cast<std::size_t>(hyper.n_trees));
    for (int t = 0; t < hyper.n_trees; ++t) {
        Rng rng(splitmix64(hyper.seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(t) + 1))));
        std::vector<int> idx(n);
        if (hyper.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(rng.uniformInt(n));
        } else {
            for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        }
        GiniTreeBuilder builder(x, y, hyper, rng);
        trees.push_back(builder.build(std::move(idx)));
    }
    return RandomForest(std::move(trees), hyper, norm);
}

Eigen::Vector3d RandomForest::predictProba(const Eigen::VectorXd& features) const {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& tree : trees_) sum += tree.predictProbs(features);
    return sum / static_cast<double>(trees_.size());
}

NativeImportance RandomForest::nativeImportance() const {
    NativeImportance imp;
    imp.available = true;
    const Eigen::Index d = norm_.mean.size() > 0 ? norm_.mean.size() : kNumFeatures;
    imp.scores = Eigen::VectorXd::Zero(d);
    for (const auto& tree : trees_) tree.accumulateGains(imp.scores);
    const double sum = imp.scores.sum();
    if (sum > 0.0) {
        imp.scores /= sum;
    } else {
        imp.degenerate = true;
        imp.scores.setConstant(1.0 / static_cast<double>(d));
    }
    return imp;
}

}  // namespace crossgp
