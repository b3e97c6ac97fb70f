#include "crossgp/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "crossgp/error.hpp"
#include "crossgp/math.hpp"

namespace crossgp {

namespace {

double leafWeight(double g, double h, double lambda) {
    const double denom = h + lambda;
    if (denom < 1e-12) return 0.0;
    return -g / denom;
}

double scoreTerm(double g, double h, double lambda) {
    const double denom = h + lambda;
    if (denom < 1e-12) return 0.0;
    return g * g / denom;
}

struct GradSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class GradTreeBuilder {
public:
    GradTreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
                    const Eigen::VectorXd& hess, const GbtHyper& hyper)
        : x_(x), grad_(grad), hess_(hess), hyper_(hyper) {}

    DecisionTree build() {
        tree_.nodes.clear();
        std::vector<int> idx(static_cast<std::size_t>(x_.rows()));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        grow(std::move(idx), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<int> idx, int depth) {
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        double g_sum = 0.0, h_sum = 0.0;
        for (int i : idx) {
            g_sum += grad_[i];
            h_sum += hess_[i];
        }

        GradSplit split;
        if (depth < hyper_.max_depth && idx.size() >= 2) {
            split = bestSplit(idx, g_sum, h_sum);
        }

        if (!split.found) {
            tree_.nodes[static_cast<std::size_t>(node_id)].weight =
                hyper_.eta * leafWeight(g_sum, h_sum, hyper_.lambda);
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
        node.gain = split.gain;
        return node_id;
    }

    GradSplit bestSplit(const std::vector<int>& idx, double g_sum, double h_sum) {
        GradSplit best;
        const double parent_score = scoreTerm(g_sum, h_sum, hyper_.lambda);
        std::vector<std::pair<double, int>> vals(idx.size());
        for (int f = 0; f < static_cast<int>(x_.cols()); ++f) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                vals[i] = {x_(idx[i], f), idx[i]};
            }
            std::sort(vals.begin(), vals.end());

            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                gl += grad_[vals[i].second];
                hl += hess_[vals[i].second];
                if (vals[i].first == vals[i + 1].first) continue;
                const double gain =
                    0.5 * (scoreTerm(gl, hl, hyper_.lambda) +
                           scoreTerm(g_sum - gl, h_sum - hl, hyper_.lambda) - parent_score);
                if (gain > hyper_.gamma && gain > best.gain + 1e-12) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& grad_;
    const Eigen::VectorXd& hess_;
    const GbtHyper& hyper_;
    DecisionTree tree_;
};

double regularization(const DecisionTree& tree, double gamma, double lambda) {
    double leaf_sq = 0.0;
    int leaves = 0;
    for (const auto& n : tree.nodes) {
        if (n.isLeaf()) {
            leaf_sq += n.weight * n.weight;
            ++leaves;
        }
    }
    return gamma * leaves + 0.5 * lambda * leaf_sq;
}

double sumCrossEntropy(const Eigen::MatrixXd& margins, const Eigen::VectorXi& y) {
    const Eigen::VectorXd lse = logSumExpRows(margins);
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        total += lse[i] - margins(i, y[i]);
    }
    return total;
}

}  // namespace

GradientBoostedTrees GradientBoostedTrees::train(const Eigen::MatrixXd& x,
                                                 const Eigen::VectorXi& y,
                                                 const GbtHyper& hyper,
                                                 const Normalization& norm,
                                                 std::vector<double>* objective_log) {
    const Eigen::Index n = x.rows();
    if (n == 0 || n != y.size()) throw ValidationError("training matrix and labels disagree");
    if (hyper.rounds < 1) throw ValidationError("rounds must be >= 1");
    if (!(hyper.eta >= 0.0 && hyper.eta <= 1.0)) throw ValidationError("eta must be in [0,1]");
    if (hyper.lambda < 0.0 || hyper.gamma < 0.0) {
        throw ValidationError("lambda and gamma must be >= 0");
    }

    // Laplace-smoothed log class priors.
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) counts[y[i]] += 1.0;
    Eigen::Vector3d base =
        ((counts.array() + 1.0) / static_cast<double>(n + kNumClasses)).log();

    Eigen::MatrixXd margins = base.transpose().replicate(n, 1);

    double omega_total = 0.0;
    if (objective_log) objective_log->push_back(sumCrossEntropy(margins, y));

    std::vector<Round> rounds;
    rounds.reserve(static_cast<std::size_t>(hyper.rounds));
    Eigen::VectorXd grad(n), hess(n);
    for (int r = 0; r < hyper.rounds; ++r) {
        const Eigen::MatrixXd p = softmaxRows(margins);
        Round round;
        for (int k = 0; k < kNumClasses; ++k) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double pik = p(i, k);
                grad[i] = pik - (y[i] == k ? 1.0 : 0.0);
                hess[i] = pik * (1.0 - pik);
            }
            GradTreeBuilder builder(x, grad, hess, hyper);
            round[static_cast<std::size_t>(k)] = builder.build();
        }
        for (int k = 0; k < kNumClasses; ++k) {
            const auto& tree = round[static_cast<std::size_t>(k)];
            for (Eigen::Index i = 0; i < n; ++i) {
                margins(i, k) += tree.predictWeight(x.row(i).transpose());
            }
            omega_total += regularization(tree, hyper.gamma, hyper.lambda);
        }
        if (!margins.allFinite()) {
            throw ValidationError("boosting diverged at round " + std::to_string(r));
        }
        if (objective_log) objective_log->push_back(sumCrossEntropy(margins, y) + omega_total);
        rounds.push_back(std::move(round));
    }
    return GradientBoostedTrees(std::move(base), std::move(rounds), hyper, norm);
}

Eigen::Vector3d GradientBoostedTrees::margins(const Eigen::VectorXd& features) const {
    Eigen::Vector3d m = base_score_;
    for (const auto& round : rounds_) {
        for (int k = 0; k < kNumClasses; ++k) {
            m[k] += round[static_cast<std::size_t>(k)].predictWeight(features);
        }
    }
    return m;
}

Eigen::Vector3d GradientBoostedTrees::predictProba(const Eigen::VectorXd& features) const {
    const Eigen::Vector3d m = margins(features);
    return softmaxRows(m.transpose()).transpose();
}

NativeImportance GradientBoostedTrees::nativeImportance() const {
    NativeImportance imp;
    imp.available = true;
    const Eigen::Index d = norm_.mean.size() > 0 ? norm_.mean.size() : kNumFeatures;
    imp.scores = Eigen::VectorXd::Zero(d);
    for (const auto& round : rounds_) {
        for (const auto& tree : round) tree.accumulateGains(imp.scores);
    }
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
