#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "crossgp/error.hpp"
#include "crossgp/forest.hpp"
#include "crossgp/gbt.hpp"
#include "crossgp/math.hpp"
#include "crossgp/rng.hpp"
#include "test_helpers.hpp"

using namespace crossgp;
using crossgp::testing::identityNorm;

namespace {

DecisionTree leafTree(const Eigen::Vector3d& probs) {
    DecisionTree t;
    t.nodes.emplace_back();
    t.nodes[0].probs = probs;
    return t;
}

// Depth of the deepest node, root at depth 0.
int treeDepth(const DecisionTree& tree) {
    std::function<int(int)> depth = [&](int id) -> int {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
        if (n.isLeaf()) return 0;
        return 1 + std::max(depth(n.left), depth(n.right));
    };
    return depth(0);
}

// Rows of x routed to each leaf, keyed by node index.
std::vector<int> leafCounts(const DecisionTree& tree, const Eigen::MatrixXd& x) {
    std::vector<int> counts(tree.nodes.size(), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int id = 0;
        while (!tree.nodes[static_cast<std::size_t>(id)].isLeaf()) {
            const TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
            id = x(i, n.feature) <= n.threshold ? n.left : n.right;
        }
        ++counts[static_cast<std::size_t>(id)];
    }
    return counts;
}

void randomData(int n, int d, Eigen::MatrixXd& x, Eigen::VectorXi& y, Rng& rng,
                int classes = 3) {
    x.resize(n, d);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal(0.0, 1.0);
        y[i] = static_cast<int>(rng.uniformInt(static_cast<std::uint64_t>(classes)));
    }
}

}  // namespace

TEST_CASE("a single unrestricted tree memorizes distinct rows") {
    Rng rng(3);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(30, 4, x, y, rng);

    ForestHyper hyper;
    hyper.n_trees = 1;
    hyper.max_depth = 0;          // unlimited
    hyper.min_leaf = 1;
    hyper.features_per_split = 0; // all features
    hyper.bootstrap = false;
    auto forest = RandomForest::train(x, y, hyper, identityNorm(4));
    REQUIRE(forest.trees().size() == 1);

    for (int i = 0; i < 30; ++i) {
        Eigen::Vector3d p = forest.predictProba(x.row(i).transpose());
        CHECK(p[y[i]] == 1.0);
    }
}

TEST_CASE("a single-class forest is certain everywhere") {
    Rng rng(5);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(20, 3, x, y, rng, 1);  // labels all 0

    ForestHyper hyper;
    hyper.n_trees = 5;
    auto forest = RandomForest::train(x, y, hyper, identityNorm(3));
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::Vector3d probe;
        probe << rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3);
        Eigen::Vector3d p = forest.predictProba(probe);
        CHECK(p[0] == 1.0);
        CHECK(p[1] == 0.0);
        CHECK(p[2] == 0.0);
    }

    auto imp = forest.nativeImportance();
    CHECK(imp.degenerate);
    for (int j = 0; j < 3; ++j) CHECK(imp.scores[j] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("the vote is the arithmetic mean of leaf distributions") {
    std::vector<DecisionTree> trees = {leafTree({1, 0, 0}), leafTree({1, 0, 0}),
                                       leafTree({0, 1, 0})};
    RandomForest forest(std::move(trees), ForestHyper{}, identityNorm(7));
    Eigen::Vector3d p = forest.predictProba(Eigen::VectorXd::Zero(7));
    CHECK(p[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(p[2] == 0.0);
    CHECK(forest.predict(Eigen::VectorXd::Zero(7)) == GlycemicClass::Good);

    RandomForest tie({leafTree({1, 0, 0}), leafTree({0, 0, 1})}, ForestHyper{}, identityNorm(7));
    Eigen::Vector3d q = tie.predictProba(Eigen::VectorXd::Zero(7));
    CHECK(q[0] == 0.5);
    CHECK(q[1] == 0.0);
    CHECK(q[2] == 0.5);
    CHECK(tie.predict(Eigen::VectorXd::Zero(7)) == GlycemicClass::Good);  // tie resolves low
}

TEST_CASE("a hand-checkable stump") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;

    ForestHyper hyper;
    hyper.n_trees = 1;
    hyper.max_depth = 1;
    hyper.min_leaf = 1;
    hyper.features_per_split = 0;
    hyper.bootstrap = false;
    auto forest = RandomForest::train(x, y, hyper, identityNorm(1));
    const DecisionTree& tree = forest.trees()[0];
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == doctest::Approx(1.5));
    // Root gain: impurity 0.5 falls to 0 on both sides, weighted by n/n = 1.
    CHECK(tree.nodes[0].gain == doctest::Approx(0.5).epsilon(1e-12));

    Eigen::VectorXd lo(1), hi(1);
    lo << 1.0;
    hi << 2.0;
    CHECK(forest.predictProba(lo)[0] == 1.0);
    CHECK(forest.predictProba(hi)[1] == 1.0);
}

TEST_CASE("depth and leaf-size limits hold on every tree") {
    Rng rng(7);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(200, 5, x, y, rng);

    ForestHyper hyper;
    hyper.n_trees = 12;
    hyper.max_depth = 3;
    hyper.min_leaf = 5;
    hyper.bootstrap = false;  // leaf counts then refer to the actual rows
    auto forest = RandomForest::train(x, y, hyper, identityNorm(5));
    for (const auto& tree : forest.trees()) {
        CHECK(treeDepth(tree) <= 3);
        auto counts = leafCounts(tree, x);
        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            if (tree.nodes[id].isLeaf()) CHECK(counts[id] >= 5);
            // Every leaf distribution is a probability vector.
            if (tree.nodes[id].isLeaf()) {
                CHECK(tree.nodes[id].probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("forests are reproducible by seed") {
    Rng rng(11);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(100, 4, x, y, rng);

    ForestHyper hyper;
    hyper.n_trees = 15;
    hyper.seed = 77;
    auto a = RandomForest::train(x, y, hyper, identityNorm(4));
    auto b = RandomForest::train(x, y, hyper, identityNorm(4));
    REQUIRE(a.trees().size() == b.trees().size());
    bool same_seed_equal = true;
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        if (a.trees()[t].nodes.size() != b.trees()[t].nodes.size()) same_seed_equal = false;
    }
    CHECK(same_seed_equal);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd probe(4);
        for (int j = 0; j < 4; ++j) probe[j] = rng.normal(0, 1);
        CHECK(a.predictProba(probe) == b.predictProba(probe));
    }

    hyper.seed = 78;
    auto c = RandomForest::train(x, y, hyper, identityNorm(4));
    bool any_diff = false;
    for (int trial = 0; trial < 20 && !any_diff; ++trial) {
        Eigen::VectorXd probe(4);
        for (int j = 0; j < 4; ++j) probe[j] = rng.normal(0, 1);
        if (a.predictProba(probe) != c.predictProba(probe)) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("stumps grown on one informative feature give it all the importance") {
    Rng rng(13);
    const int n = 120;
    Eigen::MatrixXd x(n, 7);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 7; ++j) x(i, j) = rng.normal(0.0, 1.0);
        y[i] = x(i, 0) > 0.0 ? 1 : 0;  // only feature 0 matters
    }

    ForestHyper hyper;
    hyper.n_trees = 10;
    hyper.max_depth = 1;
    hyper.features_per_split = 0;  // every stump sees feature 0
    hyper.bootstrap = false;
    auto forest = RandomForest::train(x, y, hyper, identityNorm(7));
    auto imp = forest.nativeImportance();
    CHECK_FALSE(imp.degenerate);
    CHECK(imp.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 1; j < 7; ++j) CHECK(imp.scores[j] == 0.0);
}

TEST_CASE("forest training validates its inputs") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(9);
    CHECK_THROWS_AS((void)RandomForest::train(x, y, ForestHyper{}, identityNorm(2)),
                    ValidationError);
    ForestHyper bad;
    bad.n_trees = 0;
    Eigen::VectorXi y10 = Eigen::VectorXi::Zero(10);
    CHECK_THROWS_AS((void)RandomForest::train(x, y10, bad, identityNorm(2)), ValidationError);
}

// ---------------------------------------------------------------------------
// Boosted trees
// ---------------------------------------------------------------------------

TEST_CASE("the base score is the smoothed log prior") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 2;

    GbtHyper hyper;
    hyper.rounds = 1;
    hyper.eta = 0.0;  // keep the prior untouched
    auto model = GradientBoostedTrees::train(x, y, hyper, identityNorm(1));
    CHECK(model.baseScore()[0] == doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-12));
    CHECK(model.baseScore()[1] == doctest::Approx(std::log(2.0 / 7.0)).epsilon(1e-12));
    CHECK(model.baseScore()[2] == doctest::Approx(std::log(2.0 / 7.0)).epsilon(1e-12));

    // With zero shrinkage every input maps to the prior.
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd probe(1);
        probe << rng.normal(0, 5);
        Eigen::Vector3d p = model.predictProba(probe);
        CHECK(p[0] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
        CHECK(p[2] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    }
}

TEST_CASE("one boosting round sharpens a constant-label fit") {
    const int n = 8;
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = i;
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);

    GbtHyper hyper;
    hyper.rounds = 1;
    hyper.eta = 0.3;
    auto model = GradientBoostedTrees::train(x, y, hyper, identityNorm(1));

    const double base_p0 = (n + 1.0) / (n + 3.0);
    Eigen::VectorXd probe(1);
    probe << 3.5;
    CHECK(model.predictProba(probe)[0] > base_p0);

    // Constant gradients admit no split, so each class tree is one leaf whose
    // weight is the shrunk Newton step.
    Eigen::Vector3d base_probs;
    base_probs << base_p0, 1.0 / (n + 3.0), 1.0 / (n + 3.0);
    base_probs /= base_probs.sum();
    for (int k = 0; k < 3; ++k) {
        const auto& tree = model.rounds()[0][static_cast<std::size_t>(k)];
        REQUIRE(tree.numLeaves() == 1);
        const double pk = base_probs[k];
        const double g = n * (pk - (k == 0 ? 1.0 : 0.0));
        const double h = n * pk * (1.0 - pk);
        CHECK(tree.nodes[0].weight ==
              doctest::Approx(hyper.eta * (-g / (h + hyper.lambda))).epsilon(1e-9));
    }
}

namespace {

// Independent exhaustive root-split search for one class tree: the best gain
// over all features and midpoint thresholds given base-margin gradients.
double bestRootGain(const Eigen::MatrixXd& x, const Eigen::VectorXd& grad,
                    const Eigen::VectorXd& hess, double lambda) {
    const auto term = [&](double g, double h) {
        return h + lambda < 1e-12 ? 0.0 : g * g / (h + lambda);
    };
    double best = 0.0;
    for (int f = 0; f < x.cols(); ++f) {
        std::vector<int> order(static_cast<std::size_t>(x.rows()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return x(a, f) < x(b, f); });
        const double g_all = grad.sum(), h_all = hess.sum();
        double gl = 0.0, hl = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            gl += grad[order[i]];
            hl += hess[order[i]];
            if (x(order[i], f) == x(order[i + 1], f)) continue;
            best = std::max(best, 0.5 * (term(gl, hl) + term(g_all - gl, h_all - hl) -
                                         term(g_all, h_all)));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("a leaf penalty above every candidate gain suppresses all splits") {
    Eigen::MatrixXd x(6, 2);
    x << 0, 5, 1, 4, 2, 3, 3, 2, 4, 1, 5, 0;
    Eigen::VectorXi y(6);
    y << 0, 0, 1, 1, 2, 2;

    // First-round gradients at the smoothed prior, computed independently.
    Eigen::Vector3d counts(2, 2, 2);
    Eigen::Vector3d base = ((counts.array() + 1.0) / 9.0).log();
    double max_gain = 0.0;
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd grad(6), hess(6);
        for (int i = 0; i < 6; ++i) {
            const double pk = std::exp(base[k]);  // softmax of a log-simplex is itself
            grad[i] = pk - (y[i] == k ? 1.0 : 0.0);
            hess[i] = pk * (1.0 - pk);
        }
        max_gain = std::max(max_gain, bestRootGain(x, grad, hess, 1.0));
    }
    REQUIRE(max_gain > 0.0);

    GbtHyper strict;
    strict.rounds = 1;
    strict.gamma = max_gain + 1e-6;
    auto pruned = GradientBoostedTrees::train(x, y, strict, identityNorm(2));
    for (const auto& tree : pruned.rounds()[0]) CHECK(tree.numLeaves() == 1);

    GbtHyper lax;
    lax.rounds = 1;
    lax.gamma = 0.0;
    auto grown = GradientBoostedTrees::train(x, y, lax, identityNorm(2));
    bool any_split = false;
    for (const auto& tree : grown.rounds()[0]) {
        if (tree.numLeaves() > 1) any_split = true;
    }
    CHECK(any_split);
}

TEST_CASE("the boosting objective never increases") {
    Rng rng(19);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(60, 3, x, y, rng);
    // Make the labels partially learnable.
    for (int i = 0; i < 60; ++i) {
        if (x(i, 0) > 0.5) y[i] = 0;
    }

    GbtHyper hyper;
    hyper.rounds = 50;
    std::vector<double> log;
    (void)GradientBoostedTrees::train(x, y, hyper, identityNorm(3), &log);
    REQUIRE(log.size() == 51);
    for (std::size_t k = 1; k < log.size(); ++k) {
        CHECK(log[k] <= log[k - 1] + 1e-9);
    }

    // The first entry is the exact prior cross-entropy.
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (int i = 0; i < 60; ++i) counts[y[i]] += 1.0;
    double expected = 0.0;
    for (int i = 0; i < 60; ++i) expected -= std::log((counts[y[i]] + 1.0) / 63.0);
    CHECK(log[0] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("boosting is deterministic and its probabilities are coherent") {
    Rng rng(23);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    randomData(50, 4, x, y, rng);

    GbtHyper hyper;
    hyper.rounds = 10;
    auto a = GradientBoostedTrees::train(x, y, hyper, identityNorm(4));
    auto b = GradientBoostedTrees::train(x, y, hyper, identityNorm(4));
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd probe(4);
        for (int j = 0; j < 4; ++j) probe[j] = rng.normal(0, 1);
        CHECK(a.predictProba(probe) == b.predictProba(probe));
        Eigen::Vector3d p = a.predictProba(probe);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.minCoeff() > 0.0);
        // Probabilities are the softmax of the accumulated margins.
        Eigen::Vector3d m = a.margins(probe);
        Eigen::Vector3d s = softmaxRows(m.transpose()).transpose();
        CHECK((p - s).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("split gains power the boosted importance") {
    Rng rng(29);
    const int n = 100;
    Eigen::MatrixXd x(n, 7);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 7; ++j) x(i, j) = rng.normal(0.0, 1.0);
        y[i] = x(i, 2) > 0.0 ? 2 : 0;  // only feature 2 matters
    }
    GbtHyper hyper;
    hyper.rounds = 5;
    auto model = GradientBoostedTrees::train(x, y, hyper, identityNorm(7));
    auto imp = model.nativeImportance();
    CHECK_FALSE(imp.degenerate);
    REQUIRE(imp.scores.size() == 7);
    CHECK(imp.scores.sum() == doctest::Approx(1.0).epsilon(1e-9));
    int top = 0;
    imp.scores.maxCoeff(&top);
    CHECK(top == 2);
    CHECK(imp.scores[2] > 0.5);
}

TEST_CASE("boosting validates its hyperparameters") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(10);
    GbtHyper hyper;
    hyper.rounds = 0;
    CHECK_THROWS_AS((void)GradientBoostedTrees::train(x, y, hyper, identityNorm(2)),
                    ValidationError);
    hyper = GbtHyper{};
    hyper.eta = 1.5;
    CHECK_THROWS_AS((void)GradientBoostedTrees::train(x, y, hyper, identityNorm(2)),
                    ValidationError);
    hyper = GbtHyper{};
    hyper.lambda = -1.0;
    CHECK_THROWS_AS((void)GradientBoostedTrees::train(x, y, hyper, identityNorm(2)),
                    ValidationError);
    hyper = GbtHyper{};
    hyper.gamma = -0.5;
    CHECK_THROWS_AS((void)GradientBoostedTrees::train(x, y, hyper, identityNorm(2)),
                    ValidationError);
    Eigen::VectorXi bad_y = Eigen::VectorXi::Zero(9);
    CHECK_THROWS_AS((void)GradientBoostedTrees::train(x, bad_y, GbtHyper{}, identityNorm(2)),
                    ValidationError);
}
