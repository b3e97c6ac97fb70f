#include <doctest.h>

#include <cmath>
#include <vector>

#include "crossgp/error.hpp"
#include "crossgp/evaluate.hpp"
#include "crossgp/linear.hpp"
#include "crossgp/net.hpp"
#include "crossgp/rng.hpp"
#include "test_helpers.hpp"

using namespace crossgp;
using crossgp::testing::identityNorm;

namespace {

// Always predicts the same class, regardless of input.
class ConstantModel : public Classifier {
public:
    explicit ConstantModel(int cls) : cls_(cls) {}
    Eigen::Vector3d predictProba(const Eigen::VectorXd&) const override {
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        p[cls_] = 1.0;
        return p;
    }
    const char* kind() const override { return "constant"; }

private:
    int cls_;
};

// Class 0 iff feature 0 is positive, class 1 otherwise; ignores the rest.
class ThresholdModel : public Classifier {
public:
    Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const override {
        return features[0] > 0.0 ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0);
    }
    const char* kind() const override { return "threshold"; }
};

ConfusionMatrix handMatrix() {
    ConfusionMatrix cm;
    cm.counts << 5, 1, 0, 1, 3, 1, 0, 1, 2;
    return cm;
}

}  // namespace

TEST_CASE("perfect predictions score 1 across the board") {
    Eigen::VectorXi truth(6), pred(6);
    truth << 0, 1, 2, 0, 1, 2;
    pred = truth;
    auto rep = reportFromConfusion(confusionFromPredictions(truth, pred));
    CHECK(rep.overall_accuracy == 1.0);
    CHECK(rep.n_examples == 6);
    for (const auto& m : rep.per_class) {
        REQUIRE(m.precision.has_value());
        REQUIRE(m.recall.has_value());
        REQUIRE(m.f1.has_value());
        CHECK(*m.precision == 1.0);
        CHECK(*m.recall == 1.0);
        CHECK(*m.f1 == 1.0);
    }
    CHECK(*rep.macro_precision == 1.0);
}

TEST_CASE("a hand confusion matrix reproduces by formula") {
    auto rep = reportFromConfusion(handMatrix());
    CHECK(rep.n_examples == 14);
    CHECK(rep.overall_accuracy == doctest::Approx(10.0 / 14).epsilon(1e-12));

    CHECK(*rep.per_class[0].precision == doctest::Approx(5.0 / 6).epsilon(1e-12));
    CHECK(*rep.per_class[0].recall == doctest::Approx(5.0 / 6).epsilon(1e-12));
    CHECK(*rep.per_class[0].f1 == doctest::Approx(5.0 / 6).epsilon(1e-12));

    CHECK(*rep.per_class[1].precision == doctest::Approx(3.0 / 5).epsilon(1e-12));
    CHECK(*rep.per_class[1].recall == doctest::Approx(3.0 / 5).epsilon(1e-12));
    CHECK(*rep.per_class[2].precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(*rep.per_class[2].recall == doctest::Approx(2.0 / 3).epsilon(1e-12));

    // Macro precision is the mean over classes where it is defined.
    CHECK(*rep.macro_precision ==
          doctest::Approx((5.0 / 6 + 3.0 / 5 + 2.0 / 3) / 3).epsilon(1e-12));
    CHECK(*rep.macro_precision == doctest::Approx(0.70).epsilon(1e-9));
}

TEST_CASE("the f1 helper is the harmonic mean") {
    CHECK(f1Score(0.72, 0.95) == doctest::Approx(2 * 0.72 * 0.95 / (0.72 + 0.95)).epsilon(1e-12));
    CHECK(f1Score(0.72, 0.95) == doctest::Approx(0.82).epsilon(0.013));
    CHECK(f1Score(1.0, 1.0) == 1.0);
    CHECK(f1Score(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metrics on empty classes are explicit nulls, never zero") {
    Eigen::VectorXi truth(3), pred(3);
    truth << 0, 0, 1;
    pred << 0, 0, 0;
    auto rep = reportFromConfusion(confusionFromPredictions(truth, pred));

    // Class 1 was never predicted: precision undefined, recall a true 0.
    CHECK_FALSE(rep.per_class[1].precision.has_value());
    REQUIRE(rep.per_class[1].recall.has_value());
    CHECK(*rep.per_class[1].recall == 0.0);
    CHECK_FALSE(rep.per_class[1].f1.has_value());

    // Class 2 never appears at all.
    CHECK_FALSE(rep.per_class[2].precision.has_value());
    CHECK_FALSE(rep.per_class[2].recall.has_value());
    CHECK_FALSE(rep.per_class[2].f1.has_value());

    // Macro precision averages the single defined value.
    CHECK(*rep.macro_precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(rep.overall_accuracy == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("a defined precision of zero still blocks f1 when recall is zero too") {
    Eigen::VectorXi truth(2), pred(2);
    truth << 0, 1;
    pred << 1, 0;
    auto rep = reportFromConfusion(confusionFromPredictions(truth, pred));
    REQUIRE(rep.per_class[0].precision.has_value());
    CHECK(*rep.per_class[0].precision == 0.0);
    REQUIRE(rep.per_class[0].recall.has_value());
    CHECK(*rep.per_class[0].recall == 0.0);
    CHECK_FALSE(rep.per_class[0].f1.has_value());
    CHECK(rep.overall_accuracy == 0.0);
}

TEST_CASE("evaluate wires predictions into the confusion matrix") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 7);
    Eigen::VectorXi y(10);
    y << 0, 0, 0, 0, 0, 0, 1, 1, 2, 2;
    ConstantModel model(0);
    auto rep = evaluate(model, x, y);
    CHECK(rep.overall_accuracy == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rep.confusion.counts(0, 0) == 6);
    CHECK(rep.confusion.counts(1, 0) == 2);
    CHECK(rep.confusion.counts(2, 0) == 2);
    CHECK(rep.n_examples == 10);

    CHECK_THROWS_AS((void)evaluate(model, Eigen::MatrixXd(0, 7), Eigen::VectorXi(0)),
                    ValidationError);
}

TEST_CASE("confusion inputs are validated") {
    Eigen::VectorXi a(2), b(3);
    a << 0, 1;
    b << 0, 1, 2;
    CHECK_THROWS_AS((void)confusionFromPredictions(a, b), ValidationError);
    Eigen::VectorXi bad(2), ok(2);
    bad << 0, 3;
    ok << 0, 1;
    CHECK_THROWS_AS((void)confusionFromPredictions(bad, ok), ValidationError);
    CHECK_THROWS_AS((void)confusionFromPredictions(ok, bad), ValidationError);
    CHECK_THROWS_AS((void)reportFromConfusion(ConfusionMatrix{}), ValidationError);
}

TEST_CASE("permuting a decisive feature costs all the importance mass") {
    Rng rng(7);
    const int n = 100;
    Eigen::MatrixXd x(n, 7);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 7; ++j) x(i, j) = rng.normal(0.0, 1.0);
        y[i] = x(i, 0) > 0.0 ? 0 : 1;
    }
    ThresholdModel model;
    auto rep = permutationImportance(model, x, y, 10, 3);
    CHECK(rep.method == "permutation");
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 1; j < 7; ++j) CHECK(rep.scores[j] == 0.0);
    REQUIRE(rep.top3.size() == 3);
    CHECK(rep.top3[0] == "tir");
}

TEST_CASE("a constant model has uniform degenerate importance") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 7);
    Eigen::VectorXi y(20);
    for (int i = 0; i < 20; ++i) y[i] = i % 3;
    ConstantModel model(1);
    auto rep = permutationImportance(model, x, y, 5, 9);
    CHECK(rep.degenerate);
    for (int j = 0; j < 7; ++j) CHECK(rep.scores[j] == doctest::Approx(1.0 / 7).epsilon(1e-12));
}

TEST_CASE("permutation importance is seed-stable and reproducible") {
    Rng rng(11);
    const int n = 200;
    Eigen::MatrixXd x(n, 7);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 7; ++j) x(i, j) = rng.normal(0.0, 1.0);
        const double score = x(i, 0) + 0.5 * x(i, 1) + 0.3 * x(i, 2) + rng.normal(0.0, 0.5);
        y[i] = score > 0.5 ? 0 : (score > -0.5 ? 1 : 2);
    }
    LogisticHyper hyper;
    hyper.epochs = 300;
    auto model = LogisticRegression::train(x, y, identityNorm(7), hyper);

    auto a = permutationImportance(model, x, y, 5, 17);
    auto b = permutationImportance(model, x, y, 5, 17);
    CHECK(a.scores == b.scores);
    CHECK(a.top3 == b.top3);

    // Twenty repeats smooth seed-to-seed variation below 0.05 per feature.
    auto s1 = permutationImportance(model, x, y, 20, 1);
    auto s2 = permutationImportance(model, x, y, 20, 2);
    for (int j = 0; j < 7; ++j) {
        CHECK(std::abs(s1.scores[j] - s2.scores[j]) < 0.05);
    }
}

TEST_CASE("permutation importance validates its inputs") {
    ThresholdModel model;
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(9, 7);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(9);
    CHECK_THROWS_AS((void)permutationImportance(model, x, y, 5, 0), ValidationError);
    Eigen::MatrixXd x10 = Eigen::MatrixXd::Random(10, 7);
    Eigen::VectorXi y10 = Eigen::VectorXi::Zero(10);
    CHECK_THROWS_AS((void)permutationImportance(model, x10, y10, 0, 0), ValidationError);
    Eigen::VectorXi y9 = Eigen::VectorXi::Zero(9);
    CHECK_THROWS_AS((void)permutationImportance(model, x10, y9, 5, 0), ValidationError);
}

TEST_CASE("native importance surfaces model scores or refuses loudly") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 7);
    w(0, 0) = 3.0;
    w(1, 1) = 1.5;
    w(2, 1) = -1.5;
    LogisticRegression lr(w, Eigen::Vector3d::Zero(), identityNorm(7));
    auto rep = nativeImportance(lr);
    CHECK(rep.method == "native");
    CHECK(rep.scores.sum() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(rep.top3.size() == 3);
    // Equal top scores keep feature order; zeros fill the tail in order too.
    CHECK(rep.top3[0] == "tir");
    CHECK(rep.top3[1] == "tbr");
    CHECK(rep.top3[2] == "tar");

    CrossGpNet net(7, 4, 0);
    CHECK_THROWS_WITH_AS(
        (void)nativeImportance(net),
        "native importance unsupported for model kind 'crossgp'; use permutation",
        ValidationError);
}
