#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossgp/classifier.hpp"

namespace crossgp {

// Rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
    Eigen::Matrix3i counts = Eigen::Matrix3i::Zero();
    int total() const { return counts.sum(); }
};

// Metrics can be Undefined (empty class): reported as nullopt, never as 0.
struct ClassMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

struct EvaluationReport {
    std::array<ClassMetrics, kNumClasses> per_class;
    double overall_accuracy = 0.0;
    std::optional<double> macro_precision;  // mean over classes with defined precision
    ConfusionMatrix confusion;
    int n_examples = 0;
};

struct ImportanceReport {
    std::string method;      // "native" or "permutation"
    Eigen::VectorXd scores;  // non-negative, sum 1
    std::vector<std::string> top3;
    bool degenerate = false;  // no signal anywhere; scores fell back to uniform
};

// Harmonic mean of precision and recall; callers guard against P+R = 0.
inline double f1Score(double precision, double recall) {
    return 2.0 * precision * recall / (precision + recall);
}

ConfusionMatrix confusionFromPredictions(const Eigen::VectorXi& truth,
                                         const Eigen::VectorXi& predicted);

// Per-class precision/recall/f1 and accuracy from a confusion matrix.
EvaluationReport reportFromConfusion(const ConfusionMatrix& cm);

EvaluationReport evaluate(const Classifier& model, const Eigen::MatrixXd& x,
                          const Eigen::VectorXi& y);

// Mean accuracy drop per shuffled feature column, floored at zero and
// sum-normalized. Degenerate (all-zero) drops become uniform scores.
ImportanceReport permutationImportance(const Classifier& model, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXi& y, int repeats,
                                       std::uint64_t seed);

// Model-supplied importances; throws for kinds without them (the network).
ImportanceReport nativeImportance(const Classifier& model);

}  // namespace crossgp
