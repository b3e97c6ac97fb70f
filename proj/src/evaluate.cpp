#include "crossgp/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "crossgp/error.hpp"
#include "crossgp/math.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

namespace {

std::vector<std::string> namesFor(Eigen::Index d) {
    std::vector<std::string> names;
    if (d == kNumFeatures) {
        for (const char* n : featureNames()) names.emplace_back(n);
    } else {
        for (Eigen::Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    }
    return names;
}

// Largest scores first; equal scores keep feature order.
std::vector<std::string> topThree(const Eigen::VectorXd& scores) {
    const Eigen::Index d = scores.size();
    std::vector<int> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores(a) > scores(b); });
    const auto names = namesFor(d);
    std::vector<std::string> top;
    for (std::size_t k = 0; k < idx.size() && k < 3; ++k)
        top.push_back(names[static_cast<std::size_t>(idx[k])]);
    return top;
}

ImportanceReport finishReport(std::string method, Eigen::VectorXd raw, bool degenerate_hint) {
    ImportanceReport rep;
    rep.method = std::move(method);
    raw = raw.cwiseMax(0.0);
    const double sum = raw.sum();
    if (degenerate_hint || sum < 1e-12) {
        rep.scores = Eigen::VectorXd::Constant(raw.size(), 1.0 / static_cast<double>(raw.size()));
        rep.degenerate = true;
    } else {
        rep.scores = raw / sum;
    }
    rep.top3 = topThree(rep.scores);
    return rep;
}

double accuracyOf(const Classifier& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
    const Eigen::VectorXi pred = argmaxRowsLowest(model.predictProbaBatch(x));
    return static_cast<double>((pred.array() == y.array()).count()) /
           static_cast<double>(y.size());
}

}  // namespace

ConfusionMatrix confusionFromPredictions(const Eigen::VectorXi& truth,
                                         const Eigen::VectorXi& predicted) {
    if (truth.size() != predicted.size())
        throw ValidationError("truth/prediction length mismatch");
    ConfusionMatrix cm;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth(i) < 0 || truth(i) >= kNumClasses || predicted(i) < 0 ||
            predicted(i) >= kNumClasses)
            throw ValidationError("class code out of range");
        cm.counts(truth(i), predicted(i)) += 1;
    }
    return cm;
}

EvaluationReport reportFromConfusion(const ConfusionMatrix& cm) {
    const int total = cm.total();
    if (total == 0) throw ValidationError("empty test set");
    EvaluationReport rep;
    rep.confusion = cm;
    rep.n_examples = total;
    rep.overall_accuracy = static_cast<double>(cm.counts.trace()) / total;

    double prec_sum = 0.0;
    int prec_defined = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        const int col = cm.counts.col(k).sum();
        const int row = cm.counts.row(k).sum();
        const int diag = cm.counts(k, k);
        ClassMetrics& m = rep.per_class[static_cast<std::size_t>(k)];
        if (col > 0) {
            m.precision = static_cast<double>(diag) / col;
            prec_sum += *m.precision;
            ++prec_defined;
        }
        if (row > 0) m.recall = static_cast<double>(diag) / row;
        if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
            m.f1 = f1Score(*m.precision, *m.recall);
    }
    if (prec_defined > 0) rep.macro_precision = prec_sum / prec_defined;
    return rep;
}

EvaluationReport evaluate(const Classifier& model, const Eigen::MatrixXd& x,
                          const Eigen::VectorXi& y) {
    if (x.rows() == 0) throw ValidationError("empty test set");
    if (x.rows() != y.size()) throw ValidationError("feature/label count mismatch");
    const Eigen::VectorXi pred = argmaxRowsLowest(model.predictProbaBatch(x));
    return reportFromConfusion(confusionFromPredictions(y, pred));
}

ImportanceReport permutationImportance(const Classifier& model, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXi& y, int repeats,
                                       std::uint64_t seed) {
    if (x.rows() < 10) throw ValidationError("permutation importance needs >= 10 test examples");
    if (x.rows() != y.size()) throw ValidationError("feature/label count mismatch");
    if (repeats < 1) throw ValidationError("repeats must be >= 1");

    const double baseline = accuracyOf(model, x, y);
    const Eigen::Index d = x.cols();
    const Eigen::Index n = x.rows();
    Eigen::VectorXd drops = Eigen::VectorXd::Zero(d);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < d; ++j) {
        double drop_sum = 0.0;
        for (int r = 0; r < repeats; ++r) {
            // Independent stream per (feature, repeat) so repeats could run
            // in any order without changing the result.
            Rng rng(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL *
                                       static_cast<std::uint64_t>(j * repeats + r + 1))));
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            Eigen::MatrixXd shuffled = x;
            for (Eigen::Index i = 0; i < n; ++i)
                shuffled(i, j) = x(perm[static_cast<std::size_t>(i)], j);
            drop_sum += baseline - accuracyOf(model, shuffled, y);
        }
        drops(j) = drop_sum / repeats;
    }
    return finishReport("permutation", drops, false);
}

ImportanceReport nativeImportance(const Classifier& model) {
    const NativeImportance raw = model.nativeImportance();
    if (!raw.available)
        throw ValidationError(std::string("native importance unsupported for model kind '") +
                              model.kind() + "'; use permutation");
    return finishReport("native", raw.scores, raw.degenerate);
}

}  // namespace crossgp
