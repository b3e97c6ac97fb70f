#include "crossgp/types.hpp"

namespace crossgp {

const char* bolusKindName(BolusKind k) {
    switch (k) {
        case BolusKind::Correction: return "correction";
        case BolusKind::Meal: return "meal";
        case BolusKind::Total: return "total";
    }
    return "?";
}

const std::array<const char*, kNumFeatures>& featureNames() {
    static const std::array<const char*, kNumFeatures> names = {
        "tir", "tbr", "tar", "correction_bolus", "meal", "meal_bolus", "total_bolus"};
    return names;
}

const char* className(GlycemicClass c) {
    switch (c) {
        case GlycemicClass::Good: return "Good";
        case GlycemicClass::Moderate: return "Moderate";
        case GlycemicClass::Poor: return "Poor";
    }
    return "?";
}

Eigen::MatrixXd featureMatrix(const std::vector<LabeledExample>& examples) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(examples.size()), kNumFeatures);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x.row(i) = examples[static_cast<std::size_t>(i)].features.vec().transpose();
    }
    return x;
}

Eigen::VectorXi labelVector(const std::vector<LabeledExample>& examples) {
    Eigen::VectorXi y(static_cast<Eigen::Index>(examples.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y[i] = static_cast<int>(examples[static_cast<std::size_t>(i)].label);
    }
    return y;
}

}  // namespace crossgp
