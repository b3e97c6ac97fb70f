#pragma once

#include <Eigen/Dense>

#include "crossgp/math.hpp"
#include "crossgp/types.hpp"

namespace crossgp {

struct NativeImportance {
    Eigen::VectorXd scores;     // non-negative, sums to 1 when available
    bool available = false;
    bool degenerate = false;    // no signal; scores returned uniform
};

// Uniform surface over the four models. Inputs are raw (unstandardized)
// feature vectors; models that train on z-scored features standardize
// internally from their stored statistics.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const = 0;

    virtual Eigen::MatrixXd predictProbaBatch(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd p(x.rows(), kNumClasses);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            p.row(i) = predictProba(x.row(i).transpose()).transpose();
        }
        return p;
    }

    // Argmax of predictProba; ties break to the lowest class code.
    GlycemicClass predict(const Eigen::VectorXd& features) const {
        return static_cast<GlycemicClass>(argmaxLowest(predictProba(features)));
    }

    virtual NativeImportance nativeImportance() const { return {}; }

    virtual const char* kind() const = 0;
};

inline Eigen::VectorXd standardizeVec(const Eigen::VectorXd& v, const Normalization& norm) {
    return (v - norm.mean).cwiseQuotient(norm.std);
}

}  // namespace crossgp
