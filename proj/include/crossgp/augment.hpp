#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "crossgp/types.hpp"

namespace crossgp {

struct AugmentConfig {
    double sigma_scale = 0.05;   // noise std as a multiple of each feature's train std
    int copies_per_example = 1;
    std::uint64_t seed = 0;
};

// Original training examples followed, per example, by noise-perturbed
// copies. Noise is independent Gaussian per feature with std equal to
// sigma_scale * feature_std. The tir/tbr/tar triple of each copy is clamped
// to [0,1] and renormalized to sum 1; the aggregate features are clamped at
// 0. Labels are copied unchanged. Deterministic given the seed, with
// per-example derived sub-streams.
std::vector<LabeledExample> augment(const std::vector<LabeledExample>& train,
                                    const Eigen::VectorXd& feature_std,
                                    const AugmentConfig& cfg);

}  // namespace crossgp
