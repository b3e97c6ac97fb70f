#include "crossgp/augment.hpp"

#include <algorithm>

#include "crossgp/error.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

namespace {

LabeledExample perturb(const LabeledExample& e, const Eigen::VectorXd& feature_std,
                       double sigma_scale, Rng& rng) {
    auto v = e.features.vec();
    for (int j = 0; j < kNumFeatures; ++j) {
        v[j] += rng.normal(0.0, sigma_scale * feature_std[j]);
    }
    // Project the range triple back onto the simplex: clamp, then rescale.
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
        v[j] = std::clamp(v[j], 0.0, 1.0);
        sum += v[j];
    }
    if (sum < 1e-12) {
        v[0] = e.features.tir;
        v[1] = e.features.tbr;
        v[2] = e.features.tar;
    } else {
        for (int j = 0; j < 3; ++j) v[j] /= sum;
    }
    for (int j = 3; j < kNumFeatures; ++j) v[j] = std::max(v[j], 0.0);

    LabeledExample out = e;
    out.features.setVec(v);
    return out;
}

}  // namespace

std::vector<LabeledExample> augment(const std::vector<LabeledExample>& train,
                                    const Eigen::VectorXd& feature_std,
                                    const AugmentConfig& cfg) {
    if (cfg.sigma_scale < 0.0) throw ValidationError("sigma_scale must be >= 0");
    if (cfg.copies_per_example < 0) throw ValidationError("copies_per_example must be >= 0");
    if (feature_std.size() != kNumFeatures) throw ValidationError("feature_std must have 7 entries");

    std::vector<LabeledExample> out;
    out.reserve(train.size() * static_cast<std::size_t>(1 + cfg.copies_per_example));
    for (std::size_t i = 0; i < train.size(); ++i) {
        out.push_back(train[i]);
        if (cfg.copies_per_example == 0) continue;
        Rng rng(splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1))));
        for (int c = 0; c < cfg.copies_per_example; ++c) {
            if (cfg.sigma_scale == 0.0) {
                out.push_back(train[i]);  // exact duplicate, no projection
            } else {
                out.push_back(perturb(train[i], feature_std, cfg.sigma_scale, rng));
            }
        }
    }
    return out;
}

}  // namespace crossgp
