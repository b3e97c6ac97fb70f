#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "crossgp/forest.hpp"
#include "crossgp/gbt.hpp"
#include "crossgp/linear.hpp"
#include "crossgp/net.hpp"

namespace crossgp {

// Split/augmentation settings the model was trained under; evaluate and
// importance re-derive the chronological test split from these.
struct TrainMeta {
    double test_fraction = 0.2;
    double sigma_scale = 0.05;
    int copies_per_example = 1;
    std::uint64_t seed = 42;
};

struct LoadedModel {
    std::unique_ptr<Classifier> model;
    std::string kind;
    TrainMeta meta;
};

// All kinds share one JSON envelope: schema_version, kind, hyper,
// normalization, params, train_meta. Key order is alphabetical, numbers are
// shortest round-trip decimals, so equal models serialize byte-identically.
// LR and the network do not carry their hyperparameters, so those are passed
// alongside.
void saveModel(const std::string& path, const LogisticRegression& m, const LogisticHyper& hyper,
               const TrainMeta& meta);
void saveModel(const std::string& path, const RandomForest& m, const TrainMeta& meta);
void saveModel(const std::string& path, const GradientBoostedTrees& m, const TrainMeta& meta);
void saveModel(const std::string& path, const CrossGpNet& m, const NetConfig& cfg,
               const TrainMeta& meta);

LoadedModel loadModel(const std::string& path);

}  // namespace crossgp
