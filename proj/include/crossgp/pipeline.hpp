#pragma once

#include <cstdint>
#include <string>

#include "crossgp/featurize.hpp"
#include "crossgp/forest.hpp"
#include "crossgp/gbt.hpp"
#include "crossgp/linear.hpp"
#include "crossgp/net.hpp"
#include "crossgp/synth.hpp"

namespace crossgp {

// Subcommand bodies shared by the CLI binary and the test suites. Every run
// writes a crossgp-manifest.json beside its outputs.

struct SynthOptions {
    SynthConfig cfg;
    std::string out_dir = ".";
};
void runSynth(const SynthOptions& opt);

struct IngestOptions {
    std::string cgm;
    std::string bolus;
    std::string meal;
    std::string out_dir = ".";
    bool strict = false;
};
void runIngest(const IngestOptions& opt);

struct FeaturizeOptions {
    std::string raw_dir;
    std::string out = "features.csv";
    int min_cgm = kDefaultMinCgm;
    bool strict = false;
};
void runFeaturize(const FeaturizeOptions& opt);

struct PairOptions {
    std::string features = "features.csv";
    std::string out = "examples.csv";
};
void runPair(const PairOptions& opt);

struct TrainOptions {
    std::string model_kind = "crossgp";  // lr | rf | gbt | crossgp
    std::string examples = "examples.csv";
    std::string out = "model.json";
    double test_fraction = 0.2;
    double sigma_scale = 0.05;
    int copies_per_example = 1;
    std::uint64_t seed = 42;
    LogisticHyper lr;
    ForestHyper rf;
    GbtHyper gbt;
    NetConfig net;
    int hidden = 64;
};
void runTrain(const TrainOptions& opt);

struct EvaluateOptions {
    std::string model = "model.json";
    std::string examples = "examples.csv";
    std::string report = "report.json";
};
void runEvaluate(const EvaluateOptions& opt);

struct ImportanceOptions {
    std::string model = "model.json";
    std::string examples = "examples.csv";
    std::string method = "native";  // native | permutation
    int repeats = 20;
    std::uint64_t seed = 42;
    std::string out = "importance.json";
};
void runImportance(const ImportanceOptions& opt);

struct ReportOptions {
    std::string reports_dir = ".";
    std::string out = "summary.csv";
};
void runReport(const ReportOptions& opt);

// The test split the model was evaluated against: chronological per-subject
// split re-derived from the fraction recorded in model.json.
SplitDataset splitForMeta(const std::vector<LabeledExample>& examples, double test_fraction);

}  // namespace crossgp
