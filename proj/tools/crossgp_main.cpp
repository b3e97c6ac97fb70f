// crossgp: cross-day glucose-control prediction pipeline.
// Subcommands cover the whole flow: synth -> ingest -> featurize -> pair ->
// train -> evaluate -> importance -> report. Exit codes: 0 success,
// 1 validation error, 2 I/O error.

#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crossgp/csv.hpp"
#include "crossgp/error.hpp"
#include "crossgp/log.hpp"
#include "crossgp/manifest.hpp"
#include "crossgp/pipeline.hpp"

namespace {

std::array<double, 3> parseMix(const std::string& text) {
    const std::vector<std::string> parts = crossgp::splitCsvLine(text);
    if (parts.size() != 3)
        throw crossgp::ValidationError("--mix expects three comma-separated fractions");
    std::array<double, 3> mix{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto v = crossgp::parseDouble(parts[i]);
        if (!v) throw crossgp::ValidationError("--mix: bad fraction `" + parts[i] + "`");
        mix[i] = *v;
    }
    return mix;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace crossgp;
    CLI::App app{"cross-day glucose-control prediction pipeline"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    // synth
    SynthOptions synth;
    std::string mix_text;
    CLI::App* sc_synth = app.add_subcommand("synth", "generate synthetic raw event CSVs");
    sc_synth->add_option("--subjects", synth.cfg.n_subjects, "number of subjects");
    sc_synth->add_option("--days", synth.cfg.days_per_subject, "days per subject");
    sc_synth->add_option("--seed", synth.cfg.seed, "master seed");
    sc_synth->add_option("--mix", mix_text, "Good,Moderate,Poor day proportions");
    sc_synth->add_option("--persistence", synth.cfg.persistence,
                         "day-to-day class persistence in [0,1)");
    sc_synth->add_option("--insulin-tir-gain", synth.cfg.insulin_tir_gain,
                         "insulin-driven next-day TIR shift scale");
    sc_synth->add_option("--out", synth.out_dir, "output directory");
    sc_synth->callback([&] {
        if (!mix_text.empty()) synth.cfg.control_mix = parseMix(mix_text);
        runSynth(synth);
    });

    // ingest
    IngestOptions ingest;
    CLI::App* sc_ingest = app.add_subcommand("ingest", "validate raw CSVs into day bundles");
    sc_ingest->add_option("--cgm", ingest.cgm, "cgm.csv path")->required();
    sc_ingest->add_option("--bolus", ingest.bolus, "bolus.csv path")->required();
    sc_ingest->add_option("--meal", ingest.meal, "meal.csv path")->required();
    sc_ingest->add_option("--out", ingest.out_dir, "bundle output directory");
    sc_ingest->add_flag("--strict", ingest.strict, "fail on the first bad row");
    sc_ingest->callback([&] { runIngest(ingest); });

    // featurize
    FeaturizeOptions feat;
    CLI::App* sc_feat = app.add_subcommand("featurize", "daily feature vectors from raw CSVs");
    sc_feat->add_option("--raw", feat.raw_dir, "directory with cgm/bolus/meal.csv")->required();
    sc_feat->add_option("--out", feat.out, "features.csv path");
    sc_feat->add_option("--min-cgm", feat.min_cgm, "minimum CGM readings per day");
    sc_feat->add_flag("--strict", feat.strict, "fail on the first bad row");
    sc_feat->callback([&] { runFeaturize(feat); });

    // pair
    PairOptions pair;
    CLI::App* sc_pair = app.add_subcommand("pair", "build next-day prediction examples");
    sc_pair->add_option("--features", pair.features, "features.csv path")->required();
    sc_pair->add_option("--out", pair.out, "examples.csv path");
    sc_pair->callback([&] { runPair(pair); });

    // train
    TrainOptions train;
    int epochs = 0, rounds = 0, trees = 0, max_depth = 0, min_leaf = 0, mtry = 0;
    double step = 0.0, l2 = 0.0, eta = 0.0, lambda = 0.0, gamma = 0.0;
    CLI::App* sc_train = app.add_subcommand("train", "fit a model on paired examples");
    sc_train->add_option("--model", train.model_kind, "lr | rf | gbt | crossgp")->required();
    sc_train->add_option("--examples", train.examples, "examples.csv path")->required();
    sc_train->add_option("--out", train.out, "model.json path");
    sc_train->add_option("--test-fraction", train.test_fraction,
                         "held-out fraction per subject (chronological)");
    sc_train->add_option("--sigma", train.sigma_scale, "augmentation noise scale");
    sc_train->add_option("--copies", train.copies_per_example, "augmented copies per example");
    sc_train->add_option("--seed", train.seed, "master seed");
    CLI::Option* o_epochs = sc_train->add_option("--epochs", epochs, "training epochs");
    CLI::Option* o_step = sc_train->add_option("--lr", step, "gradient step size");
    CLI::Option* o_l2 = sc_train->add_option("--l2", l2, "L2 penalty (lr model)");
    CLI::Option* o_trees = sc_train->add_option("--trees", trees, "forest size (rf)");
    CLI::Option* o_depth = sc_train->add_option("--max-depth", max_depth, "tree depth cap");
    CLI::Option* o_leaf = sc_train->add_option("--min-leaf", min_leaf, "minimum leaf size (rf)");
    CLI::Option* o_mtry = sc_train->add_option("--mtry", mtry, "features per split (rf)");
    CLI::Option* o_rounds = sc_train->add_option("--rounds", rounds, "boosting rounds (gbt)");
    CLI::Option* o_eta = sc_train->add_option("--eta", eta, "boosting shrinkage (gbt)");
    CLI::Option* o_lambda = sc_train->add_option("--lambda", lambda, "leaf L2 penalty (gbt)");
    CLI::Option* o_gamma = sc_train->add_option("--gamma", gamma, "minimum split gain (gbt)");
    sc_train->add_option("--hidden", train.hidden, "hidden width (crossgp)");
    sc_train->add_option("--batch", train.net.batch_size, "batch size (crossgp)");
    sc_train->callback([&] {
        if (*o_epochs) {
            train.lr.epochs = epochs;
            train.net.epochs = epochs;
        }
        if (*o_step) {
            train.lr.step = step;
            train.net.step_size = step;
        }
        if (*o_l2) train.lr.l2 = l2;
        if (*o_trees) train.rf.n_trees = trees;
        if (*o_depth) {
            train.rf.max_depth = max_depth;
            train.gbt.max_depth = max_depth;
        }
        if (*o_leaf) train.rf.min_leaf = min_leaf;
        if (*o_mtry) train.rf.features_per_split = mtry;
        if (*o_rounds) train.gbt.rounds = rounds;
        if (*o_eta) train.gbt.eta = eta;
        if (*o_lambda) train.gbt.lambda = lambda;
        if (*o_gamma) train.gbt.gamma = gamma;
        runTrain(train);
    });

    // evaluate
    EvaluateOptions eval;
    CLI::App* sc_eval = app.add_subcommand("evaluate", "per-class metrics on the test split");
    sc_eval->add_option("--model", eval.model, "model.json path")->required();
    sc_eval->add_option("--examples", eval.examples, "examples.csv path")->required();
    sc_eval->add_option("--report", eval.report, "report.json path");
    sc_eval->callback([&] { runEvaluate(eval); });

    // importance
    ImportanceOptions imp;
    CLI::App* sc_imp = app.add_subcommand("importance", "feature importance scores");
    sc_imp->add_option("--model", imp.model, "model.json path")->required();
    sc_imp->add_option("--examples", imp.examples, "examples.csv path")->required();
    sc_imp->add_option("--method", imp.method, "native | permutation");
    sc_imp->add_option("--repeats", imp.repeats, "permutation repeats");
    sc_imp->add_option("--seed", imp.seed, "permutation seed");
    sc_imp->add_option("--out", imp.out, "importance.json path");
    sc_imp->callback([&] { runImportance(imp); });

    // report
    ReportOptions report;
    CLI::App* sc_report = app.add_subcommand("report", "flatten report JSONs into a summary CSV");
    sc_report->add_option("--reports", report.reports_dir, "directory of report/importance JSONs")
        ->required();
    sc_report->add_option("--out", report.out, "summary.csv path");
    sc_report->callback([&] { runReport(report); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        logError(e.what());
        return 1;
    } catch (const IoError& e) {
        logError(e.what());
        return 2;
    } catch (const std::exception& e) {
        logError(std::string("unexpected error: ") + e.what());
        return 2;
    }
    return 0;
}
