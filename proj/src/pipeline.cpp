#include "crossgp/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "crossgp/augment.hpp"
#include "crossgp/csv.hpp"
#include "crossgp/error.hpp"
#include "crossgp/evaluate.hpp"
#include "crossgp/ingest.hpp"
#include "crossgp/log.hpp"
#include "crossgp/manifest.hpp"
#include "crossgp/model_io.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

namespace {

using nlohmann::json;

std::string fmtU64(std::uint64_t v) { return std::to_string(v); }

std::string rawPath(const std::string& dir, const std::string& name) { return dir + "/" + name; }

void ensureDir(const std::string& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

json metricJ(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json reportToJson(const EvaluationReport& rep, const std::string& kind) {
    json classes;
    for (int k = 0; k < kNumClasses; ++k) {
        const ClassMetrics& m = rep.per_class[static_cast<std::size_t>(k)];
        json c;
        c["f1"] = metricJ(m.f1);
        c["precision"] = metricJ(m.precision);
        c["recall"] = metricJ(m.recall);
        classes[className(static_cast<GlycemicClass>(k))] = std::move(c);
    }
    json confusion = json::array();
    for (int i = 0; i < kNumClasses; ++i) {
        json row = json::array();
        for (int j = 0; j < kNumClasses; ++j) row.push_back(rep.confusion.counts(i, j));
        confusion.push_back(std::move(row));
    }
    json doc;
    doc["accuracy"] = rep.overall_accuracy;
    doc["classes"] = std::move(classes);
    doc["confusion"] = std::move(confusion);
    doc["kind"] = kind;
    doc["macro_precision"] = metricJ(rep.macro_precision);
    doc["n_examples"] = rep.n_examples;
    return doc;
}

void writeJsonFile(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace

SplitDataset splitForMeta(const std::vector<LabeledExample>& examples, double test_fraction) {
    return splitAndNormalize(examples, test_fraction);
}

void runSynth(const SynthOptions& opt) {
    ensureDir(opt.out_dir);
    generateSynthetic(opt.cfg, opt.out_dir);
    RunManifest m;
    m.command = "synth";
    m.seed = opt.cfg.seed;
    m.flags["days"] = std::to_string(opt.cfg.days_per_subject);
    m.flags["mix"] = formatDouble(opt.cfg.control_mix[0]) + "," +
                     formatDouble(opt.cfg.control_mix[1]) + "," +
                     formatDouble(opt.cfg.control_mix[2]);
    m.flags["out"] = opt.out_dir;
    m.flags["persistence"] = formatDouble(opt.cfg.persistence);
    m.flags["insulin_tir_gain"] = formatDouble(opt.cfg.insulin_tir_gain);
    m.flags["seed"] = fmtU64(opt.cfg.seed);
    m.flags["subjects"] = std::to_string(opt.cfg.n_subjects);
    m.outputs = {rawPath(opt.out_dir, "cgm.csv"), rawPath(opt.out_dir, "bolus.csv"),
                 rawPath(opt.out_dir, "meal.csv")};
    writeManifest(m, opt.out_dir);
}

void runIngest(const IngestOptions& opt) {
    std::vector<IngestIssue> issues;
    RawEvents events = parseEventFiles(opt.cgm, opt.bolus, opt.meal, issues, opt.strict);
    for (const IngestIssue& issue : issues)
        logInfo("skipped " + issue.file + ":" + std::to_string(issue.line) + ": " + issue.reason);
    std::vector<SubjectDayBundle> bundles = bundleByDay(events);
    ensureDir(opt.out_dir);
    writeBundleFiles(opt.out_dir, bundles);
    logInfo("ingested " + std::to_string(bundles.size()) + " subject-days (" +
            std::to_string(issues.size()) + " rows skipped)");

    RunManifest m;
    m.command = "ingest";
    m.flags["bolus"] = opt.bolus;
    m.flags["cgm"] = opt.cgm;
    m.flags["meal"] = opt.meal;
    m.flags["out"] = opt.out_dir;
    m.flags["strict"] = opt.strict ? "true" : "false";
    addInput(m, opt.cgm);
    addInput(m, opt.bolus);
    addInput(m, opt.meal);
    std::set<std::string> subjects;
    for (const auto& b : bundles) subjects.insert(b.subject);
    for (const auto& s : subjects) m.outputs.push_back(rawPath(opt.out_dir, s + ".jsonl"));
    writeManifest(m, opt.out_dir);
}

void runFeaturize(const FeaturizeOptions& opt) {
    std::vector<IngestIssue> issues;
    const std::string cgm = rawPath(opt.raw_dir, "cgm.csv");
    const std::string bolus = rawPath(opt.raw_dir, "bolus.csv");
    const std::string meal = rawPath(opt.raw_dir, "meal.csv");
    RawEvents events = parseEventFiles(cgm, bolus, meal, issues, opt.strict);
    for (const IngestIssue& issue : issues)
        logInfo("skipped " + issue.file + ":" + std::to_string(issue.line) + ": " + issue.reason);
    std::vector<CoverageSkip> skipped;
    std::vector<DailyFeatures> days = featurizeBundles(bundleByDay(events), opt.min_cgm, &skipped);
    for (const CoverageSkip& s : skipped)
        logDebug("low coverage: " + s.subject + " " + s.date.str() + " (" +
                 std::to_string(s.cgm_count) + " readings)");
    ensureDir(parentDir(opt.out));
    writeFeaturesCsv(opt.out, days);
    logInfo("featurized " + std::to_string(days.size()) + " days (" +
            std::to_string(skipped.size()) + " below coverage)");

    RunManifest m;
    m.command = "featurize";
    m.flags["min_cgm"] = std::to_string(opt.min_cgm);
    m.flags["out"] = opt.out;
    m.flags["raw"] = opt.raw_dir;
    m.flags["strict"] = opt.strict ? "true" : "false";
    addInput(m, cgm);
    addInput(m, bolus);
    addInput(m, meal);
    m.outputs = {opt.out};
    writeManifest(m, parentDir(opt.out));
}

void runPair(const PairOptions& opt) {
    std::vector<DailyFeatures> days = readFeaturesCsv(opt.features);
    std::vector<LabeledExample> examples = pairCrossDay(days);
    ensureDir(parentDir(opt.out));
    writeExamplesCsv(opt.out, examples);
    logInfo("paired " + std::to_string(examples.size()) + " cross-day examples from " +
            std::to_string(days.size()) + " days");

    RunManifest m;
    m.command = "pair";
    m.flags["features"] = opt.features;
    m.flags["out"] = opt.out;
    addInput(m, opt.features);
    m.outputs = {opt.out};
    writeManifest(m, parentDir(opt.out));
}

void runTrain(const TrainOptions& opt) {
    const std::vector<LabeledExample> examples = readExamplesCsv(opt.examples);
    SplitDataset split = splitAndNormalize(examples, opt.test_fraction);

    AugmentConfig aug;
    aug.sigma_scale = opt.sigma_scale;
    aug.copies_per_example = opt.copies_per_example;
    aug.seed = deriveSeed(opt.seed, "augment");
    const std::vector<LabeledExample> train = augment(split.train, split.norm.std, aug);
    const Eigen::MatrixXd x = featureMatrix(train);
    const Eigen::VectorXi y = labelVector(train);
    logInfo("training " + opt.model_kind + " on " + std::to_string(train.size()) +
            " examples (" + std::to_string(split.test.size()) + " held out)");

    TrainMeta meta;
    meta.test_fraction = opt.test_fraction;
    meta.sigma_scale = opt.sigma_scale;
    meta.copies_per_example = opt.copies_per_example;
    meta.seed = opt.seed;

    RunManifest m;
    m.command = "train";
    m.flags["copies"] = std::to_string(opt.copies_per_example);
    m.flags["examples"] = opt.examples;
    m.flags["model"] = opt.model_kind;
    m.flags["out"] = opt.out;
    m.flags["seed"] = fmtU64(opt.seed);
    m.flags["sigma"] = formatDouble(opt.sigma_scale);
    m.flags["test_fraction"] = formatDouble(opt.test_fraction);

    if (opt.model_kind == "lr") {
        m.flags["epochs"] = std::to_string(opt.lr.epochs);
        m.flags["l2"] = formatDouble(opt.lr.l2);
        m.flags["step"] = formatDouble(opt.lr.step);
        LogisticRegression model = LogisticRegression::train(x, y, split.norm, opt.lr);
        saveModel(opt.out, model, opt.lr, meta);
    } else if (opt.model_kind == "rf") {
        ForestHyper hy = opt.rf;
        hy.seed = deriveSeed(opt.seed, "rf");
        m.flags["max_depth"] = std::to_string(hy.max_depth);
        m.flags["min_leaf"] = std::to_string(hy.min_leaf);
        m.flags["mtry"] = std::to_string(hy.features_per_split);
        m.flags["trees"] = std::to_string(hy.n_trees);
        RandomForest model = RandomForest::train(x, y, hy, split.norm);
        saveModel(opt.out, model, meta);
    } else if (opt.model_kind == "gbt") {
        GbtHyper hy = opt.gbt;
        hy.seed = deriveSeed(opt.seed, "gbt");
        m.flags["eta"] = formatDouble(hy.eta);
        m.flags["gamma"] = formatDouble(hy.gamma);
        m.flags["lambda"] = formatDouble(hy.lambda);
        m.flags["max_depth"] = std::to_string(hy.max_depth);
        m.flags["rounds"] = std::to_string(hy.rounds);
        GradientBoostedTrees model = GradientBoostedTrees::train(x, y, hy, split.norm);
        saveModel(opt.out, model, meta);
    } else if (opt.model_kind == "crossgp") {
        NetConfig cfg = opt.net;
        cfg.seed = deriveSeed(opt.seed, "net");
        m.flags["batch"] = std::to_string(cfg.batch_size);
        m.flags["epochs"] = std::to_string(cfg.epochs);
        m.flags["hidden"] = std::to_string(opt.hidden);
        m.flags["lr"] = formatDouble(cfg.step_size);
        CrossGpNet model = CrossGpNet::train(x, y, split.norm, opt.hidden, cfg);
        saveModel(opt.out, model, cfg, meta);
    } else {
        throw ValidationError("unknown model '" + opt.model_kind +
                              "'; valid models: lr, rf, gbt, crossgp");
    }
    addInput(m, opt.examples);
    m.outputs = {opt.out};
    writeManifest(m, parentDir(opt.out));
}

void runEvaluate(const EvaluateOptions& opt) {
    LoadedModel loaded = loadModel(opt.model);
    const std::vector<LabeledExample> examples = readExamplesCsv(opt.examples);
    SplitDataset split = splitForMeta(examples, loaded.meta.test_fraction);
    const Eigen::MatrixXd x = featureMatrix(split.test);
    const Eigen::VectorXi y = labelVector(split.test);
    EvaluationReport rep = evaluate(*loaded.model, x, y);
    writeJsonFile(opt.report, reportToJson(rep, loaded.kind));
    logInfo("evaluated " + loaded.kind + " on " + std::to_string(rep.n_examples) +
            " test examples: accuracy " + formatDouble(rep.overall_accuracy));

    RunManifest m;
    m.command = "evaluate";
    m.flags["examples"] = opt.examples;
    m.flags["model"] = opt.model;
    m.flags["report"] = opt.report;
    m.seed = loaded.meta.seed;
    addInput(m, opt.model);
    addInput(m, opt.examples);
    m.outputs = {opt.report};
    writeManifest(m, parentDir(opt.report));
}

void runImportance(const ImportanceOptions& opt) {
    if (opt.method != "native" && opt.method != "permutation")
        throw ValidationError("unknown importance method '" + opt.method +
                              "'; valid methods: native, permutation");
    LoadedModel loaded = loadModel(opt.model);
    const std::vector<LabeledExample> examples = readExamplesCsv(opt.examples);
    SplitDataset split = splitForMeta(examples, loaded.meta.test_fraction);
    const Eigen::MatrixXd x = featureMatrix(split.test);
    const Eigen::VectorXi y = labelVector(split.test);

    ImportanceReport rep;
    if (opt.method == "native") {
        rep = nativeImportance(*loaded.model);
    } else {
        rep = permutationImportance(*loaded.model, x, y, opt.repeats,
                                    deriveSeed(opt.seed, "importance"));
    }
    json scores;
    const auto names = featureNames();
    for (int j = 0; j < kNumFeatures; ++j)
        scores[names[static_cast<std::size_t>(j)]] = rep.scores(j);
    json doc;
    doc["degenerate"] = rep.degenerate;
    doc["kind"] = loaded.kind;
    doc["method"] = rep.method;
    doc["scores"] = std::move(scores);
    doc["top3"] = rep.top3;
    writeJsonFile(opt.out, doc);
    logInfo("importance (" + rep.method + ") for " + loaded.kind + ": top3 " + rep.top3[0] +
            ", " + rep.top3[1] + ", " + rep.top3[2]);

    RunManifest m;
    m.command = "importance";
    m.flags["examples"] = opt.examples;
    m.flags["method"] = opt.method;
    m.flags["model"] = opt.model;
    m.flags["out"] = opt.out;
    m.flags["repeats"] = std::to_string(opt.repeats);
    m.flags["seed"] = fmtU64(opt.seed);
    m.seed = opt.seed;
    addInput(m, opt.model);
    addInput(m, opt.examples);
    m.outputs = {opt.out};
    writeManifest(m, parentDir(opt.out));
}

void runReport(const ReportOptions& opt) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(opt.reports_dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    }
    if (ec) throw IoError("cannot list " + opt.reports_dir + ": " + ec.message());
    std::sort(files.begin(), files.end());

    CsvWriter w(opt.out);
    w.row({"file", "kind", "class", "precision", "recall", "f1", "accuracy", "macro_precision",
           "n_examples"});
    auto cell = [](const json& v) { return v.is_null() ? std::string() : formatDouble(v.get<double>()); };
    int rows = 0;
    RunManifest m;
    m.command = "report";
    for (const std::string& file : files) {
        std::ifstream in(file);
        std::vector<std::vector<std::string>> pending;
        try {
            const json doc = json::parse(in);
            if (!doc.contains("classes") || !doc.contains("accuracy")) continue;
            const std::string base = fs::path(file).filename().string();
            for (int k = 0; k < kNumClasses; ++k) {
                const char* cls = className(static_cast<GlycemicClass>(k));
                const json& c = doc.at("classes").at(cls);
                pending.push_back({base, doc.at("kind").get<std::string>(), cls,
                                   cell(c.at("precision")), cell(c.at("recall")),
                                   cell(c.at("f1")),
                                   formatDouble(doc.at("accuracy").get<double>()),
                                   cell(doc.at("macro_precision")),
                                   std::to_string(doc.at("n_examples").get<int>())});
            }
        } catch (const json::exception&) {
            continue;  // not a report file, skip
        }
        for (const auto& row : pending) {
            w.row(row);
            ++rows;
        }
        addInput(m, file);
    }
    logInfo("summary with " + std::to_string(rows) + " rows written to " + opt.out);

    m.flags["out"] = opt.out;
    m.flags["reports"] = opt.reports_dir;
    m.outputs = {opt.out};
    writeManifest(m, parentDir(opt.out));
}

}  // namespace crossgp
