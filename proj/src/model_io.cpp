#include "crossgp/model_io.hpp"

#include <fstream>

#include "json.hpp"

#include "crossgp/error.hpp"

namespace crossgp {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json jVec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json jMat(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vecFromJ(const json& a) {
    if (!a.is_array()) throw ValidationError("model.json: expected array");
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

Eigen::MatrixXd matFromJ(const json& a) {
    if (!a.is_array() || a.empty()) throw ValidationError("model.json: expected matrix");
    const std::size_t rows = a.size();
    const std::size_t cols = a[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (a[i].size() != cols) throw ValidationError("model.json: ragged matrix");
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
    }
    return m;
}

json jNode(const TreeNode& n) {
    json o;
    o["feature"] = n.feature;
    o["gain"] = n.gain;
    o["left"] = n.left;
    o["probs"] = jVec(n.probs);
    o["right"] = n.right;
    o["threshold"] = n.threshold;
    o["weight"] = n.weight;
    return o;
}

TreeNode nodeFromJ(const json& o) {
    TreeNode n;
    n.feature = o.at("feature").get<int>();
    n.gain = o.at("gain").get<double>();
    n.left = o.at("left").get<int>();
    n.probs = vecFromJ(o.at("probs"));
    n.right = o.at("right").get<int>();
    n.threshold = o.at("threshold").get<double>();
    n.weight = o.at("weight").get<double>();
    return n;
}

json jTree(const DecisionTree& t) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) nodes.push_back(jNode(n));
    return json{{"nodes", std::move(nodes)}};
}

DecisionTree treeFromJ(const json& o) {
    DecisionTree t;
    for (const json& n : o.at("nodes")) t.nodes.push_back(nodeFromJ(n));
    if (t.nodes.empty()) throw ValidationError("model.json: empty tree");
    return t;
}

json jNorm(const Normalization& norm) {
    return json{{"mean", jVec(norm.mean)}, {"std", jVec(norm.std)}};
}

Normalization normFromJ(const json& o) {
    Normalization n;
    n.mean = vecFromJ(o.at("mean"));
    n.std = vecFromJ(o.at("std"));
    if (n.mean.size() != n.std.size())
        throw ValidationError("model.json: normalization size mismatch");
    return n;
}

json jMeta(const TrainMeta& meta) {
    json o;
    o["copies_per_example"] = meta.copies_per_example;
    o["seed"] = meta.seed;
    o["sigma_scale"] = meta.sigma_scale;
    o["test_fraction"] = meta.test_fraction;
    return o;
}

TrainMeta metaFromJ(const json& o) {
    TrainMeta m;
    m.copies_per_example = o.at("copies_per_example").get<int>();
    m.seed = o.at("seed").get<std::uint64_t>();
    m.sigma_scale = o.at("sigma_scale").get<double>();
    m.test_fraction = o.at("test_fraction").get<double>();
    return m;
}

void writeEnvelope(const std::string& path, const char* kind, json hyper, const json& norm,
                   json params, const TrainMeta& meta) {
    json doc;
    doc["hyper"] = std::move(hyper);
    doc["kind"] = kind;
    doc["normalization"] = norm;
    doc["params"] = std::move(params);
    doc["schema_version"] = kSchemaVersion;
    doc["train_meta"] = jMeta(meta);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

json jDense(const DenseLayer& layer) {
    return json{{"b", jVec(layer.b)}, {"w", jMat(layer.w)}};
}

DenseLayer denseFromJ(const json& o) {
    DenseLayer d;
    d.w = matFromJ(o.at("w"));
    d.b = vecFromJ(o.at("b"));
    if (d.b.size() != d.w.rows()) throw ValidationError("model.json: dense layer shape mismatch");
    return d;
}

}  // namespace

void saveModel(const std::string& path, const LogisticRegression& m, const LogisticHyper& hyper,
               const TrainMeta& meta) {
    json h;
    h["epochs"] = hyper.epochs;
    h["l2"] = hyper.l2;
    h["step"] = hyper.step;
    json p;
    p["intercepts"] = jVec(m.intercepts());
    p["weights"] = jMat(m.weights());
    writeEnvelope(path, m.kind(), std::move(h), jNorm(m.norm()), std::move(p), meta);
}

void saveModel(const std::string& path, const RandomForest& m, const TrainMeta& meta) {
    const ForestHyper& hy = m.hyper();
    json h;
    h["bootstrap"] = hy.bootstrap;
    h["features_per_split"] = hy.features_per_split;
    h["max_depth"] = hy.max_depth;
    h["min_leaf"] = hy.min_leaf;
    h["n_trees"] = hy.n_trees;
    h["seed"] = hy.seed;
    json trees = json::array();
    for (const DecisionTree& t : m.trees()) trees.push_back(jTree(t));
    writeEnvelope(path, m.kind(), std::move(h), jNorm(m.norm()),
                  json{{"trees", std::move(trees)}}, meta);
}

void saveModel(const std::string& path, const GradientBoostedTrees& m, const TrainMeta& meta) {
    const GbtHyper& hy = m.hyper();
    json h;
    h["eta"] = hy.eta;
    h["gamma"] = hy.gamma;
    h["lambda"] = hy.lambda;
    h["max_depth"] = hy.max_depth;
    h["rounds"] = hy.rounds;
    h["seed"] = hy.seed;
    json rounds = json::array();
    for (const auto& round : m.rounds()) {
        json r = json::array();
        for (const DecisionTree& t : round) r.push_back(jTree(t));
        rounds.push_back(std::move(r));
    }
    json p;
    p["base_score"] = jVec(m.baseScore());
    p["rounds"] = std::move(rounds);
    writeEnvelope(path, m.kind(), std::move(h), jNorm(m.norm()), std::move(p), meta);
}

void saveModel(const std::string& path, const CrossGpNet& m, const NetConfig& cfg,
               const TrainMeta& meta) {
    json h;
    h["adam_eps"] = cfg.adam_eps;
    h["batch_size"] = cfg.batch_size;
    h["beta1"] = cfg.beta1;
    h["beta2"] = cfg.beta2;
    h["bn_momentum"] = cfg.bn_momentum;
    h["class_weighted"] = cfg.class_weighted;
    h["epochs"] = cfg.epochs;
    h["hidden"] = m.hidden();
    h["seed"] = cfg.seed;
    h["step_size"] = cfg.step_size;

    auto branchJ = [&](const std::vector<BranchLayer>& branch, const std::vector<BnState>& state) {
        json arr = json::array();
        for (std::size_t j = 0; j < branch.size(); ++j) {
            json layer;
            layer["b"] = jVec(branch[j].dense.b);
            layer["bn_gain"] = jVec(branch[j].bn.gain);
            layer["bn_shift"] = jVec(branch[j].bn.shift);
            layer["running_mean"] = jVec(state[j].running_mean);
            layer["running_var"] = jVec(state[j].running_var);
            layer["w"] = jMat(branch[j].dense.w);
            arr.push_back(std::move(layer));
        }
        return arr;
    };
    const NetParams& pr = m.params();
    json p;
    p["deep"] = branchJ(pr.deep, m.deepState());
    p["input"] = jDense(pr.input);
    p["output"] = jDense(pr.output);
    p["proj_deep"] = jMat(pr.proj_deep);
    p["proj_shallow"] = jMat(pr.proj_shallow);
    p["score_v"] = jVec(pr.score_v);
    p["shallow"] = branchJ(pr.shallow, m.shallowState());
    writeEnvelope(path, m.kind(), std::move(h), jNorm(m.norm()), std::move(p), meta);
}

LoadedModel loadModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": invalid model JSON: " + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != kSchemaVersion)
            throw ValidationError(path + ": unsupported schema_version");
        LoadedModel loaded;
        loaded.kind = doc.at("kind").get<std::string>();
        loaded.meta = metaFromJ(doc.at("train_meta"));
        const Normalization norm = normFromJ(doc.at("normalization"));
        const json& p = doc.at("params");
        const json& h = doc.at("hyper");

        if (loaded.kind == "lr") {
            loaded.model = std::make_unique<LogisticRegression>(
                matFromJ(p.at("weights")), Eigen::Vector3d(vecFromJ(p.at("intercepts"))), norm);
        } else if (loaded.kind == "rf") {
            ForestHyper hy;
            hy.bootstrap = h.at("bootstrap").get<bool>();
            hy.features_per_split = h.at("features_per_split").get<int>();
            hy.max_depth = h.at("max_depth").get<int>();
            hy.min_leaf = h.at("min_leaf").get<int>();
            hy.n_trees = h.at("n_trees").get<int>();
            hy.seed = h.at("seed").get<std::uint64_t>();
            std::vector<DecisionTree> trees;
            for (const json& t : p.at("trees")) trees.push_back(treeFromJ(t));
            loaded.model = std::make_unique<RandomForest>(std::move(trees), hy, norm);
        } else if (loaded.kind == "gbt") {
            GbtHyper hy;
            hy.eta = h.at("eta").get<double>();
            hy.gamma = h.at("gamma").get<double>();
            hy.lambda = h.at("lambda").get<double>();
            hy.max_depth = h.at("max_depth").get<int>();
            hy.rounds = h.at("rounds").get<int>();
            hy.seed = h.at("seed").get<std::uint64_t>();
            std::vector<GradientBoostedTrees::Round> rounds;
            for (const json& r : p.at("rounds")) {
                if (r.size() != static_cast<std::size_t>(kNumClasses))
                    throw ValidationError(path + ": boosting round must hold one tree per class");
                GradientBoostedTrees::Round round;
                for (std::size_t k = 0; k < static_cast<std::size_t>(kNumClasses); ++k)
                    round[k] = treeFromJ(r[k]);
                rounds.push_back(std::move(round));
            }
            loaded.model = std::make_unique<GradientBoostedTrees>(
                Eigen::Vector3d(vecFromJ(p.at("base_score"))), std::move(rounds), hy, norm);
        } else if (loaded.kind == "crossgp") {
            auto net = std::make_unique<CrossGpNet>();
            NetParams& pr = net->params();
            pr.input = denseFromJ(p.at("input"));
            pr.output = denseFromJ(p.at("output"));
            pr.proj_deep = matFromJ(p.at("proj_deep"));
            pr.proj_shallow = matFromJ(p.at("proj_shallow"));
            pr.score_v = vecFromJ(p.at("score_v"));
            auto branchFromJ = [&](const json& arr, std::vector<BranchLayer>& branch,
                                   std::vector<BnState>& state, std::size_t expected) {
                if (arr.size() != expected)
                    throw ValidationError(path + ": wrong branch depth in model JSON");
                branch.resize(expected);
                state.resize(expected);
                for (std::size_t j = 0; j < expected; ++j) {
                    branch[j].dense = denseFromJ(arr[j]);
                    branch[j].bn.gain = vecFromJ(arr[j].at("bn_gain"));
                    branch[j].bn.shift = vecFromJ(arr[j].at("bn_shift"));
                    state[j].running_mean = vecFromJ(arr[j].at("running_mean"));
                    state[j].running_var = vecFromJ(arr[j].at("running_var"));
                }
            };
            branchFromJ(p.at("deep"), pr.deep, net->deepState(), CrossGpNet::kDeepLayers);
            branchFromJ(p.at("shallow"), pr.shallow, net->shallowState(),
                        CrossGpNet::kShallowLayers);
            net->norm() = norm;
            net->setDims(static_cast<int>(pr.input.w.cols()), h.at("hidden").get<int>());
            if (pr.input.w.rows() != net->hidden())
                throw ValidationError(path + ": hidden width inconsistent with input layer");
            loaded.model = std::move(net);
        } else {
            throw ValidationError(path + ": unknown model kind '" + loaded.kind + "'");
        }
        return loaded;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": model JSON missing field: " + e.what());
    }
}

}  // namespace crossgp
