#include "crossgp/net.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "crossgp/error.hpp"
#include "crossgp/log.hpp"
#include "crossgp/math.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

namespace {

// Fan-in scaled uniform init, drawn row by row so the stream order is fixed.
void fillDense(DenseLayer& layer, int out, int in, Rng& rng) {
    layer.w.resize(out, in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j) layer.w(i, j) = rng.uniform(-bound, bound);
    layer.b = Eigen::VectorXd::Zero(out);
}

void fillSmallUniform(Eigen::MatrixXd& m, int rows, int cols, Rng& rng) {
    m.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-0.05, 0.05);
}

void initBranch(std::vector<BranchLayer>& branch, std::vector<BnState>& state, int layers,
                int hidden, Rng& rng) {
    branch.resize(layers);
    state.resize(layers);
    for (int j = 0; j < layers; ++j) {
        fillDense(branch[j].dense, hidden, hidden, rng);
        branch[j].bn.gain = Eigen::VectorXd::Ones(hidden);
        branch[j].bn.shift = Eigen::VectorXd::Zero(hidden);
        state[j].running_mean = Eigen::VectorXd::Zero(hidden);
        state[j].running_var = Eigen::VectorXd::Ones(hidden);
    }
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd reluMask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>().matrix();
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& x, const DenseLayer& layer) {
    return (x * layer.w.transpose()).rowwise() + layer.b.transpose();
}

}  // namespace

CrossGpNet::CrossGpNet(int input_dim, int hidden, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden) {
    if (input_dim < 1 || hidden < 1) throw ValidationError("net dimensions must be positive");
    Rng rng(seed);
    fillDense(params_.input, hidden, input_dim, rng);
    initBranch(params_.deep, deep_state_, kDeepLayers, hidden, rng);
    initBranch(params_.shallow, shallow_state_, kShallowLayers, hidden, rng);
    fillSmallUniform(params_.proj_deep, hidden, hidden, rng);
    fillSmallUniform(params_.proj_shallow, hidden, hidden, rng);
    Eigen::MatrixXd v;
    fillSmallUniform(v, hidden, 1, rng);
    params_.score_v = v.col(0);
    fillDense(params_.output, kNumClasses, hidden, rng);
    norm_.mean = Eigen::VectorXd::Zero(input_dim);
    norm_.std = Eigen::VectorXd::Ones(input_dim);
}

Eigen::MatrixXd CrossGpNet::forwardTrain(const Eigen::MatrixXd& xz, Cache& cache) const {
    if (xz.cols() != input_dim_) throw ValidationError("input dimension mismatch");
    if (xz.rows() < 2) throw ValidationError("train-mode forward needs a batch of at least 2");
    cache.x = xz;
    cache.z0 = affine(xz, params_.input);
    cache.a0 = relu(cache.z0);

    auto runBranch = [&](const std::vector<BranchLayer>& branch, BranchCache& bc) {
        const auto layers = branch.size();
        bc.in.resize(layers);
        bc.zhat.resize(layers);
        bc.mu.resize(layers);
        bc.sd.resize(layers);
        bc.u.resize(layers);
        Eigen::MatrixXd h = cache.a0;
        for (std::size_t j = 0; j < layers; ++j) {
            bc.in[j] = h;
            Eigen::MatrixXd z = affine(h, branch[j].dense);
            bc.mu[j] = z.colwise().mean();
            Eigen::MatrixXd centered = z.rowwise() - bc.mu[j];
            Eigen::RowVectorXd var = centered.array().square().colwise().mean();
            bc.sd[j] = (var.array() + kBnEpsilon).sqrt();
            bc.zhat[j] = centered.array().rowwise() / bc.sd[j].array();
            Eigen::MatrixXd u =
                bc.zhat[j].array().rowwise() * branch[j].bn.gain.transpose().array();
            bc.u[j] = u.rowwise() + branch[j].bn.shift.transpose();
            h = relu(bc.u[j]);
        }
        bc.out = h;
    };
    runBranch(params_.deep, cache.deep);
    runBranch(params_.shallow, cache.shallow);

    cache.t_deep = (cache.deep.out * params_.proj_deep.transpose()).array().tanh();
    cache.t_shallow = (cache.shallow.out * params_.proj_shallow.transpose()).array().tanh();
    cache.s_deep = cache.t_deep * params_.score_v;
    cache.s_shallow = cache.t_shallow * params_.score_v;
    // Two-way softmax over the branch scores, stabilized per row.
    Eigen::VectorXd m = cache.s_deep.cwiseMax(cache.s_shallow);
    Eigen::VectorXd ed = (cache.s_deep - m).array().exp();
    Eigen::VectorXd es = (cache.s_shallow - m).array().exp();
    cache.a_deep = ed.array() / (ed.array() + es.array());
    cache.a_shallow = es.array() / (ed.array() + es.array());
    cache.fused = (cache.deep.out.array().colwise() * cache.a_deep.array()) +
                  (cache.shallow.out.array().colwise() * cache.a_shallow.array());
    cache.logits = affine(cache.fused, params_.output);
    return cache.logits;
}

Eigen::MatrixXd CrossGpNet::forwardInfer(const Eigen::MatrixXd& xz) const {
    if (xz.cols() != input_dim_) throw ValidationError("input dimension mismatch");
    Eigen::MatrixXd a0 = relu(affine(xz, params_.input));

    auto runBranch = [&](const std::vector<BranchLayer>& branch,
                         const std::vector<BnState>& state) {
        Eigen::MatrixXd h = a0;
        for (std::size_t j = 0; j < branch.size(); ++j) {
            Eigen::MatrixXd z = affine(h, branch[j].dense);
            Eigen::RowVectorXd sd =
                (state[j].running_var.transpose().array() + kBnEpsilon).sqrt();
            Eigen::MatrixXd zhat =
                (z.rowwise() - state[j].running_mean.transpose()).array().rowwise() / sd.array();
            Eigen::MatrixXd u = zhat.array().rowwise() * branch[j].bn.gain.transpose().array();
            h = relu(Eigen::MatrixXd(u.rowwise() + branch[j].bn.shift.transpose()));
        }
        return h;
    };
    Eigen::MatrixXd hd = runBranch(params_.deep, deep_state_);
    Eigen::MatrixXd hs = runBranch(params_.shallow, shallow_state_);

    Eigen::VectorXd sd_score =
        ((hd * params_.proj_deep.transpose()).array().tanh().matrix()) * params_.score_v;
    Eigen::VectorXd ss_score =
        ((hs * params_.proj_shallow.transpose()).array().tanh().matrix()) * params_.score_v;
    Eigen::VectorXd m = sd_score.cwiseMax(ss_score);
    Eigen::VectorXd ed = (sd_score - m).array().exp();
    Eigen::VectorXd es = (ss_score - m).array().exp();
    Eigen::VectorXd ad = ed.array() / (ed.array() + es.array());
    Eigen::VectorXd as = es.array() / (ed.array() + es.array());
    Eigen::MatrixXd fused =
        (hd.array().colwise() * ad.array()) + (hs.array().colwise() * as.array());
    return affine(fused, params_.output);
}

void CrossGpNet::updateRunningStats(const Cache& cache, double momentum) {
    auto apply = [&](const BranchCache& bc, std::vector<BnState>& state) {
        for (std::size_t j = 0; j < state.size(); ++j) {
            Eigen::VectorXd var =
                (bc.sd[j].transpose().array().square() - kBnEpsilon).matrix();
            state[j].running_mean =
                momentum * state[j].running_mean + (1.0 - momentum) * bc.mu[j].transpose();
            state[j].running_var = momentum * state[j].running_var + (1.0 - momentum) * var;
        }
    };
    apply(cache.deep, deep_state_);
    apply(cache.shallow, shallow_state_);
}

double CrossGpNet::crossEntropy(const Eigen::MatrixXd& logits, const Eigen::VectorXi& y,
                                const Eigen::Vector3d& class_w) {
    const Eigen::Index n = logits.rows();
    Eigen::VectorXd lse = logSumExpRows(logits);
    double total = 0.0, weight = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = class_w(y(i));
        total += w * (lse(i) - logits(i, y(i)));
        weight += w;
    }
    return weight > 0.0 ? total / weight : 0.0;
}

NetParams CrossGpNet::backward(const Cache& cache, const Eigen::VectorXi& y,
                               const Eigen::Vector3d& class_w) const {
    const Eigen::Index n = cache.logits.rows();
    NetParams g = zeroLike(params_);

    Eigen::MatrixXd dlogits = softmaxRows(cache.logits);
    double weight = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) weight += class_w(y(i));
    for (Eigen::Index i = 0; i < n; ++i) {
        dlogits(i, y(i)) -= 1.0;
        dlogits.row(i) *= class_w(y(i)) / weight;
    }

    g.output.w = dlogits.transpose() * cache.fused;
    g.output.b = dlogits.colwise().sum().transpose();
    Eigen::MatrixXd dfused = dlogits * params_.output.w;

    // Attention: gradients flow into both branch outputs directly (convex
    // combination) and through the score softmax.
    Eigen::VectorXd dad = (dfused.array() * cache.deep.out.array()).rowwise().sum();
    Eigen::VectorXd das = (dfused.array() * cache.shallow.out.array()).rowwise().sum();
    Eigen::VectorXd dsd =
        cache.a_deep.array() * cache.a_shallow.array() * (dad - das).array();
    Eigen::VectorXd dss = -dsd;
    g.score_v = cache.t_deep.transpose() * dsd + cache.t_shallow.transpose() * dss;
    Eigen::MatrixXd dpre_td =
        (dsd * params_.score_v.transpose()).array() * (1.0 - cache.t_deep.array().square());
    Eigen::MatrixXd dpre_ts =
        (dss * params_.score_v.transpose()).array() * (1.0 - cache.t_shallow.array().square());
    g.proj_deep = dpre_td.transpose() * cache.deep.out;
    g.proj_shallow = dpre_ts.transpose() * cache.shallow.out;
    Eigen::MatrixXd dhd =
        (dfused.array().colwise() * cache.a_deep.array()).matrix() + dpre_td * params_.proj_deep;
    Eigen::MatrixXd dhs = (dfused.array().colwise() * cache.a_shallow.array()).matrix() +
                          dpre_ts * params_.proj_shallow;

    auto branchBackward = [&](const std::vector<BranchLayer>& branch, const BranchCache& bc,
                              std::vector<BranchLayer>& grad, Eigen::MatrixXd dout) {
        for (int j = static_cast<int>(branch.size()) - 1; j >= 0; --j) {
            Eigen::MatrixXd du = dout.array() * reluMask(bc.u[j]).array();
            grad[j].bn.gain = (du.array() * bc.zhat[j].array()).colwise().sum().transpose();
            grad[j].bn.shift = du.colwise().sum().transpose();
            Eigen::MatrixXd dzhat =
                du.array().rowwise() * branch[j].bn.gain.transpose().array();
            // Batch statistics take part in the normalization, so the
            // per-column means of dzhat and of dzhat*zhat feed back in.
            Eigen::RowVectorXd mean_dz = dzhat.colwise().mean();
            Eigen::RowVectorXd mean_dzz =
                (dzhat.array() * bc.zhat[j].array()).colwise().mean();
            Eigen::MatrixXd dz =
                ((dzhat.rowwise() - mean_dz).array() -
                 bc.zhat[j].array().rowwise() * mean_dzz.array())
                    .rowwise() /
                bc.sd[j].array();
            grad[j].dense.w = dz.transpose() * bc.in[j];
            grad[j].dense.b = dz.colwise().sum().transpose();
            dout = dz * branch[j].dense.w;
        }
        return dout;
    };
    g.deep.resize(params_.deep.size());
    g.shallow.resize(params_.shallow.size());
    Eigen::MatrixXd da0 = branchBackward(params_.deep, cache.deep, g.deep, dhd) +
                          branchBackward(params_.shallow, cache.shallow, g.shallow, dhs);
    Eigen::MatrixXd dz0 = da0.array() * reluMask(cache.z0).array();
    g.input.w = dz0.transpose() * cache.x;
    g.input.b = dz0.colwise().sum().transpose();
    return g;
}

void forEachParamSpan(NetParams& p, const std::function<void(double*, std::size_t)>& fn) {
    auto dense = [&](DenseLayer& layer) {
        fn(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
        fn(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
    };
    dense(p.input);
    for (auto& layer : p.deep) {
        dense(layer.dense);
        fn(layer.bn.gain.data(), static_cast<std::size_t>(layer.bn.gain.size()));
        fn(layer.bn.shift.data(), static_cast<std::size_t>(layer.bn.shift.size()));
    }
    for (auto& layer : p.shallow) {
        dense(layer.dense);
        fn(layer.bn.gain.data(), static_cast<std::size_t>(layer.bn.gain.size()));
        fn(layer.bn.shift.data(), static_cast<std::size_t>(layer.bn.shift.size()));
    }
    fn(p.proj_deep.data(), static_cast<std::size_t>(p.proj_deep.size()));
    fn(p.proj_shallow.data(), static_cast<std::size_t>(p.proj_shallow.size()));
    fn(p.score_v.data(), static_cast<std::size_t>(p.score_v.size()));
    dense(p.output);
}

NetParams zeroLike(const NetParams& p) {
    NetParams z = p;
    forEachParamSpan(z, [](double* d, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) d[i] = 0.0;
    });
    return z;
}

int CrossGpNet::parameterCount() const {
    NetParams copy = params_;
    int total = 0;
    forEachParamSpan(copy, [&](double*, std::size_t n) { total += static_cast<int>(n); });
    return total;
}

CrossGpNet CrossGpNet::train(const Eigen::MatrixXd& x_raw, const Eigen::VectorXi& y,
                             const Normalization& norm, int hidden, const NetConfig& cfg,
                             std::vector<double>* epoch_loss) {
    if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (cfg.batch_size < 2) throw ValidationError("batch_size must be >= 2");
    if (!(cfg.step_size >= 0.0)) throw ValidationError("step_size must be >= 0");
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
        throw ValidationError("adam betas must lie in [0, 1)");
    if (!(cfg.adam_eps > 0.0)) throw ValidationError("adam_eps must be positive");
    if (cfg.bn_momentum < 0.0 || cfg.bn_momentum > 1.0)
        throw ValidationError("bn_momentum must lie in [0, 1]");
    const Eigen::Index n = x_raw.rows();
    if (n < 2) throw ValidationError("training needs at least 2 examples");
    if (y.size() != n) throw ValidationError("feature/label count mismatch");

    Eigen::Vector3d class_w = Eigen::Vector3d::Ones();
    if (cfg.class_weighted) {
        Eigen::Vector3d counts = Eigen::Vector3d::Zero();
        for (Eigen::Index i = 0; i < n; ++i) counts(y(i)) += 1.0;
        for (int k = 0; k < kNumClasses; ++k)
            class_w(k) = counts(k) > 0.0 ? static_cast<double>(n) / (kNumClasses * counts(k))
                                         : 1.0;
    }

    CrossGpNet net(static_cast<int>(x_raw.cols()), hidden, deriveSeed(cfg.seed, "net-init"));
    net.norm_ = norm;
    Eigen::MatrixXd xz = standardizeRows(x_raw, norm.mean, norm.std);

    std::vector<std::pair<double*, std::size_t>> spans;
    forEachParamSpan(net.params_, [&](double* d, std::size_t s) { spans.emplace_back(d, s); });
    std::size_t total = 0;
    for (const auto& s : spans) total += s.second;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
    long step_count = 0;

    Rng order_rng(deriveSeed(cfg.seed, "net-shuffle"));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);

    Cache cache;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        double loss_sum = 0.0;
        Eigen::Index seen = 0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index bsz = std::min<Eigen::Index>(cfg.batch_size, n - start);
            if (bsz < 2) break;  // trailing sliver cannot supply batch statistics
            Eigen::MatrixXd xb(bsz, xz.cols());
            Eigen::VectorXi yb(bsz);
            for (Eigen::Index r = 0; r < bsz; ++r) {
                const int idx = order[static_cast<std::size_t>(start + r)];
                xb.row(r) = xz.row(idx);
                yb(r) = y(idx);
            }
            net.forwardTrain(xb, cache);
            net.updateRunningStats(cache, cfg.bn_momentum);
            loss_sum += crossEntropy(cache.logits, yb, class_w) * static_cast<double>(bsz);
            seen += bsz;
            NetParams grads = net.backward(cache, yb, class_w);
            std::vector<std::pair<double*, std::size_t>> gspans;
            forEachParamSpan(grads, [&](double* d, std::size_t s) { gspans.emplace_back(d, s); });

            ++step_count;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
            Eigen::Index off = 0;
            for (std::size_t s = 0; s < spans.size(); ++s) {
                double* p = spans[s].first;
                const double* gd = gspans[s].first;
                for (std::size_t i = 0; i < spans[s].second; ++i, ++off) {
                    m(off) = cfg.beta1 * m(off) + (1.0 - cfg.beta1) * gd[i];
                    v(off) = cfg.beta2 * v(off) + (1.0 - cfg.beta2) * gd[i] * gd[i];
                    p[i] -= cfg.step_size * (m(off) / bc1) / (std::sqrt(v(off) / bc2) + cfg.adam_eps);
                }
            }
        }
        const double epoch_mean = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
        if (!std::isfinite(epoch_mean))
            throw ValidationError("training diverged at epoch " + std::to_string(epoch));
        if (epoch_loss) epoch_loss->push_back(epoch_mean);
        if ((epoch + 1) % 50 == 0 || epoch + 1 == cfg.epochs)
            logDebug("net epoch " + std::to_string(epoch + 1) + " loss " +
                     std::to_string(epoch_mean));
    }
    return net;
}

Eigen::Vector3d CrossGpNet::predictProba(const Eigen::VectorXd& features) const {
    Eigen::MatrixXd x(1, features.size());
    x.row(0) = standardizeVec(features, norm_).transpose();
    Eigen::MatrixXd probs = softmaxRows(forwardInfer(x));
    return probs.row(0).transpose();
}

Eigen::MatrixXd CrossGpNet::predictProbaBatch(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd xz = standardizeRows(x, norm_.mean, norm_.std);
    return softmaxRows(forwardInfer(xz));
}

}  // namespace crossgp
