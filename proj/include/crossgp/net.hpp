#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crossgp/classifier.hpp"

namespace crossgp {

struct DenseLayer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;  // out
};

struct BnParams {
    Eigen::VectorXd gain;
    Eigen::VectorXd shift;
};

struct BranchLayer {
    DenseLayer dense;
    BnParams bn;
};

// All trainable parameters of the network, in their fixed flattening order.
struct NetParams {
    DenseLayer input;
    std::vector<BranchLayer> deep;     // 4 layers
    std::vector<BranchLayer> shallow;  // 2 layers
    Eigen::MatrixXd proj_deep;         // hidden x hidden
    Eigen::MatrixXd proj_shallow;
    Eigen::VectorXd score_v;           // hidden
    DenseLayer output;                 // 3 x hidden
};

// BatchNorm running statistics (buffers, not trained).
struct BnState {
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
};

struct NetConfig {
    int epochs = 300;
    int batch_size = 32;       // >= 2; train-mode BatchNorm needs batch statistics
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double bn_momentum = 0.9;
    std::uint64_t seed = 0;
    bool class_weighted = false;  // inverse-frequency loss weights, off by default
};

// Dual-branch classifier: shared input layer, a 4-layer deep branch and a
// 2-layer shallow branch (Dense -> BatchNorm -> ReLU each), additive
// attention fusing the two branch outputs, and a linear output layer.
class CrossGpNet : public Classifier {
public:
    static constexpr int kDeepLayers = 4;
    static constexpr int kShallowLayers = 2;
    static constexpr double kBnEpsilon = 1e-5;

    CrossGpNet() = default;
    // Freshly initialized parameters from the seeded stream.
    CrossGpNet(int input_dim, int hidden, std::uint64_t seed);

    struct BranchCache {
        std::vector<Eigen::MatrixXd> in;     // layer inputs
        std::vector<Eigen::MatrixXd> zhat;   // normalized pre-activations
        std::vector<Eigen::RowVectorXd> mu;  // batch means
        std::vector<Eigen::RowVectorXd> sd;  // sqrt(var + eps)
        std::vector<Eigen::MatrixXd> u;      // post-BN, pre-ReLU
        Eigen::MatrixXd out;
    };

    struct Cache {
        Eigen::MatrixXd x;
        Eigen::MatrixXd z0;  // input-layer pre-activation
        Eigen::MatrixXd a0;
        BranchCache deep;
        BranchCache shallow;
        Eigen::MatrixXd t_deep, t_shallow;  // tanh-projected branch outputs
        Eigen::VectorXd s_deep, s_shallow;  // attention scores
        Eigen::VectorXd a_deep, a_shallow;  // attention weights, sum to 1 per row
        Eigen::MatrixXd fused;
        Eigen::MatrixXd logits;
    };

    // Train-mode forward on an already standardized batch (B >= 2). Uses
    // batch statistics; does not touch the running stats (see
    // updateRunningStats), so repeated calls are pure.
    Eigen::MatrixXd forwardTrain(const Eigen::MatrixXd& xz, Cache& cache) const;

    // Infer-mode forward: running statistics only, per-example deterministic.
    Eigen::MatrixXd forwardInfer(const Eigen::MatrixXd& xz) const;

    void updateRunningStats(const Cache& cache, double momentum);

    // Mean softmax cross-entropy via the log-sum-exp form. class_w weights
    // each example by its label's entry, normalized by the total weight.
    static double crossEntropy(const Eigen::MatrixXd& logits, const Eigen::VectorXi& y,
                               const Eigen::Vector3d& class_w = Eigen::Vector3d::Ones());

    // Exact gradients of crossEntropy(forwardTrain(...)) for every parameter.
    NetParams backward(const Cache& cache, const Eigen::VectorXi& y,
                       const Eigen::Vector3d& class_w = Eigen::Vector3d::Ones()) const;

    static CrossGpNet train(const Eigen::MatrixXd& x_raw, const Eigen::VectorXi& y,
                            const Normalization& norm, int hidden, const NetConfig& cfg,
                            std::vector<double>* epoch_loss = nullptr);

    Eigen::Vector3d predictProba(const Eigen::VectorXd& features) const override;
    Eigen::MatrixXd predictProbaBatch(const Eigen::MatrixXd& x) const override;
    const char* kind() const override { return "crossgp"; }

    // Trainable parameter count; equals 8*H^2 + (d+23)*H + 3 for input
    // dimension d and hidden width H.
    int parameterCount() const;

    NetParams& params() { return params_; }
    const NetParams& params() const { return params_; }
    std::vector<BnState>& deepState() { return deep_state_; }
    std::vector<BnState>& shallowState() { return shallow_state_; }
    const std::vector<BnState>& deepState() const { return deep_state_; }
    const std::vector<BnState>& shallowState() const { return shallow_state_; }
    Normalization& norm() { return norm_; }
    const Normalization& norm() const { return norm_; }
    int hidden() const { return hidden_; }
    int inputDim() const { return input_dim_; }
    void setDims(int input_dim, int hidden) { input_dim_ = input_dim; hidden_ = hidden; }

private:
    NetParams params_;
    std::vector<BnState> deep_state_;
    std::vector<BnState> shallow_state_;
    Normalization norm_;
    int input_dim_ = 0;
    int hidden_ = 0;
};

// Contiguous storage spans of every trainable tensor, in fixed order; the
// basis for the optimizer state and finite-difference checks.
void forEachParamSpan(NetParams& p, const std::function<void(double*, std::size_t)>& fn);
NetParams zeroLike(const NetParams& p);

}  // namespace crossgp
