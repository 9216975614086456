// Feed-forward classifier with analytic gradients and Nesterov-momentum SGD.
//
// The network is a plain MLP: dense layers with relu or tanh on the hidden
// layers, linear logits on the output layer, softmax cross-entropy loss.
// All math is in doubles and every operation is deterministic given its
// inputs, so parameter trajectories are bitwise-reproducible.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amto/kernels.hpp"

namespace amto {

enum class InitScheme { he_uniform, xavier_uniform };

/// Architecture + initialization recipe. Two networks built from identical
/// specs have bitwise-identical initial parameters.
struct NetworkSpec {
    std::vector<int> layer_sizes;  // input dim, hidden dims..., class count
    Activation activation = Activation::relu;
    InitScheme init_scheme = InitScheme::he_uniform;
    std::uint64_t init_seed = 0;
};

/// Throws config_error unless layer_sizes has length >= 2 with every entry >= 1.
void validate_spec(const NetworkSpec& spec);

/// Number of weights + biases implied by the spec.
std::size_t param_count(const NetworkSpec& spec);

/// FNV-1a hash of the spec's canonical string form; identifies snapshot files.
std::uint64_t spec_hash(const NetworkSpec& spec);

/// Flat parameter state plus same-length momentum buffer. Layout: for each
/// layer l, the row-major weight block W_l [out x in] followed by the bias
/// block b_l [out].
struct ParamVector {
    std::vector<double> values;
    std::vector<double> momentum;
};

/// Offsets of each layer's weight and bias blocks in the flat vector.
struct LayerLayout {
    std::size_t weight_offset;
    std::size_t bias_offset;
    std::size_t in_dim;
    std::size_t out_dim;
};
std::vector<LayerLayout> param_layout(const NetworkSpec& spec);

/// Weights drawn from the named scheme (he_uniform: U[-sqrt(6/fan_in), +],
/// xavier_uniform: U[-sqrt(6/(fan_in+fan_out)), +]) using init_seed; biases
/// and momentum zero.
ParamVector init_params(const NetworkSpec& spec);

/// Class-probability matrix [n x C]; each row is a softmax distribution.
Matrix forward(const ParamVector& params, const NetworkSpec& spec, const Matrix& inputs);

struct LossGrad {
    double loss;                // batch-mean cross-entropy
    std::vector<double> grad;   // same length as params.values
};

/// Mean cross-entropy and its analytic gradient over a labeled batch.
/// Throws numeric_error on non-finite results, data_error on bad labels.
LossGrad loss_and_grad(const ParamVector& params, const NetworkSpec& spec,
                       const Matrix& inputs, const std::vector<int>& labels);

struct EvalResult {
    double loss;      // mean cross-entropy
    double accuracy;  // top-1, argmax ties broken toward the lowest class index
};

/// Loss + accuracy without touching parameters.
EvalResult evaluate(const ParamVector& params, const NetworkSpec& spec,
                    const Matrix& inputs, const std::vector<int>& labels);

/// Nesterov momentum step, fixed formulation:
///   v <- mu*v - lr*g;  theta <- theta + mu*v - lr*g.
/// With mu = 0 this reduces to plain SGD. Throws numeric_error if any
/// updated entry is non-finite.
void sgd_step(ParamVector& params, const std::vector<double>& grad, double lr,
              double momentum);

/// Step-decay schedule and mini-batch size shared by every task.
struct OptimizerConfig {
    double initial_lr = 1e-3;
    double momentum = 0.9;
    std::vector<long long> lr_milestones = {2000, 7000};  // ascending
    double lr_decay = 0.1;  // in [0,1]; 0 freezes training past a milestone
    int batch_size = 64;
};

void validate_optimizer(const OptimizerConfig& opt);

/// Effective learning rate at 1-based global step t:
/// initial_lr * lr_decay^(number of milestones <= t).
double lr_at(const OptimizerConfig& opt, long long step);

/// Little-endian flat binary snapshot: magic "AMTOPRM1", u32 version,
/// u32 flags (bit 0: momentum present), u64 spec hash, u64 count, then the
/// raw doubles (values, then momentum when present).
void save_snapshot(const std::string& path, const NetworkSpec& spec,
                   const ParamVector& params, bool include_momentum = false);
ParamVector load_snapshot(const std::string& path, const NetworkSpec& spec);

}  // namespace amto
