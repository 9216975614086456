#include "amto/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "amto/errors.hpp"
#include "amto/rng.hpp"

namespace amto {

namespace k = kernels::par;

void validate_spec(const NetworkSpec& spec) {
    if (spec.layer_sizes.size() < 2)
        throw config_error("network needs at least input and output layers");
    for (int s : spec.layer_sizes)
        if (s < 1) throw config_error("layer sizes must be >= 1");
}

std::vector<LayerLayout> param_layout(const NetworkSpec& spec) {
    std::vector<LayerLayout> layout;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const auto in = static_cast<std::size_t>(spec.layer_sizes[l]);
        const auto out = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
        layout.push_back({off, off + in * out, in, out});
        off += in * out + out;
    }
    return layout;
}

std::size_t param_count(const NetworkSpec& spec) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l)
        n += static_cast<std::size_t>(spec.layer_sizes[l]) * spec.layer_sizes[l + 1] +
             spec.layer_sizes[l + 1];
    return n;
}

std::uint64_t spec_hash(const NetworkSpec& spec) {
    char buf[64];
    std::string canon = "sizes:";
    for (int s : spec.layer_sizes) {
        std::snprintf(buf, sizeof buf, "%d,", s);
        canon += buf;
    }
    canon += spec.activation == Activation::relu ? ";act:relu" : ";act:tanh";
    canon += spec.init_scheme == InitScheme::he_uniform ? ";init:he" : ";init:xavier";
    std::snprintf(buf, sizeof buf, ";seed:%llu",
                  static_cast<unsigned long long>(spec.init_seed));
    canon += buf;

    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

ParamVector init_params(const NetworkSpec& spec) {
    validate_spec(spec);
    ParamVector pv;
    pv.values.assign(param_count(spec), 0.0);
    pv.momentum.assign(pv.values.size(), 0.0);

    Rng rng(spec.init_seed);
    for (const auto& L : param_layout(spec)) {
        const double fan_in = static_cast<double>(L.in_dim);
        const double fan_out = static_cast<double>(L.out_dim);
        const double limit = spec.init_scheme == InitScheme::he_uniform
                                 ? std::sqrt(6.0 / fan_in)
                                 : std::sqrt(6.0 / (fan_in + fan_out));
        double* w = pv.values.data() + L.weight_offset;
        for (std::size_t i = 0; i < L.in_dim * L.out_dim; ++i)
            w[i] = rng.uniform(-limit, limit);
        // biases stay zero
    }
    return pv;
}

namespace {

// Forward pass storing post-activation values per layer; A[0] is the input,
// A.back() holds the output-layer logits (pre-softmax).
std::vector<Matrix> forward_stack(const ParamVector& params, const NetworkSpec& spec,
                                  const Matrix& inputs) {
    if (inputs.cols != static_cast<std::size_t>(spec.layer_sizes.front()))
        throw data_error("input has " + std::to_string(inputs.cols) +
                         " features, network expects " +
                         std::to_string(spec.layer_sizes.front()));
    const auto layout = param_layout(spec);
    std::vector<Matrix> A(layout.size() + 1);
    A[0] = inputs;
    for (std::size_t l = 0; l < layout.size(); ++l) {
        const auto& L = layout[l];
        k::linear_forward(A[l], params.values.data() + L.weight_offset,
                          params.values.data() + L.bias_offset, L.out_dim, A[l + 1]);
        if (l + 1 < layout.size()) k::activate(A[l + 1], spec.activation);
    }
    return A;
}

// Per-sample cross-entropy from logits via log-sum-exp; never produces -inf
// for finite logits.
double cross_entropy_row(const double* z, std::size_t c, int label) {
    double m = z[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(z[j] - m);
    return m + std::log(sum) - z[static_cast<std::size_t>(label)];
}

int argmax_row(const double* z, std::size_t c) {
    int best = 0;
    for (std::size_t j = 1; j < c; ++j)
        if (z[j] > z[best]) best = static_cast<int>(j);
    return best;
}

void check_labels(const std::vector<int>& labels, std::size_t n, int classes) {
    if (labels.size() != n) throw data_error("label count does not match batch rows");
    for (int y : labels)
        if (y < 0 || y >= classes)
            throw data_error("label " + std::to_string(y) + " outside [0," +
                             std::to_string(classes) + ")");
}

}  // namespace

Matrix forward(const ParamVector& params, const NetworkSpec& spec, const Matrix& inputs) {
    auto A = forward_stack(params, spec, inputs);
    Matrix probs = std::move(A.back());
    k::softmax_rows(probs);
    return probs;
}

LossGrad loss_and_grad(const ParamVector& params, const NetworkSpec& spec,
                       const Matrix& inputs, const std::vector<int>& labels) {
    const int classes = spec.layer_sizes.back();
    check_labels(labels, inputs.rows, classes);
    const auto layout = param_layout(spec);
    auto A = forward_stack(params, spec, inputs);

    const std::size_t n = inputs.rows;
    const Matrix& logits = A.back();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        loss += cross_entropy_row(logits.row(i), logits.cols, labels[i]);
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw numeric_error("non-finite training loss");

    LossGrad out;
    out.loss = loss;
    out.grad.assign(params.values.size(), 0.0);

    // dZ for the output layer: (softmax - onehot) / n.
    Matrix dZ = logits;
    k::softmax_rows(dZ);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* d = dZ.row(i);
        for (std::size_t j = 0; j < dZ.cols; ++j) d[j] *= inv_n;
        d[static_cast<std::size_t>(labels[i])] -= inv_n;
    }

    Matrix dX;
    for (std::size_t l = layout.size(); l-- > 0;) {
        const auto& L = layout[l];
        k::grad_weights(dZ, A[l], out.grad.data() + L.weight_offset,
                        out.grad.data() + L.bias_offset);
        if (l > 0) {
            k::grad_inputs(dZ, params.values.data() + L.weight_offset, L.in_dim, dX);
            k::activate_backward(A[l], spec.activation, dX);
            dZ = std::move(dX);
        }
    }

    for (double g : out.grad)
        if (!std::isfinite(g)) throw numeric_error("non-finite gradient entry");
    return out;
}

EvalResult evaluate(const ParamVector& params, const NetworkSpec& spec,
                    const Matrix& inputs, const std::vector<int>& labels) {
    const int classes = spec.layer_sizes.back();
    check_labels(labels, inputs.rows, classes);
    auto A = forward_stack(params, spec, inputs);
    const Matrix& logits = A.back();
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < inputs.rows; ++i) {
        loss += cross_entropy_row(logits.row(i), logits.cols, labels[i]);
        if (argmax_row(logits.row(i), logits.cols) == labels[i]) ++correct;
    }
    return {loss / static_cast<double>(inputs.rows),
            static_cast<double>(correct) / static_cast<double>(inputs.rows)};
}

void sgd_step(ParamVector& params, const std::vector<double>& grad, double lr,
              double momentum) {
    if (grad.size() != params.values.size())
        throw data_error("gradient length does not match parameter count");
    double* th = params.values.data();
    double* v = params.momentum.data();
    const double* g = grad.data();
    const std::size_t n = params.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        th[i] += momentum * v[i] - lr * g[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(th[i]) || !std::isfinite(v[i]))
            throw numeric_error("non-finite parameter after SGD step");
}

void validate_optimizer(const OptimizerConfig& opt) {
    if (opt.initial_lr <= 0.0) throw config_error("initial_lr must be positive");
    if (opt.momentum < 0.0 || opt.momentum >= 1.0)
        throw config_error("momentum must be in [0,1)");
    if (opt.lr_decay < 0.0 || opt.lr_decay > 1.0)
        throw config_error("lr_decay must be in [0,1]");
    if (opt.batch_size < 1) throw config_error("batch_size must be >= 1");
    if (!std::is_sorted(opt.lr_milestones.begin(), opt.lr_milestones.end()))
        throw config_error("lr_milestones must be ascending");
}

double lr_at(const OptimizerConfig& opt, long long step) {
    double lr = opt.initial_lr;
    for (long long m : opt.lr_milestones)
        if (m <= step) lr *= opt.lr_decay;
    return lr;
}

namespace {
constexpr char kSnapshotMagic[8] = {'A', 'M', 'T', 'O', 'P', 'R', 'M', '1'};

template <typename T>
void write_pod(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T read_pod(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
}  // namespace

void save_snapshot(const std::string& path, const NetworkSpec& spec,
                   const ParamVector& params, bool include_momentum) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error("cannot open snapshot file for writing: " + path);
    os.write(kSnapshotMagic, sizeof kSnapshotMagic);
    write_pod<std::uint32_t>(os, 1);
    write_pod<std::uint32_t>(os, include_momentum ? 1u : 0u);
    write_pod<std::uint64_t>(os, spec_hash(spec));
    write_pod<std::uint64_t>(os, params.values.size());
    os.write(reinterpret_cast<const char*>(params.values.data()),
             static_cast<std::streamsize>(params.values.size() * sizeof(double)));
    if (include_momentum)
        os.write(reinterpret_cast<const char*>(params.momentum.data()),
                 static_cast<std::streamsize>(params.momentum.size() * sizeof(double)));
    if (!os) throw data_error("snapshot write failed: " + path);
}

ParamVector load_snapshot(const std::string& path, const NetworkSpec& spec) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open snapshot file: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0)
        throw data_error("not a parameter snapshot: " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != 1) throw data_error("unsupported snapshot version");
    const auto flags = read_pod<std::uint32_t>(is);
    const auto hash = read_pod<std::uint64_t>(is);
    if (hash != spec_hash(spec))
        throw data_error("snapshot was written for a different network spec");
    const auto count = read_pod<std::uint64_t>(is);
    if (count != param_count(spec)) throw data_error("snapshot length mismatch");

    ParamVector pv;
    pv.values.resize(count);
    pv.momentum.assign(count, 0.0);
    is.read(reinterpret_cast<char*>(pv.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (flags & 1u)
        is.read(reinterpret_cast<char*>(pv.momentum.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw data_error("snapshot truncated: " + path);
    return pv;
}

}  // namespace amto
