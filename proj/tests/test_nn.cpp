#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <vector>

#include "amto/data.hpp"
#include "amto/errors.hpp"
#include "amto/nn.hpp"
#include "amto/rng.hpp"

using namespace amto;

namespace {

// Independent forward-pass oracle: unflattens via the documented layout and
// evaluates sample by sample with its own loops (no shared code with the
// library's batched kernels).
std::vector<double> oracle_forward_sample(const ParamVector& pv, const NetworkSpec& spec,
                                          const std::vector<double>& x) {
    std::vector<double> a = x;
    const auto layout = param_layout(spec);
    for (std::size_t l = 0; l < layout.size(); ++l) {
        const auto& L = layout[l];
        std::vector<double> z(L.out_dim);
        for (std::size_t j = 0; j < L.out_dim; ++j) {
            long double acc = pv.values[L.bias_offset + j];
            for (std::size_t k = 0; k < L.in_dim; ++k)
                acc += static_cast<long double>(pv.values[L.weight_offset + j * L.in_dim + k]) *
                       a[k];
            z[j] = static_cast<double>(acc);
        }
        if (l + 1 < layout.size()) {
            for (auto& v : z)
                v = spec.activation == Activation::relu ? (v > 0 ? v : 0) : std::tanh(v);
        } else {
            long double m = z[0];
            for (double v : z) m = std::max<long double>(m, v);
            long double sum = 0.0L;
            for (auto& v : z) sum += expl(v - m);
            for (auto& v : z) v = static_cast<double>(expl(v - m) / sum);
        }
        a = std::move(z);
    }
    return a;
}

Matrix random_inputs(std::size_t n, std::size_t d, Rng& rng) {
    Matrix X(n, d);
    for (auto& v : X.data) v = rng.uniform(-1.5, 1.5);
    return X;
}

std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
    std::vector<int> y(n);
    for (auto& v : y)
        v = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(classes)));
    return y;
}

// Central finite differences against the analytic gradient. Relative error
// uses a 1e-4 floor so near-zero entries compare absolutely.
double max_fd_error(const NetworkSpec& spec, const ParamVector& pv, const Matrix& X,
                    const std::vector<int>& y, double h = 1e-5) {
    const LossGrad lg = loss_and_grad(pv, spec, X, y);
    ParamVector probe = pv;
    double worst = 0.0;
    for (std::size_t i = 0; i < pv.values.size(); ++i) {
        const double saved = probe.values[i];
        probe.values[i] = saved + h;
        const double lp = loss_and_grad(probe, spec, X, y).loss;
        probe.values[i] = saved - h;
        const double lm = loss_and_grad(probe, spec, X, y).loss;
        probe.values[i] = saved;
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(lg.grad[i]), 1e-4});
        worst = std::max(worst, std::abs(numeric - lg.grad[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("parameter count for [2,3,2] is 17") {
    NetworkSpec spec{{2, 3, 2}, Activation::relu, InitScheme::he_uniform, 1};
    CHECK(param_count(spec) == 17);
    CHECK(init_params(spec).values.size() == 17);
    CHECK(init_params(spec).momentum.size() == 17);
}

TEST_CASE("identical specs give bitwise-identical initial parameters") {
    NetworkSpec spec{{4, 8, 3}, Activation::tanh, InitScheme::xavier_uniform, 99};
    const ParamVector a = init_params(spec);
    const ParamVector b = init_params(spec);
    CHECK(a.values == b.values);
    CHECK(a.momentum == b.momentum);
    spec.init_seed = 100;
    CHECK(init_params(spec).values != a.values);
}

TEST_CASE("he_uniform draws stay inside the fan-in bound") {
    // fan_in = 100 -> every weight in [-sqrt(6/100), +sqrt(6/100)]
    NetworkSpec spec{{100, 1000, 2}, Activation::relu, InitScheme::he_uniform, 5};
    const ParamVector pv = init_params(spec);
    const double bound = std::sqrt(6.0 / 100.0);
    const auto layout = param_layout(spec);
    REQUIRE(layout[0].in_dim * layout[0].out_dim >= 100000);
    for (std::size_t i = 0; i < layout[0].in_dim * layout[0].out_dim; ++i) {
        CHECK(pv.values[layout[0].weight_offset + i] <= bound);
        CHECK(pv.values[layout[0].weight_offset + i] >= -bound);
    }
    // biases zero, momentum zero
    for (const auto& L : layout)
        for (std::size_t j = 0; j < L.out_dim; ++j)
            CHECK(pv.values[L.bias_offset + j] == 0.0);
    for (double m : pv.momentum) CHECK(m == 0.0);
}

TEST_CASE("all-zero parameters predict uniformly and lose ln(C)") {
    NetworkSpec spec{{3, 5, 4}, Activation::relu, InitScheme::he_uniform, 1};
    ParamVector pv = init_params(spec);
    std::fill(pv.values.begin(), pv.values.end(), 0.0);
    Rng rng(2);
    const Matrix X = random_inputs(6, 3, rng);
    const Matrix P = forward(pv, spec, X);
    for (std::size_t i = 0; i < P.rows; ++i)
        for (std::size_t j = 0; j < P.cols; ++j)
            CHECK(P(i, j) == doctest::Approx(0.25).epsilon(1e-12));
    const std::vector<int> y = {0, 1, 2, 3, 0, 1};
    CHECK(loss_and_grad(pv, spec, X, y).loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("equal logits give a 50/50 split for any shift") {
    // a single input with C=2 and logits (a, a) must map to (0.5, 0.5)
    NetworkSpec spec{{1, 2}, Activation::relu, InitScheme::he_uniform, 1};
    ParamVector pv = init_params(spec);
    pv.values = {3.7, 3.7, -1.25, -1.25};  // W = [[3.7],[3.7]], b = (-1.25,-1.25)
    Matrix X(1, 1);
    X.data = {2.0};
    const Matrix P = forward(pv, spec, X);
    CHECK(P(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(P(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward matches the independent per-sample oracle") {
    Rng rng(12);
    for (int rep = 0; rep < 10; ++rep) {
        const NetworkSpec spec{{3, 6, 4, 3},
                               rep % 2 ? Activation::relu : Activation::tanh,
                               InitScheme::xavier_uniform,
                               1000 + static_cast<std::uint64_t>(rep)};
        const ParamVector pv = init_params(spec);
        const Matrix X = random_inputs(5, 3, rng);
        const Matrix P = forward(pv, spec, X);
        for (std::size_t i = 0; i < X.rows; ++i) {
            std::vector<double> x(X.row(i), X.row(i) + X.cols);
            const auto expected = oracle_forward_sample(pv, spec, x);
            for (std::size_t j = 0; j < P.cols; ++j)
                CHECK(P(i, j) == doctest::Approx(expected[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward rows are valid distributions") {
    Rng rng(77);
    const NetworkSpec spec{{4, 16, 5}, Activation::relu, InitScheme::he_uniform, 3};
    const ParamVector pv = init_params(spec);
    const Matrix X = random_inputs(40, 4, rng);
    const Matrix P = forward(pv, spec, X);
    for (std::size_t i = 0; i < P.rows; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < P.cols; ++j) {
            CHECK(P(i, j) >= 0.0);
            sum += P(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(31);
    for (int rep = 0; rep < 4; ++rep) {
        const NetworkSpec spec{{3, 8, 6, 3},
                               rep % 2 ? Activation::relu : Activation::tanh,
                               InitScheme::he_uniform,
                               40 + static_cast<std::uint64_t>(rep)};
        REQUIRE(param_count(spec) <= 1000);
        const ParamVector pv = init_params(spec);
        const Matrix X = random_inputs(8, 3, rng);
        const std::vector<int> y = random_labels(8, 3, rng);
        CHECK(max_fd_error(spec, pv, X, y) < 1e-4);
    }
}

TEST_CASE("duplicating every sample leaves loss and gradient unchanged") {
    Rng rng(8);
    const NetworkSpec spec{{2, 5, 3}, Activation::tanh, InitScheme::he_uniform, 17};
    const ParamVector pv = init_params(spec);
    const Matrix X = random_inputs(6, 2, rng);
    const std::vector<int> y = random_labels(6, 3, rng);

    Matrix X2(12, 2);
    std::vector<int> y2(12);
    for (int copy = 0; copy < 2; ++copy)
        for (std::size_t i = 0; i < 6; ++i) {
            std::copy(X.row(i), X.row(i) + 2, X2.row(copy * 6 + i));
            y2[copy * 6 + i] = y[i];
        }

    const LossGrad a = loss_and_grad(pv, spec, X, y);
    const LossGrad b = loss_and_grad(pv, spec, X2, y2);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-13));
    for (std::size_t i = 0; i < a.grad.size(); ++i)
        CHECK(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-12));
}

TEST_CASE("labels outside [0,C) are rejected") {
    const NetworkSpec spec{{2, 3, 2}, Activation::relu, InitScheme::he_uniform, 1};
    const ParamVector pv = init_params(spec);
    Matrix X(1, 2);
    X.data = {0.1, 0.2};
    CHECK_THROWS_AS(loss_and_grad(pv, spec, X, {2}), data_error);
    CHECK_THROWS_AS(loss_and_grad(pv, spec, X, {-1}), data_error);
}

TEST_CASE("nesterov step follows the documented recurrence on a quadratic") {
    // J(theta) = theta^2/2, grad = theta, lr = 0.1, mu = 0.9, theta0 = 1.
    // v <- mu v - lr g; theta <- theta + mu v - lr g, iterated independently.
    NetworkSpec spec{{1, 1}, Activation::relu, InitScheme::he_uniform, 1};
    ParamVector pv = init_params(spec);
    pv.values = {1.0, 0.0};  // weight is theta; keep bias frozen at 0
    double theta = 1.0, v = 0.0;
    const double lr = 0.1, mu = 0.9;
    std::vector<double> expected;
    for (int step = 0; step < 3; ++step) {
        const double g = theta;
        v = mu * v - lr * g;
        theta = theta + mu * v - lr * g;
        expected.push_back(theta);
    }
    CHECK(expected[0] == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(expected[1] == doctest::Approx(0.5751).epsilon(1e-12));
    CHECK(expected[2] == doctest::Approx(0.327321).epsilon(1e-12));

    for (int step = 0; step < 3; ++step) {
        sgd_step(pv, {pv.values[0], 0.0}, lr, mu);
        CHECK(pv.values[0] == doctest::Approx(expected[static_cast<std::size_t>(step)])
                                  .epsilon(1e-15));
    }
}

TEST_CASE("zero momentum reduces to plain SGD and zero gradient is a fixed point") {
    NetworkSpec spec{{2, 2}, Activation::relu, InitScheme::he_uniform, 4};
    ParamVector pv = init_params(spec);
    const std::vector<double> before = pv.values;
    const std::vector<double> g = {0.5, -0.25, 1.0, 0.0, 0.125, -1.5};
    sgd_step(pv, g, 0.2, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(pv.values[i] == doctest::Approx(before[i] - 0.2 * g[i]).epsilon(1e-15));

    ParamVector fixed = init_params(spec);
    const std::vector<double> zero(g.size(), 0.0);
    const std::vector<double> snapshot = fixed.values;
    sgd_step(fixed, zero, 0.3, 0.9);
    CHECK(fixed.values == snapshot);
}

TEST_CASE("non-finite updates are hard errors") {
    NetworkSpec spec{{1, 1}, Activation::relu, InitScheme::he_uniform, 1};
    ParamVector pv = init_params(spec);
    const std::vector<double> g = {std::numeric_limits<double>::infinity(), 0.0};
    CHECK_THROWS_AS(sgd_step(pv, g, 0.1, 0.0), numeric_error);
}

TEST_CASE("learning rate schedule counts milestones at or before the step") {
    OptimizerConfig opt;
    opt.initial_lr = 1e-3;
    opt.lr_decay = 0.1;
    opt.lr_milestones = {2000, 7000};
    CHECK(lr_at(opt, 1) == doctest::Approx(1e-3));
    CHECK(lr_at(opt, 1999) == doctest::Approx(1e-3));
    CHECK(lr_at(opt, 2000) == doctest::Approx(1e-4));
    CHECK(lr_at(opt, 6999) == doctest::Approx(1e-4));
    CHECK(lr_at(opt, 7000) == doctest::Approx(1e-5));
    CHECK(lr_at(opt, 100000) == doctest::Approx(1e-5));
}

TEST_CASE("snapshot files round-trip and reject mismatched specs") {
    const NetworkSpec spec{{3, 4, 2}, Activation::tanh, InitScheme::he_uniform, 123};
    ParamVector pv = init_params(spec);
    Rng rng(6);
    for (auto& m : pv.momentum) m = rng.uniform(-1, 1);

    const auto path = (std::filesystem::temp_directory_path() / "amto_snap_test.bin").string();
    save_snapshot(path, spec, pv, true);
    const ParamVector back = load_snapshot(path, spec);
    CHECK(back.values == pv.values);
    CHECK(back.momentum == pv.momentum);

    save_snapshot(path, spec, pv, false);
    const ParamVector wo = load_snapshot(path, spec);
    CHECK(wo.values == pv.values);
    for (double m : wo.momentum) CHECK(m == 0.0);

    NetworkSpec other = spec;
    other.layer_sizes = {3, 5, 2};
    CHECK_THROWS_AS(load_snapshot(path, other), data_error);
    std::filesystem::remove(path);
}

TEST_CASE("training separates a 2-class blob set within 500 iterations") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 200, 2, 0.4, 21);
    const NetworkSpec spec{{2, 8, 2}, Activation::relu, InitScheme::he_uniform, 9};
    OptimizerConfig opt;
    opt.initial_lr = 0.05;
    opt.momentum = 0.9;
    opt.lr_milestones = {};
    opt.batch_size = 32;

    ParamVector pv = init_params(spec);
    std::vector<std::uint32_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0u);
    BatchIterator it(all, opt.batch_size, 77);
    double loss = 0.0;
    for (int step = 1; step <= 500; ++step) {
        const Batch b = gather_batch(ds, it.next_indices());
        const LossGrad lg = loss_and_grad(pv, spec, b.inputs, b.labels);
        sgd_step(pv, lg.grad, lr_at(opt, step), opt.momentum);
        loss = lg.loss;
    }
    CHECK(loss < 0.1);
}

TEST_CASE("full training trajectory is bitwise deterministic") {
    const Dataset ds = make_synthetic(SyntheticKind::blobs, 120, 3, 0.8, 5);
    const NetworkSpec spec{{2, 6, 3}, Activation::tanh, InitScheme::he_uniform, 2};
    OptimizerConfig opt;
    opt.batch_size = 16;

    auto train = [&] {
        ParamVector pv = init_params(spec);
        std::vector<std::uint32_t> all(ds.size());
        std::iota(all.begin(), all.end(), 0u);
        BatchIterator it(all, opt.batch_size, 3);
        for (int step = 1; step <= 200; ++step) {
            const Batch b = gather_batch(ds, it.next_indices());
            sgd_step(pv, loss_and_grad(pv, spec, b.inputs, b.labels).grad,
                     lr_at(opt, step), opt.momentum);
        }
        return pv;
    };
    const ParamVector a = train();
    const ParamVector b = train();
    CHECK(a.values == b.values);
    CHECK(a.momentum == b.momentum);
}
