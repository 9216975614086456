// Dense-layer compute kernels.
//
// Two variants of every kernel: kernels::serial is the reference
// implementation used by tests and the benchmark baseline; kernels::par is
// the OpenMP version used by the training path. Parallel loops split work
// over independent output elements and keep each element's accumulation
// order identical to the serial loop, so serial and par produce
// bitwise-identical results for any thread count.
#pragma once

#include <cstddef>
#include <vector>

namespace amto {

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }

    bool operator==(const Matrix& o) const = default;
};

enum class Activation { relu, tanh };

namespace kernels {

namespace serial {

/// Z = X * W^T + b.  W is row-major [out_dim x in_dim], b has out_dim
/// entries, X is [n x in_dim]; Z is resized to [n x out_dim].
void linear_forward(const Matrix& X, const double* W, const double* b,
                    std::size_t out_dim, Matrix& Z);

/// dW[j*in+k] = sum_i dZ(i,j) * X(i,k);  db[j] = sum_i dZ(i,j).
void grad_weights(const Matrix& dZ, const Matrix& X, double* dW, double* db);

/// dX(i,k) = sum_j dZ(i,j) * W[j*in+k].
void grad_inputs(const Matrix& dZ, const double* W, std::size_t in_dim, Matrix& dX);

/// In-place elementwise activation.
void activate(Matrix& Z, Activation act);

/// dA ⊙ act'(z) computed from post-activation values A, in place on dA.
/// relu uses subgradient 0 at z == 0.
void activate_backward(const Matrix& A, Activation act, Matrix& dA);

/// Row-wise softmax with max subtraction, in place.
void softmax_rows(Matrix& Z);

}  // namespace serial

namespace par {

void linear_forward(const Matrix& X, const double* W, const double* b,
                    std::size_t out_dim, Matrix& Z);
void grad_weights(const Matrix& dZ, const Matrix& X, double* dW, double* db);
void grad_inputs(const Matrix& dZ, const double* W, std::size_t in_dim, Matrix& dX);
void activate(Matrix& Z, Activation act);
void activate_backward(const Matrix& A, Activation act, Matrix& dA);
void softmax_rows(Matrix& Z);

}  // namespace par

}  // namespace kernels
}  // namespace amto
