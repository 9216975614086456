#include "amto/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace amto::kernels {

// Shared loop bodies. Each *_row / *_unit function computes one independent
// output slice with a fixed inner accumulation order; serial and par differ
// only in how the outer loop is driven.
namespace {

inline void forward_row(const Matrix& X, const double* W, const double* b,
                        std::size_t out_dim, Matrix& Z, std::size_t i) {
    const std::size_t in_dim = X.cols;
    const double* x = X.row(i);
    double* z = Z.row(i);
    for (std::size_t j = 0; j < out_dim; ++j) {
        const double* w = W + j * in_dim;
        double acc = b[j];
        for (std::size_t k = 0; k < in_dim; ++k) acc += w[k] * x[k];
        z[j] = acc;
    }
}

inline void grad_weights_unit(const Matrix& dZ, const Matrix& X, double* dW,
                              double* db, std::size_t j) {
    const std::size_t n = dZ.rows;
    const std::size_t in_dim = X.cols;
    double* dw = dW + j * in_dim;
    std::fill(dw, dw + in_dim, 0.0);
    double acc_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = dZ(i, j);
        acc_b += d;
        const double* x = X.row(i);
        for (std::size_t k = 0; k < in_dim; ++k) dw[k] += d * x[k];
    }
    db[j] = acc_b;
}

inline void grad_inputs_row(const Matrix& dZ, const double* W, std::size_t in_dim,
                            Matrix& dX, std::size_t i) {
    const std::size_t out_dim = dZ.cols;
    const double* d = dZ.row(i);
    double* dx = dX.row(i);
    std::fill(dx, dx + in_dim, 0.0);
    for (std::size_t j = 0; j < out_dim; ++j) {
        const double dj = d[j];
        const double* w = W + j * in_dim;
        for (std::size_t k = 0; k < in_dim; ++k) dx[k] += dj * w[k];
    }
}

inline void activate_row(Matrix& Z, Activation act, std::size_t i) {
    double* z = Z.row(i);
    if (act == Activation::relu) {
        for (std::size_t j = 0; j < Z.cols; ++j) z[j] = z[j] > 0.0 ? z[j] : 0.0;
    } else {
        for (std::size_t j = 0; j < Z.cols; ++j) z[j] = std::tanh(z[j]);
    }
}

inline void activate_backward_row(const Matrix& A, Activation act, Matrix& dA,
                                  std::size_t i) {
    const double* a = A.row(i);
    double* d = dA.row(i);
    if (act == Activation::relu) {
        for (std::size_t j = 0; j < A.cols; ++j) d[j] = a[j] > 0.0 ? d[j] : 0.0;
    } else {
        for (std::size_t j = 0; j < A.cols; ++j) d[j] *= 1.0 - a[j] * a[j];
    }
}

inline void softmax_row(Matrix& Z, std::size_t i) {
    double* z = Z.row(i);
    double m = z[0];
    for (std::size_t j = 1; j < Z.cols; ++j) m = std::max(m, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < Z.cols; ++j) {
        z[j] = std::exp(z[j] - m);
        sum += z[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < Z.cols; ++j) z[j] *= inv;
}

}  // namespace

namespace serial {

void linear_forward(const Matrix& X, const double* W, const double* b,
                    std::size_t out_dim, Matrix& Z) {
    Z.resize(X.rows, out_dim);
    for (std::size_t i = 0; i < X.rows; ++i) forward_row(X, W, b, out_dim, Z, i);
}

void grad_weights(const Matrix& dZ, const Matrix& X, double* dW, double* db) {
    for (std::size_t j = 0; j < dZ.cols; ++j) grad_weights_unit(dZ, X, dW, db, j);
}

void grad_inputs(const Matrix& dZ, const double* W, std::size_t in_dim, Matrix& dX) {
    dX.resize(dZ.rows, in_dim);
    for (std::size_t i = 0; i < dZ.rows; ++i) grad_inputs_row(dZ, W, in_dim, dX, i);
}

void activate(Matrix& Z, Activation act) {
    for (std::size_t i = 0; i < Z.rows; ++i) activate_row(Z, act, i);
}

void activate_backward(const Matrix& A, Activation act, Matrix& dA) {
    for (std::size_t i = 0; i < A.rows; ++i) activate_backward_row(A, act, dA, i);
}

void softmax_rows(Matrix& Z) {
    for (std::size_t i = 0; i < Z.rows; ++i) softmax_row(Z, i);
}

}  // namespace serial

namespace par {

void linear_forward(const Matrix& X, const double* W, const double* b,
                    std::size_t out_dim, Matrix& Z) {
    Z.resize(X.rows, out_dim);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(X.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        forward_row(X, W, b, out_dim, Z, static_cast<std::size_t>(i));
}

void grad_weights(const Matrix& dZ, const Matrix& X, double* dW, double* db) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(dZ.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < m; ++j)
        grad_weights_unit(dZ, X, dW, db, static_cast<std::size_t>(j));
}

void grad_inputs(const Matrix& dZ, const double* W, std::size_t in_dim, Matrix& dX) {
    dX.resize(dZ.rows, in_dim);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dZ.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        grad_inputs_row(dZ, W, in_dim, dX, static_cast<std::size_t>(i));
}

void activate(Matrix& Z, Activation act) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(Z.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        activate_row(Z, act, static_cast<std::size_t>(i));
}

void activate_backward(const Matrix& A, Activation act, Matrix& dA) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(A.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        activate_backward_row(A, act, dA, static_cast<std::size_t>(i));
}

void softmax_rows(Matrix& Z) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(Z.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) softmax_row(Z, static_cast<std::size_t>(i));
}

}  // namespace par

}  // namespace amto::kernels
