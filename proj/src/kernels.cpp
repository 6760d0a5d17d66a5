#include "opev/kernels.hpp"

#include <algorithm>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opev::kernels {

namespace {

// Below this many multiply-adds the OpenMP region costs more than the loop;
// the parallel entry points fall back to the identical serial body, which
// keeps results bit-for-bit equal either way.
constexpr std::size_t kParallelFlopThreshold = 65536;

inline void check_matmul(const Tensor2& a, const Tensor2& b, const Tensor2& c) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw DimensionError("matmul: shape mismatch");
}

inline void row_kernel(const double* __restrict arow, const double* __restrict bdata,
                       double* __restrict crow, std::size_t kdim, std::size_t n) {
    for (std::size_t k = 0; k < kdim; ++k) {
        const double av = arow[k];
        const double* __restrict brow = bdata + k * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace

void matmul_serial(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    check_matmul(a, b, c);
    const std::size_t m = a.rows(), kdim = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.row(i);
        std::memset(crow, 0, n * sizeof(double));
        row_kernel(a.row(i), b.data(), crow, kdim, n);
    }
}

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    check_matmul(a, b, c);
    const std::size_t m = a.rows(), kdim = a.cols(), n = b.cols();
    if (m < 2 || m * kdim * n < kParallelFlopThreshold) {
        matmul_serial(a, b, c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.row(i);
        std::memset(crow, 0, n * sizeof(double));
        row_kernel(a.row(i), b.data(), crow, kdim, n);
    }
}

void matmul_acc_serial(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    check_matmul(a, b, c);
    const std::size_t m = a.rows(), kdim = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) row_kernel(a.row(i), b.data(), c.row(i), kdim, n);
}

void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    check_matmul(a, b, c);
    const std::size_t m = a.rows(), kdim = a.cols(), n = b.cols();
    if (m < 2 || m * kdim * n < kParallelFlopThreshold) {
        matmul_acc_serial(a, b, c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) row_kernel(a.row(i), b.data(), c.row(i), kdim, n);
}

Tensor2 transpose(const Tensor2& a) {
    Tensor2 t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

void add_bias_serial(const Tensor2& in, const Tensor2& bias, Tensor2& out) {
    if (bias.cols() != in.cols() || !in.same_shape(out))
        throw DimensionError("add_bias: shape mismatch");
    const std::size_t m = in.rows(), n = in.cols();
    const double* brow = bias.row(0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* irow = in.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < n; ++j) orow[j] = irow[j] + brow[j];
    }
}

void add_bias(const Tensor2& in, const Tensor2& bias, Tensor2& out) {
    if (bias.cols() != in.cols() || !in.same_shape(out))
        throw DimensionError("add_bias: shape mismatch");
    const std::size_t m = in.rows(), n = in.cols();
    if (m < 2 || m * n < kParallelFlopThreshold) {
        add_bias_serial(in, bias, out);
        return;
    }
    const double* brow = bias.row(0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
        const double* irow = in.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < n; ++j) orow[j] = irow[j] + brow[j];
    }
}

}  // namespace opev::kernels
