#pragma once

// Row-major C = alpha * op(A) * op(B) + beta * C.
//
// Builds with JERSEYID_USE_CBLAS defined route through the system CBLAS;
// otherwise a portable loop kernel is used. Both are deterministic when
// CBLAS runs single-threaded.

#include <algorithm>
#include <cstddef>

#ifdef JERSEYID_USE_CBLAS
#include <cblas.h>
#endif

namespace jerseyid::numkit::kernels {

inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 double alpha, const double* a, const double* b, double beta, double* c) {
  if (m == 0 || n == 0) return;
#ifdef JERSEYID_USE_CBLAS
  if (k > 0) {
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
                static_cast<int>(k), alpha, a, lda, b, ldb, beta, c, static_cast<int>(n));
    return;
  }
#endif
  if (beta == 0.0) {
    std::fill(c, c + m * n, 0.0);
  } else if (beta != 1.0) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] *= beta;
  }
  if (k == 0) return;

  if (!trans_a && !trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      double* __restrict crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = alpha * a[i * k + p];
        const double* __restrict brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* __restrict arow = a + i * k;
      for (std::size_t j = 0; j < n; ++j) {
        const double* __restrict brow = b + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        c[i * n + j] += alpha * acc;
      }
    }
  } else if (trans_a && !trans_b) {
    for (std::size_t p = 0; p < k; ++p) {
      const double* __restrict brow = b + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const double av = alpha * a[p * m + i];
        double* __restrict crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] += alpha * acc;
      }
    }
  }
}

}  // namespace jerseyid::numkit::kernels
