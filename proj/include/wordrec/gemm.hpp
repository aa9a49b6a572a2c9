#pragma once

#include <cstddef>

namespace wordrec {

// Small dense matrix kernels, row-major, accumulate (C += ...). Each output
// element is summed in a fixed k order regardless of blocking, so results are
// reproducible bit for bit.

// C (m x n) += A (m x k) * B (k x n)
inline void gemm_nn(int m, int n, int k, const double* A, const double* B, double* C) {
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = A + static_cast<size_t>(i) * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    double* c0 = C + static_cast<size_t>(i) * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    for (int p = 0; p < k; ++p) {
      const double* b = B + static_cast<size_t>(p) * n;
      const double x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
      for (int j = 0; j < n; ++j) {
        const double bj = b[j];
        c0[j] += x0 * bj;
        c1[j] += x1 * bj;
        c2[j] += x2 * bj;
        c3[j] += x3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    const double* a = A + static_cast<size_t>(i) * k;
    double* c = C + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double* b = B + static_cast<size_t>(p) * n;
      const double x = a[p];
      for (int j = 0; j < n; ++j) c[j] += x * b[j];
    }
  }
}

// C (m x n) += A^T * B where A is (k x m) row-major. Outer-product form.
inline void gemm_tn(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int p = 0; p < k; ++p) {
    const double* arow = A + static_cast<size_t>(p) * m;
    const double* b = B + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double x = arow[i];
      double* c = C + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) c[j] += x * b[j];
    }
  }
}

// C (m x n) += A (m x k) * B^T where B is (n x k) row-major. Row-dot form.
inline void gemm_nt(int m, int n, int k, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<size_t>(i) * k;
    double* c = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* b = B + static_cast<size_t>(j) * k;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      int p = 0;
      for (; p + 4 <= k; p += 4) {
        s0 += a[p] * b[p];
        s1 += a[p + 1] * b[p + 1];
        s2 += a[p + 2] * b[p + 2];
        s3 += a[p + 3] * b[p + 3];
      }
      double s = (s0 + s1) + (s2 + s3);
      for (; p < k; ++p) s += a[p] * b[p];
      c[j] += s;
    }
  }
}

// y (m) += A (m x k) * x (k): row-dot form with 4 partial lanes per row.
inline void gemv(int m, int k, const double* A, const double* x, double* y) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<size_t>(i) * k;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int p = 0;
    for (; p + 4 <= k; p += 4) {
      s0 += a[p] * x[p];
      s1 += a[p + 1] * x[p + 1];
      s2 += a[p + 2] * x[p + 2];
      s3 += a[p + 3] * x[p + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; p < k; ++p) s += a[p] * x[p];
    y[i] += s;
  }
}

// y (k) += A^T * x where A is (m x k): axpy over rows of A.
inline void gemv_t(int m, int k, const double* A, const double* x, double* y) {
  for (int i = 0; i < m; ++i) {
    const double* a = A + static_cast<size_t>(i) * k;
    const double xi = x[i];
    for (int j = 0; j < k; ++j) y[j] += xi * a[j];
  }
}

// A (m x n) += x (m) outer y (n)
inline void ger(int m, int n, const double* x, const double* y, double* A) {
  for (int i = 0; i < m; ++i) {
    double* a = A + static_cast<size_t>(i) * n;
    const double xi = x[i];
    for (int j = 0; j < n; ++j) a[j] += xi * y[j];
  }
}

}  // namespace wordrec
