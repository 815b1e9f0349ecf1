#include "pbrnn/linalg.hpp"

#include <cmath>
#include <cstdlib>

namespace pbrnn {

bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) {
      return false;
    }
    if (pivot != col) {
      for (std::size_t c = col; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
      }
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) {
        continue;
      }
      for (std::size_t c = col; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
      }
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) {
      acc -= a[ri * n + c] * x[c];
    }
    x[ri] = acc / a[ri * n + ri];
  }
  return true;
}

void orthonormalize_rows(std::vector<double>& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &m[i * n];
    for (std::size_t j = 0; j < i; ++j) {
      const double* prev = &m[j * n];
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        dot += row[c] * prev[c];
      }
      for (std::size_t c = 0; c < n; ++c) {
        row[c] -= dot * prev[c];
      }
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      norm += row[c] * row[c];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      for (std::size_t c = 0; c < n; ++c) {
        row[c] = (c == i) ? 1.0 : 0.0;
      }
    } else {
      for (std::size_t c = 0; c < n; ++c) {
        row[c] /= norm;
      }
    }
  }
}

double ols_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t rows,
               std::size_t cols, std::vector<double>& beta) {
  std::vector<double> xtx(cols * cols, 0.0);
  std::vector<double> xty(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &x[r * cols];
    for (std::size_t i = 0; i < cols; ++i) {
      xty[i] += row[i] * y[r];
      for (std::size_t j = i; j < cols; ++j) {
        xtx[i * cols + j] += row[i] * row[j];
      }
    }
  }
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      xtx[i * cols + j] = xtx[j * cols + i];
    }
  }
  if (!solve_dense(xtx, xty, cols, beta)) {
    beta.assign(cols, 0.0);
    return 0.0;
  }
  double mean = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    mean += y[r];
  }
  mean /= static_cast<double>(rows);
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double fit = 0.0;
    const double* row = &x[r * cols];
    for (std::size_t c = 0; c < cols; ++c) {
      fit += row[c] * beta[c];
    }
    const double d = y[r] - fit;
    ss_res += d * d;
    const double dm = y[r] - mean;
    ss_tot += dm * dm;
  }
  if (ss_tot <= 0.0) {
    return 0.0;
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace pbrnn
