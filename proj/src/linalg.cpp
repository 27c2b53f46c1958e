#include "steerlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace steerlab::linalg {

SymEigen sym_eigen(const std::vector<double>& a, int n) {
  if (n <= 0 || static_cast<int>(a.size()) != n * n) {
    throw std::invalid_argument("sym_eigen: bad dimensions");
  }
  std::vector<double> m = a;
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double x = m[static_cast<size_t>(p) * n + q];
        s += x * x;
      }
    }
    return std::sqrt(s);
  };

  double scale = 0.0;
  for (double x : m) scale = std::max(scale, std::fabs(x));
  const double tol = 1e-14 * std::max(scale, 1.0);

  for (int sweep = 0; sweep < 128 && off_norm() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m[static_cast<size_t>(p) * n + q];
        if (std::fabs(apq) <= tol * 1e-2) continue;
        const double app = m[static_cast<size_t>(p) * n + p];
        const double aqq = m[static_cast<size_t>(q) * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[static_cast<size_t>(k) * n + p];
          const double mkq = m[static_cast<size_t>(k) * n + q];
          m[static_cast<size_t>(k) * n + p] = c * mkp - s * mkq;
          m[static_cast<size_t>(k) * n + q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[static_cast<size_t>(p) * n + k];
          const double mqk = m[static_cast<size_t>(q) * n + k];
          m[static_cast<size_t>(p) * n + k] = c * mpk - s * mqk;
          m[static_cast<size_t>(q) * n + k] = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[static_cast<size_t>(k) * n + p];
          const double vkq = v[static_cast<size_t>(k) * n + q];
          v[static_cast<size_t>(k) * n + p] = c * vkp - s * vkq;
          v[static_cast<size_t>(k) * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return m[static_cast<size_t>(i) * n + i] > m[static_cast<size_t>(j) * n + j];
  });

  SymEigen out;
  out.n = n;
  out.values.resize(static_cast<size_t>(n));
  out.vectors.resize(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    const int src = order[static_cast<size_t>(r)];
    out.values[static_cast<size_t>(r)] = m[static_cast<size_t>(src) * n + src];
    for (int k = 0; k < n; ++k) {
      out.vectors[static_cast<size_t>(r) * n + k] = v[static_cast<size_t>(k) * n + src];
    }
  }
  return out;
}

std::vector<double> matmul_square(const std::vector<double>& a,
                                  const std::vector<double>& b, int n) {
  std::vector<double> c(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double av = a[static_cast<size_t>(i) * n + k];
      for (int j = 0; j < n; ++j) {
        c[static_cast<size_t>(i) * n + j] += av * b[static_cast<size_t>(k) * n + j];
      }
    }
  }
  return c;
}

double max_asymmetry(const std::vector<double>& a, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::fabs(a[static_cast<size_t>(i) * n + j] -
                                        a[static_cast<size_t>(j) * n + i]));
    }
  }
  return worst;
}

}  // namespace steerlab::linalg
