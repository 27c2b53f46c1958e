#pragma once

#include <vector>

namespace steerlab::linalg {

// Eigendecomposition of a symmetric matrix (row-major n*n), cyclic Jacobi.
// Eigenvalues are sorted descending; row i of `vectors` is the unit
// eigenvector for values[i].
struct SymEigen {
  std::vector<double> values;
  std::vector<double> vectors;
  int n = 0;
};

SymEigen sym_eigen(const std::vector<double>& a, int n);

// c = a * b for row-major n*n matrices.
std::vector<double> matmul_square(const std::vector<double>& a,
                                  const std::vector<double>& b, int n);

double max_asymmetry(const std::vector<double>& a, int n);

}  // namespace steerlab::linalg
