#pragma once

#include <cstddef>
#include <vector>

namespace pbrnn {

// Solves the dense system A x = b in place via Gaussian elimination with
// partial pivoting. A is n x n row-major. Returns false if A is singular to
// working precision.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x);

// Orthonormalizes the rows of the n x n row-major matrix in place (modified
// Gram-Schmidt). Rows that collapse to zero are replaced by unit basis vectors.
void orthonormalize_rows(std::vector<double>& m, std::size_t n);

// Ordinary least squares: minimizes ||X beta - y||^2 for row-major X (rows x cols).
// Returns the R^2 of the fit and writes beta. Degenerate designs return R^2 = 0.
double ols_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t rows,
               std::size_t cols, std::vector<double>& beta);

}  // namespace pbrnn
