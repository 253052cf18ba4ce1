#pragma once

#include <vector>

#include "stiefel/matrix.hpp"

namespace stiefel {

struct Svd {
  Matrix u;                  // rows x cols, orthonormal columns
  std::vector<double> s;     // descending, non-negative
  Matrix v;                  // cols x cols, orthogonal
};

struct SymEig {
  Matrix vectors;            // columns are eigenvectors
  std::vector<double> values;  // descending
};

/// Thin SVD by one-sided (Hestenes) Jacobi. Requires rows >= cols.
/// Throws ConvergenceError naming the shape after kTolerances.jacobi_max_sweeps.
Svd svd(const Matrix& a);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEig sym_eig(const Matrix& p);

/// Solve A X = B with partial-pivoting LU. Throws SingularityError.
Matrix solve(const Matrix& a, const Matrix& b);

/// V diag(d^{-1/2}) V^T for symmetric positive-definite P.
Matrix inv_sqrt_sym(const Matrix& p);

/// Lower Cholesky factor of a symmetric positive-definite matrix.
/// Throws SingularityError if a pivot is not positive.
Matrix cholesky(const Matrix& p);

/// log det of an SPD matrix from its Cholesky factor.
double logdet_from_cholesky(const Matrix& l);

/// Inverse of an SPD matrix from its Cholesky factor.
Matrix inverse_from_cholesky(const Matrix& l);

/// log |det A| for a square matrix, by LU.
double log_abs_det(const Matrix& a);

}  // namespace stiefel
