#pragma once

#include "fracfem/common.hpp"

namespace fracfem {

// Discrete eigenpairs K v = lambda M v, eigenvalues ascending, V^T M V = I.
struct SpectralBasis {
  Vector eigenvalues;
  DenseMatrix eigenvectors;
  int size() const { return static_cast<int>(eigenvalues.size()); }
};

constexpr int kDefaultEigenCap = 5000;

// Dense generalized solve via LAPACK dsygvd. K and M are consumed.
SpectralBasis generalized_eigen(DenseMatrix K, DenseMatrix M);

// Same problem when M is block diagonal with square blocks of size `block`
// (consecutive indices): reduced to a standard problem and solved with dsyevd.
SpectralBasis block_diagonal_eigen(DenseMatrix K, const SparseMatrix& M, int block);

// max_j ||K v_j - lambda_j M v_j|| / (||K|| ||v_j||) and max |V^T M V - I|
double eigen_residual(const SparseMatrix& K, const SparseMatrix& M, const SpectralBasis& basis);
double orthonormality_defect(const SparseMatrix& M, const SpectralBasis& basis);

void check_eigen_cap(int dofs, int cap);

}  // namespace fracfem
