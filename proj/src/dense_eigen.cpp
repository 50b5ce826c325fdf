#include "fracfem/dense_eigen.hpp"

#include <lapacke.h>

#include <string>

namespace fracfem {

void check_eigen_cap(int dofs, int cap) {
  if (dofs > cap)
    throw InvalidParameter("dense eigensolver refused: " + std::to_string(dofs) + " DOFs exceed the cap of " +
                           std::to_string(cap) + "; use the time-stepped (l1) evolution path instead");
}

SpectralBasis generalized_eigen(DenseMatrix K, DenseMatrix M) {
  const lapack_int n = static_cast<lapack_int>(K.rows());
  if (K.cols() != n || M.rows() != n || M.cols() != n) throw InvalidParameter("generalized_eigen: size mismatch");
  SpectralBasis out;
  out.eigenvalues.resize(n);
  if (n == 0) return out;
  lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, K.data(), n, M.data(), n, out.eigenvalues.data());
  if (info != 0) throw SolverError("dsygvd failed with info = " + std::to_string(info));
  out.eigenvectors = std::move(K);
  return out;
}

SpectralBasis block_diagonal_eigen(DenseMatrix K, const SparseMatrix& M, int block) {
  const int n = static_cast<int>(K.rows());
  if (block < 1 || n % block != 0 || M.rows() != n) throw InvalidParameter("block_diagonal_eigen: bad block structure");
  const int nb = n / block;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it)
      if (it.row() / block != it.col() / block && it.value() != 0.0)
        throw InvalidParameter("block_diagonal_eigen: mass matrix is not block diagonal");
  DenseMatrix Mdense = DenseMatrix(M);
  // L^{-1} for each block, with M_b = L L^T
  std::vector<DenseMatrix> Linv(nb);
  for (int b = 0; b < nb; ++b) {
    DenseMatrix Mb = Mdense.block(b * block, b * block, block, block);
    Eigen::LLT<DenseMatrix> llt(Mb);
    if (llt.info() != Eigen::Success) throw SolverError("block_diagonal_eigen: mass block not positive definite");
    Linv[b] = llt.matrixL().solve(DenseMatrix::Identity(block, block));
  }
  Mdense.resize(0, 0);
  for (int b = 0; b < nb; ++b) K.middleRows(b * block, block) = Linv[b] * K.middleRows(b * block, block);
  for (int b = 0; b < nb; ++b) K.middleCols(b * block, block) = K.middleCols(b * block, block) * Linv[b].transpose();

  SpectralBasis out;
  out.eigenvalues.resize(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, K.data(), n, out.eigenvalues.data());
  if (info != 0) throw SolverError("dsyevd failed with info = " + std::to_string(info));
  for (int b = 0; b < nb; ++b) K.middleRows(b * block, block) = Linv[b].transpose() * K.middleRows(b * block, block);
  out.eigenvectors = std::move(K);
  return out;
}

double eigen_residual(const SparseMatrix& K, const SparseMatrix& M, const SpectralBasis& basis) {
  double knorm = 0.0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) knorm = std::max(knorm, std::abs(it.value()));
  double worst = 0.0;
  for (int j = 0; j < basis.size(); ++j) {
    const auto v = basis.eigenvectors.col(j);
    Vector r = K * v - basis.eigenvalues[j] * (M * v);
    worst = std::max(worst, r.norm() / (knorm * v.norm()));
  }
  return worst;
}

double orthonormality_defect(const SparseMatrix& M, const SpectralBasis& basis) {
  DenseMatrix G = basis.eigenvectors.transpose() * (M * basis.eigenvectors);
  return (G - DenseMatrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

}  // namespace fracfem
