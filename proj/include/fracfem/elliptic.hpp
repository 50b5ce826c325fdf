#pragma once

#include "fracfem/common.hpp"
#include "fracfem/dense_eigen.hpp"
#include "fracfem/kernels.hpp"
#include "fracfem/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace fracfem {

using ScalarFunction = std::function<double(Point)>;
using VectorFunction = std::function<Point(Point)>;

// L u = -div(A grad u) + c u
struct CoefficientField {
  std::function<std::array<double, 3>(Point)> A;  // (a11, a12, a22)
  std::function<double(Point)> c;
  bool constant = true;

  static CoefficientField laplacian() { return constant_field(1.0, 0.0, 1.0, 0.0); }
  static CoefficientField constant_field(double a11, double a12, double a22, double c0);
  bool is_laplacian() const;
};

enum class Flavor { conforming_p1, crouzeix_raviart };
const char* to_string(Flavor f);

struct DiscreteEllipticPair {
  Flavor flavor = Flavor::conforming_p1;
  SparseMatrix stiffness;
  SparseMatrix mass;
  std::vector<int> dof_entity;     // dof -> vertex (P1) or edge (CR)
  std::vector<int> entity_dof;     // vertex/edge -> dof, -1 if eliminated
  CoefficientField coeffs;
  int size() const { return static_cast<int>(dof_entity.size()); }
};

DiscreteEllipticPair assemble(const Mesh& mesh, const CoefficientField& coeffs = CoefficientField::laplacian(),
                              Exec exec = default_exec());
DiscreteEllipticPair assemble_cr(const Mesh& mesh, const CoefficientField& coeffs = CoefficientField::laplacian(),
                                 Exec exec = default_exec());

// Element matrices used by the assembly; exposed for verification.
std::array<std::array<double, 3>, 3> p1_local_stiffness(const Mesh& mesh, int t, const CoefficientField& coeffs);
std::array<std::array<double, 3>, 3> p1_local_mass(const Mesh& mesh, int t);
std::array<std::array<double, 3>, 3> cr_local_stiffness(const Mesh& mesh, int t, const CoefficientField& coeffs);
std::array<std::array<double, 3>, 3> cr_local_mass(const Mesh& mesh, int t);

// (f, phi_i) with degree-4 quadrature
Vector load_vector(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& f);
// Load from exact element moments m[t][k] = int_K f lambda_k.
Vector load_from_moments(const Mesh& mesh, const DiscreteEllipticPair& pair,
                         const std::vector<std::array<double, 3>>& moments);

// Cached sparse Cholesky factorizations of the pair.
class EllipticSolver {
 public:
  explicit EllipticSolver(const DiscreteEllipticPair& pair);
  Vector solve_stiffness(const Vector& rhs) const;
  Vector solve_mass(const Vector& rhs) const;
  const DiscreteEllipticPair& pair() const { return *pair_; }

 private:
  const DiscreteEllipticPair* pair_;
  Eigen::SimplicialLLT<SparseMatrix> stiff_;
  Eigen::SimplicialLLT<SparseMatrix> mass_;
};

Vector l2_project(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& data);
// a-form load with the exact gradient, then stiffness solve (conforming P1 only)
Vector ritz_project(const Mesh& mesh, const DiscreteEllipticPair& pair, const ScalarFunction& u, const VectorFunction& grad);
// T_h applied to a load vector
Vector elliptic_solve(const DiscreteEllipticPair& pair, const Vector& load);
inline Vector cr_elliptic_solve(const DiscreteEllipticPair& pair, const Vector& load) { return elliptic_solve(pair, load); }

SpectralBasis eigendecompose(const DiscreteEllipticPair& pair, int cap = kDefaultEigenCap);

// full nodal vector on all vertices from interior P1 coefficients
Vector p1_full_nodal(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u);

// coordinate text export: "rows cols nnz" header then "i j value" lines
void export_coordinate(std::ostream& os, const SparseMatrix& A);

}  // namespace fracfem
