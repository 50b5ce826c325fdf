#pragma once

#include <array>
#include <vector>

namespace fracfem {

// Barycentric points, weights normalized to sum to 1 (multiply by |K|).
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

// Symmetric rules exact for total degree <= degree, degree in 1..6.
const QuadratureRule& element_quadrature(int degree);

// Gauss-Legendre nodes and weights on [0, 1].
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};
LineRule gauss_legendre(int n);

// Tensor Gauss rule collapsed onto the triangle with q x q points, exact for degree 2q-2.
// Points are ordered a-major: index i*q + j, where lambda_apex = 1 - a_i, and the rest of
// the barycentric mass a_i is split (1 - b_j, b_j) between the two other vertices.
QuadratureRule collapsed_gauss(int q, int apex = 0);

}  // namespace fracfem
