#pragma once

#include "fracfem/elliptic.hpp"

#include <array>
#include <vector>

namespace fracfem {

// Discontinuous piecewise-linear function given by its values at the three
// local vertices of every triangle. Covers P1, Crouzeix-Raviart and the
// mixed scalar spaces.
struct PiecewiseLinearField {
  std::vector<std::array<double, 3>> values;

  double eval(const std::array<double, 3>& bary, int t) const {
    const auto& v = values[t];
    return v[0] * bary[0] + v[1] * bary[1] + v[2] * bary[2];
  }
  Point gradient(const Mesh& mesh, int t) const;

  static PiecewiseLinearField zero(const Mesh& mesh);
  static PiecewiseLinearField from_p1(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u);
  static PiecewiseLinearField from_cr(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u);
  static PiecewiseLinearField from_pair(const Mesh& mesh, const DiscreteEllipticPair& pair, const Vector& u);
  static PiecewiseLinearField from_nodal(const Mesh& mesh, const Vector& full_nodal);
};

// int_K lambda_k f for every triangle, by the given rule
std::vector<std::array<double, 3>> element_moments(const Mesh& mesh, const ScalarFunction& f, int degree = 6);

}  // namespace fracfem
