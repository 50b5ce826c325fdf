#pragma once

#include "fracfem/elliptic.hpp"

#include <functional>

namespace fracfem::detail {

using Local = std::array<std::array<double, 3>, 3>;

// Energy part with the given basis gradients plus c times int shape(l, i, j).
// Returns false if A is not positive definite or c is negative somewhere.
bool local_operator(const Mesh& mesh, int t, const CoefficientField& coeffs, const std::array<Point, 3>& grads,
                    const std::function<double(const std::array<double, 3>&, int, int)>& shape, Local& out);

void scatter_pair(const Mesh& mesh, DiscreteEllipticPair& pair, const std::vector<std::array<int, 3>>& local_dofs,
                  const std::function<bool(int, Local&, Local&)>& local, Exec exec);

}  // namespace fracfem::detail
