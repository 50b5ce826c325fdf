#pragma once

#include "fracfem/common.hpp"

#include <span>
#include <vector>

namespace fracfem {

// Every data-parallel kernel has a serial reference and an OpenMP variant that
// perform the same floating-point operations per output entry, so results are
// bitwise identical across policies and thread counts.
enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec exec);
const char* to_string(Exec exec);

template <class F>
void for_each_index(Exec exec, int n, F&& f) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) f(i);
  } else {
    for (int i = 0; i < n; ++i) f(i);
  }
}

// out = sum_k weights[k] * increments[k] per entry with compensated accumulation.
// Only the first `count` increments are used.
void l1_history(Exec exec, std::span<const double> weights, const std::vector<Vector>& increments, int count,
                Vector& out);

// out = V * d for a column-major dense V.
void modal_synthesis(Exec exec, const DenseMatrix& V, const Vector& d, Vector& out);

}  // namespace fracfem
