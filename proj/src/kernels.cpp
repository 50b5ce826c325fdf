#include "fracfem/kernels.hpp"

#include <algorithm>
#include <atomic>

namespace fracfem {
namespace {

std::atomic<Exec> g_exec{Exec::parallel};

constexpr int kBlock = 256;

void history_block(std::span<const double> w, const std::vector<Vector>& inc, int count, int i0, int i1,
                   Vector& out) {
  double s[kBlock], c[kBlock];
  const int m = i1 - i0;
  std::fill(s, s + m, 0.0);
  std::fill(c, c + m, 0.0);
  for (int k = 0; k < count; ++k) {
    const double wk = w[k];
    const double* d = inc[k].data() + i0;
    for (int i = 0; i < m; ++i) {
      const double x = wk * d[i];
      const double t = s[i] + x;
      c[i] += std::abs(s[i]) >= std::abs(x) ? (s[i] - t) + x : (x - t) + s[i];
      s[i] = t;
    }
  }
  for (int i = 0; i < m; ++i) out[i0 + i] = s[i] + c[i];
}

void synth_block(const DenseMatrix& V, const Vector& d, int i0, int i1, Vector& out) {
  const int m = i1 - i0;
  double acc[kBlock];
  std::fill(acc, acc + m, 0.0);
  for (int j = 0; j < V.cols(); ++j) {
    const double dj = d[j];
    const double* col = V.data() + static_cast<std::ptrdiff_t>(j) * V.rows() + i0;
    for (int i = 0; i < m; ++i) acc[i] += col[i] * dj;
  }
  for (int i = 0; i < m; ++i) out[i0 + i] = acc[i];
}

}  // namespace

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec exec) { g_exec.store(exec); }
const char* to_string(Exec exec) { return exec == Exec::serial ? "serial" : "parallel"; }

void l1_history(Exec exec, std::span<const double> weights, const std::vector<Vector>& increments, int count,
                Vector& out) {
  if (count > static_cast<int>(increments.size()) || count > static_cast<int>(weights.size()))
    throw InvalidParameter("l1_history: count exceeds available history");
  const int n = count > 0 ? static_cast<int>(increments[0].size()) : static_cast<int>(out.size());
  out.setZero(n);
  const int blocks = (n + kBlock - 1) / kBlock;
  for_each_index(exec, blocks, [&](int b) {
    history_block(weights, increments, count, b * kBlock, std::min(n, (b + 1) * kBlock), out);
  });
}

void modal_synthesis(Exec exec, const DenseMatrix& V, const Vector& d, Vector& out) {
  if (V.cols() != d.size()) throw InvalidParameter("modal_synthesis: size mismatch");
  const int n = static_cast<int>(V.rows());
  out.resize(n);
  const int blocks = (n + kBlock - 1) / kBlock;
  for_each_index(exec, blocks, [&](int b) { synth_block(V, d, b * kBlock, std::min(n, (b + 1) * kBlock), out); });
}

}  // namespace fracfem
