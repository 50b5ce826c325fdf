// Serial reference kernels against their OpenMP variants.
// Run with OMP_NUM_THREADS set to the thread count of interest.

#include "fracfem/elliptic.hpp"
#include "fracfem/evolution.hpp"
#include "fracfem/initial_data.hpp"
#include "fracfem/kernels.hpp"
#include "fracfem/mixed.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace fracfem;

namespace {

Exec policy(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& s) { s.SetLabel(to_string(policy(s))); }

Vector random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

void BM_l1_history(benchmark::State& s) {
  const int n = 20000, steps = static_cast<int>(s.range(1));
  std::vector<Vector> inc;
  for (int k = 0; k < steps; ++k) inc.push_back(random_vector(n, k));
  std::vector<double> w(steps, 0.5);
  Vector out(n);
  for (auto _ : s) {
    l1_history(policy(s), w, inc, steps, out);
    benchmark::DoNotOptimize(out.data());
  }
  label(s);
}
BENCHMARK(BM_l1_history)->ArgsProduct({{0, 1}, {64, 256}})->Unit(benchmark::kMillisecond);

void BM_modal_synthesis(benchmark::State& s) {
  const int n = static_cast<int>(s.range(1));
  const DenseMatrix V = DenseMatrix::Random(n, n);
  const Vector d = Vector::Random(n);
  Vector out(n);
  for (auto _ : s) {
    modal_synthesis(policy(s), V, d, out);
    benchmark::DoNotOptimize(out.data());
  }
  label(s);
}
BENCHMARK(BM_modal_synthesis)->ArgsProduct({{0, 1}, {1000, 3000}})->Unit(benchmark::kMillisecond);

void BM_assembly(benchmark::State& s) {
  const Mesh m = Mesh::unit_square(static_cast<int>(s.range(1)));
  const auto cf = CoefficientField::constant_field(1.0, 0.2, 1.5, 0.1);
  for (auto _ : s) benchmark::DoNotOptimize(assemble(m, cf, policy(s)));
  label(s);
}
BENCHMARK(BM_assembly)->ArgsProduct({{0, 1}, {128, 256}})->Unit(benchmark::kMillisecond);

void BM_mixed_assembly(benchmark::State& s) {
  const Mesh m = Mesh::unit_square(static_cast<int>(s.range(1)));
  for (auto _ : s) benchmark::DoNotOptimize(MixedSystem(m, 1, policy(s)));
  label(s);
}
BENCHMARK(BM_mixed_assembly)->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond);

void BM_series_moments(benchmark::State& s) {
  InitialDataSpec spec;
  spec.kind = InitialKind::delta_series;
  spec.modes = 64;
  const auto series = ExactSolutionSeries::from_spec(spec);
  const Mesh m = Mesh::unit_square(static_cast<int>(s.range(1)));
  for (auto _ : s) benchmark::DoNotOptimize(series.moments(m, policy(s)));
  label(s);
}
BENCHMARK(BM_series_moments)->ArgsProduct({{0, 1}, {32}})->Unit(benchmark::kMillisecond);

void BM_l1_evolution(benchmark::State& s) {
  const Mesh m = Mesh::unit_square(64);
  const auto p = assemble(m);
  const Vector u0 = random_vector(p.size(), 3);
  const TimeGrid grid(1.0, static_cast<int>(s.range(1)), 3.0);
  for (auto _ : s) {
    EllipticStepping op(p);
    benchmark::DoNotOptimize(l1_evolve(op, FractionalOrder(0.5), grid, u0, {}, policy(s)).current().data());
  }
  label(s);
}
BENCHMARK(BM_l1_evolution)->ArgsProduct({{0, 1}, {256}})->Unit(benchmark::kMillisecond);

void BM_contour(benchmark::State& s) {
  const Mesh m = Mesh::unit_square(static_cast<int>(s.range(1)));
  const auto p = assemble(m);
  const ContourPropagator c(p, FractionalOrder(0.5), random_vector(p.size(), 5), policy(s));
  for (auto _ : s) benchmark::DoNotOptimize(c.solve(0.5).data());
  label(s);
}
BENCHMARK(BM_contour)->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
