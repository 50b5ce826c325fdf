#pragma once

#include "fracfem/elliptic.hpp"
#include "fracfem/fractional.hpp"
#include "fracfem/kernels.hpp"

#include <array>
#include <string>
#include <vector>

namespace fracfem {

enum class InitialKind { single_mode, smooth_product, indicator_half, delta_series, bump, corner_singular };
const char* to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& name);

struct InitialDataSpec {
  InitialKind kind = InitialKind::single_mode;
  int mode_m = 1;
  int mode_n = 1;
  double delta = 0.0;     // delta_series: target regularity
  double epsilon = 0.01;  // delta_series: c_mn ~ lambda^{-(delta + 1 + epsilon)/2}
  int modes = 128;        // modes per direction for series kinds
  Point center{-0.5, 0.5};  // bump
  double radius = 0.45;     // bump; cutoff radius for corner_singular

  bool is_series() const { return kind != InitialKind::bump && kind != InitialKind::corner_singular; }
};

// u(x, y) = sum c_mn phi_mn on the unit square, phi_mn = 2 sin(m pi x) sin(n pi y),
// lambda_mn = pi^2 (m^2 + n^2). Coefficients are stored densely, c(m-1, n-1).
class ExactSolutionSeries {
 public:
  ExactSolutionSeries() = default;
  explicit ExactSolutionSeries(DenseMatrix coefficients);

  static ExactSolutionSeries from_spec(const InitialDataSpec& spec);
  static ExactSolutionSeries single_mode(int m, int n, double c = 1.0);

  static double eigenvalue(int m, int n);
  static double eigenfunction(int m, int n, Point p);

  int modes_x() const { return static_cast<int>(c_.rows()); }
  int modes_y() const { return static_cast<int>(c_.cols()); }
  const DenseMatrix& coefficients() const { return c_; }

  // sum lambda^r c^2, the squared Hdot^r norm
  double sobolev_norm_sq(double r) const;

  // coefficients multiplied by E_alpha(-lambda t^alpha)
  ExactSolutionSeries at_time(double alpha, double t) const;
  // coefficients multiplied by f(lambda)
  ExactSolutionSeries map(const std::function<double(double)>& f) const;
  // -Laplace u
  ExactSolutionSeries laplacian() const { return map([](double l) { return l; }); }

  double value(Point p) const;
  Point gradient(Point p) const;
  ScalarFunction function() const;
  VectorFunction flux() const;

  // int_K lambda_k u per triangle, by a collapsed Gauss rule resolving the highest mode
  std::vector<std::array<double, 3>> moments(const Mesh& mesh, Exec exec = default_exec()) const;
  int moment_points(double h) const;

 private:
  DenseMatrix c_;
};

// C-infinity bump exp(-1 / (1 - r^2/R^2)) with support inside the disc
ScalarFunction bump_function(Point center, double radius);
// r^{2/3} sin(2 theta / 3) at the reentrant corner of the L-shape, times a C-infinity cutoff equal to 1 for
// r <= radius / 2 and 0 for r >= radius. Harmonic near the corner, so it lies in the domain of the Dirichlet Laplacian.
ScalarFunction corner_singular_function(double radius);

// Initial data as a function of space (series kinds and the bump).
ScalarFunction initial_function(const InitialDataSpec& spec);

}  // namespace fracfem
