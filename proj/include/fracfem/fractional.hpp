#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fracfem {

struct FractionalTerm {
  double alpha = 0.0;
  double b = 0.0;
};

// P(d_t) = d_t^alpha + sum_i b_i d_t^{alpha_i}
class FractionalOrder {
 public:
  FractionalOrder() = default;
  explicit FractionalOrder(double alpha, std::vector<FractionalTerm> terms = {});

  double alpha() const { return alpha_; }
  const std::vector<FractionalTerm>& terms() const { return terms_; }
  bool multi_term() const { return !terms_.empty(); }

 private:
  double alpha_ = 0.5;
  std::vector<FractionalTerm> terms_;
};

// t^{order-1} / Gamma(order)
double omega(double order, double t);

// Reciprocal gamma, exactly zero at the poles.
double rgamma(double x);

class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int steps, double grading);
  static TimeGrid uniform(double horizon, int steps) { return TimeGrid(horizon, steps, 1.0); }

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double grading() const { return grading_; }
  double t(int n) const { return nodes_[n]; }
  double tau(int n) const { return nodes_[n] - nodes_[n - 1]; }
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  double horizon_ = 1.0;
  int steps_ = 0;
  double grading_ = 1.0;
  std::vector<double> nodes_;
};

// (2 - alpha) / alpha
double default_grading(double alpha);

// L1 weights a_{n,k}, k = 1..n, with P(d_t)u(t_n) ~ sum_k a_{n,k} (u^k - u^{k-1}).
// Rows are evaluated on demand; nothing is tabulated.
class L1Weights {
 public:
  L1Weights(const FractionalOrder& order, const TimeGrid& grid);

  // fills out[k-1] = a_{n,k} for k = 1..n; out.size() >= n
  void row(int n, std::span<double> out) const;
  std::vector<double> row(int n) const;
  double leading(int n) const;

  const TimeGrid& grid() const { return grid_; }
  const FractionalOrder& order() const { return order_; }

 private:
  FractionalOrder order_;
  TimeGrid grid_;
};

// Single-order weights without the Gamma factor: ((t_n - t_{k-1})^p - (t_n - t_k)^p) / tau_k.
void l1_row_unscaled(const TimeGrid& grid, double p, int n, std::span<double> out);

// P(d_t) of the nodal samples by the L1 formula; entry 0 is left at 0.
std::vector<double> caputo_l1(const FractionalOrder& order, const TimeGrid& grid, std::span<const double> samples);

// (I^nu phi)(t_n) for the piecewise-linear interpolant of the samples, integrated exactly.
std::vector<double> riemann_liouville_integral(const TimeGrid& grid, double nu, std::span<const double> samples);

// int_0^T phi(t) (I^nu phi)(t) dt for the piecewise-linear interpolant.
double positivity_probe(const TimeGrid& grid, double nu, std::span<const double> samples);

// max_n |P(d_t)(t phi) - t P(d_t) phi - Q(I) phi| at the grid nodes with
// Q(I) = alpha I^{1-alpha} + sum_i alpha_i b_i I^{1-alpha_i}; requires phi(0) = 0.
double leibniz_residual(const TimeGrid& grid, const FractionalOrder& order, std::span<const double> samples);

// E_{alpha,beta}(z) for 0 < alpha <= 1, beta > 0, z <= 0.
double mittag_leffler(double alpha, double beta, double z);

}  // namespace fracfem
