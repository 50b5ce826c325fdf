#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracfem {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // 2-norm of the log-log residuals
};

// least-squares slope of log e against log h; h strictly decreasing, e > 0
FitResult fit_rate(std::span<const double> h, std::span<const double> e);
// slope q of log e against log t, so e ~ t^q
FitResult fit_time_exponent(std::span<const double> t, std::span<const double> e);

struct Tolerance {
  std::optional<double> min;
  std::optional<double> max;
  bool accepts(double v) const { return (!min || v >= *min) && (!max || v <= *max); }
  std::string describe() const;
};

struct Curve {
  std::string metric;   // l2, h1, max, flux, h2norm
  std::string abscissa;  // h or t
  double alpha = 0.0;
  double fixed = 0.0;  // the time of a spatial curve, the mesh size of a temporal one
  std::vector<double> x;
  std::vector<double> e;
  FitResult fit;
};

struct Verdict {
  std::string name;
  double value = 0.0;
  Tolerance tolerance;
  bool pass = false;
};

struct ConvergenceReport {
  std::string id;
  std::string study;
  std::string version;
  std::uint64_t config_hash = 0;
  std::vector<Curve> curves;
  std::vector<Verdict> verdicts;
  std::map<std::string, double> info;

  bool pass() const;
  void write_json(std::ostream& os) const;
  // one row per sample: metric, alpha, abscissa, x, e
  void write_csv(std::ostream& os) const;
};

// gnuplot-ready two-column file
void write_dat(std::ostream& os, const Curve& c);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace fracfem
