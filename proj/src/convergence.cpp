#include "fracfem/convergence.hpp"

#include "fracfem/common.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fracfem {

namespace {

FitResult loglog_fit(std::span<const double> x, std::span<const double> e, const char* what) {
  if (x.size() != e.size()) throw InvalidParameter(std::string(what) + ": sample lists differ in length");
  if (x.size() < 2) throw InvalidParameter(std::string(what) + ": need at least two samples");
  const std::size_t n = x.size();
  std::vector<double> lx(n), le(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(e[i] > 0.0) || !std::isfinite(e[i])) throw InvalidParameter(std::string(what) + ": samples must be positive");
    if (!(x[i] > 0.0)) throw InvalidParameter(std::string(what) + ": abscissae must be positive");
    lx[i] = std::log(x[i]);
    le[i] = std::log(e[i]);
  }
  double mx = 0.0, me = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    me += le[i];
  }
  mx /= n;
  me /= n;
  double sxx = 0.0, sxe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxe += (lx[i] - mx) * (le[i] - me);
  }
  if (sxx == 0.0) throw InvalidParameter(std::string(what) + ": abscissae must be distinct");
  FitResult r;
  r.slope = sxe / sxx;
  r.intercept = me - r.slope * mx;
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = le[i] - (r.intercept + r.slope * lx[i]);
    rr += d * d;
  }
  r.residual = std::sqrt(rr);
  return r;
}

}  // namespace

FitResult fit_rate(std::span<const double> h, std::span<const double> e) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!(h[i] < h[i - 1])) throw InvalidParameter("fit_rate: mesh sizes must be strictly decreasing");
  return loglog_fit(h, e, "fit_rate");
}

FitResult fit_time_exponent(std::span<const double> t, std::span<const double> e) {
  return loglog_fit(t, e, "fit_time_exponent");
}

std::string Tolerance::describe() const {
  std::ostringstream os;
  os << '[' << (min ? std::to_string(*min) : std::string("-inf")) << ", "
     << (max ? std::to_string(*max) : std::string("+inf")) << ']';
  return os.str();
}

bool ConvergenceReport::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

void ConvergenceReport::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["study"] = study;
  j["version"] = version;
  j["config_hash"] = hex64(config_hash);
  j["pass"] = pass();
  for (const auto& c : curves) {
    nlohmann::ordered_json cj;
    cj["metric"] = c.metric;
    cj["abscissa"] = c.abscissa;
    cj["alpha"] = c.alpha;
    cj["fixed"] = c.fixed;
    cj["x"] = c.x;
    cj["e"] = c.e;
    cj["slope"] = c.fit.slope;
    cj["residual"] = c.fit.residual;
    j["curves"].push_back(cj);
  }
  for (const auto& v : verdicts) {
    nlohmann::ordered_json vj;
    vj["name"] = v.name;
    vj["value"] = v.value;
    vj["min"] = v.tolerance.min ? nlohmann::ordered_json(*v.tolerance.min) : nlohmann::ordered_json(nullptr);
    vj["max"] = v.tolerance.max ? nlohmann::ordered_json(*v.tolerance.max) : nlohmann::ordered_json(nullptr);
    vj["pass"] = v.pass;
    j["verdicts"].push_back(vj);
  }
  for (const auto& [k, v] : info) j["info"][k] = v;
  os << j.dump(2) << '\n';
}

void ConvergenceReport::write_csv(std::ostream& os) const {
  os << "metric,alpha,abscissa,fixed,x,error\n" << std::setprecision(17);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i)
      os << c.metric << ',' << c.alpha << ',' << c.abscissa << ',' << c.fixed << ',' << c.x[i] << ',' << c.e[i] << '\n';
}

void write_dat(std::ostream& os, const Curve& c) {
  os << "# " << c.metric << " alpha=" << c.alpha << " slope=" << c.fit.slope << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < c.x.size(); ++i) os << c.x[i] << ' ' << c.e[i] << '\n';
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace fracfem
