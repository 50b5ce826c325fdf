#include "fracfem/experiment.hpp"

#include "fracfem/errors.hpp"
#include "fracfem/evolution.hpp"
#include "fracfem/piecewise_field.hpp"
#include "fracfem/reference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace fracfem {

using nlohmann::json;

const char* to_string(FemFlavor f) {
  switch (f) {
    case FemFlavor::conforming: return "conforming";
    case FemFlavor::crouzeix_raviart: return "crouzeix_raviart";
    case FemFlavor::mixed_rt0: return "mixed_rt0";
    case FemFlavor::mixed_rt1: return "mixed_rt1";
  }
  return "?";
}

const char* to_string(Study s) {
  switch (s) {
    case Study::spatial: return "spatial";
    case Study::temporal: return "temporal";
    case Study::smoothing: return "smoothing";
  }
  return "?";
}

const char* to_string(TimePath p) {
  switch (p) {
    case TimePath::spectral: return "spectral";
    case TimePath::contour: return "contour";
    case TimePath::l1: return "l1";
  }
  return "?";
}
const char* to_string(Forcing f) { return f == Forcing::zero ? "zero" : "manufactured_t_pow"; }
bool is_mixed(FemFlavor f) { return f == FemFlavor::mixed_rt0 || f == FemFlavor::mixed_rt1; }

// ---------------------------------------------------------------- config

namespace {

const std::set<std::string> kMetrics{"l2", "h1", "max", "max_log", "flux", "h2norm"};

template <class T>
T enum_field(const std::string& path, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  std::string list;
  for (const auto& [name, v] : options) {
    if (value == name) return v;
    list += std::string(list.empty() ? "" : ", ") + name;
  }
  throw ConfigError(path, "unknown value '" + value + "' (expected one of " + list + ")");
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }
  const json& get(const std::string& key) const {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    if (!get(key).is_number()) throw ConfigError(at(key), "expected a number");
    const double v = get(key).get<double>();
    if (!std::isfinite(v)) throw ConfigError(at(key), "must be finite");
    return v;
  }
  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    if (!get(key).is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return get(key).get<long long>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!get(key).is_string()) throw ConfigError(at(key), "expected a string");
    return get(key).get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    if (!get(key).is_array()) throw ConfigError(at(key), "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < get(key).size(); ++i) {
      const json& x = get(key)[i];
      if (!x.is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      v.push_back(x.get<double>());
    }
    return v;
  }
  std::vector<int> integers(const std::string& key) const {
    if (!get(key).is_array()) throw ConfigError(at(key), "expected an array of integers");
    std::vector<int> v;
    for (std::size_t i = 0; i < get(key).size(); ++i) {
      const json& x = get(key)[i];
      if (!x.is_number_integer()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
      v.push_back(x.get<int>());
    }
    return v;
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

FractionalOrder parse_order(const json& j, const std::string& path) {
  if (j.is_number()) {
    try {
      return FractionalOrder(j.get<double>());
    } catch (const InvalidParameter& e) {
      throw ConfigError(path, e.what());
    }
  }
  Reader r(j, path);
  if (!r.has("alpha")) throw ConfigError(r.at("alpha"), "required");
  const double alpha = r.number("alpha", 0.5);
  std::vector<FractionalTerm> terms;
  if (r.has("terms")) {
    const json& t = r.get("terms");
    if (!t.is_array()) throw ConfigError(r.at("terms"), "expected an array");
    for (std::size_t i = 0; i < t.size(); ++i) {
      Reader tr(t[i], r.at("terms") + "[" + std::to_string(i) + "]");
      if (!tr.has("alpha") || !tr.has("b")) throw ConfigError(tr.at("alpha"), "terms need alpha and b");
      FractionalTerm term{tr.number("alpha", 0.0), tr.number("b", 0.0)};
      if (!(term.alpha > 0.0 && term.alpha <= alpha)) throw ConfigError(tr.at("alpha"), "must lie in (0, alpha]");
      if (!(term.b > 0.0)) throw ConfigError(tr.at("b"), "must be positive");
      tr.reject_unknown();
      terms.push_back(term);
    }
  }
  r.reject_unknown();
  try {
    return FractionalOrder(alpha, terms);
  } catch (const InvalidParameter& e) {
    throw ConfigError(r.at("alpha"), e.what());
  }
}

Tolerance parse_tolerance(const json& j, const std::string& path) {
  Tolerance t;
  if (j.is_array()) {
    if (j.size() != 2) throw ConfigError(path, "expected [min, max]");
    for (int i = 0; i < 2; ++i)
      if (!j[i].is_null() && !j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number or null");
    if (j[0].is_number()) t.min = j[0].get<double>();
    if (j[1].is_number()) t.max = j[1].get<double>();
  } else {
    Reader r(j, path);
    if (r.has("target")) {
      const double target = r.number("target", 0.0);
      const double tol = r.number("tol", 0.0);
      if (tol < 0.0) throw ConfigError(r.at("tol"), "must be nonnegative");
      t.min = target - tol;
      t.max = target + tol;
    }
    if (r.has("min")) t.min = r.number("min", 0.0);
    if (r.has("max")) t.max = r.number("max", 0.0);
    r.reject_unknown();
  }
  if (t.min && t.max && *t.min > *t.max) throw ConfigError(path, "min exceeds max");
  if (!t.min && !t.max) throw ConfigError(path, "needs a bound");
  return t;
}

InitialDataSpec parse_initial(const json& j, const std::string& path) {
  Reader r(j, path);
  InitialDataSpec s;
  try {
    s.kind = initial_kind_from_string(r.string("kind", "single_mode"));
  } catch (const InvalidParameter& e) {
    throw ConfigError(r.at("kind"), e.what());
  }
  if (r.has("mode")) {
    const auto m = r.integers("mode");
    if (m.size() != 2 || m[0] < 1 || m[1] < 1) throw ConfigError(r.at("mode"), "expected two positive integers");
    s.mode_m = m[0];
    s.mode_n = m[1];
  }
  s.delta = r.number("delta", s.delta);
  s.epsilon = r.number("epsilon", s.epsilon);
  s.modes = static_cast<int>(r.integer("modes", s.modes));
  if (r.has("center")) {
    const auto c = r.numbers("center");
    if (c.size() != 2) throw ConfigError(r.at("center"), "expected two coordinates");
    s.center = {c[0], c[1]};
  }
  s.radius = r.number("radius", s.radius);
  r.reject_unknown();
  if (s.delta < 0.0 || s.delta > 2.0) throw ConfigError(r.at("delta"), "must lie in [0, 2]");
  if (!(s.epsilon > 0.0)) throw ConfigError(r.at("epsilon"), "must be positive");
  if (s.modes < 1 || s.modes > 1024) throw ConfigError(r.at("modes"), "must lie in [1, 1024]");
  if (!(s.radius > 0.0)) throw ConfigError(r.at("radius"), "must be positive");
  return s;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Reader r(j, "");
  ExperimentConfig c;
  c.id = r.string("id", c.id);
  if (c.id.empty() || c.id.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("id", "must be a nonempty name without spaces or slashes");
  c.study = enum_field<Study>("study", r.string("study", "spatial"),
                              {{"spatial", Study::spatial}, {"temporal", Study::temporal}, {"smoothing", Study::smoothing}});
  c.domain = enum_field<DomainKind>("domain", r.string("domain", "unit_square"),
                                    {{"unit_square", DomainKind::unit_square}, {"l_shape", DomainKind::l_shape}});
  c.flavor = enum_field<FemFlavor>("flavor", r.string("flavor", "conforming"),
                                   {{"conforming", FemFlavor::conforming},
                                    {"crouzeix_raviart", FemFlavor::crouzeix_raviart},
                                    {"mixed_rt0", FemFlavor::mixed_rt0},
                                    {"mixed_rt1", FemFlavor::mixed_rt1}});
  if (r.has("order") && r.has("alphas")) throw ConfigError("alphas", "give either order or alphas");
  if (r.has("order")) c.orders = {parse_order(r.get("order"), "order")};
  if (r.has("alphas")) {
    c.orders.clear();
    const json& a = r.get("alphas");
    if (!a.is_array() || a.empty()) throw ConfigError("alphas", "expected a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i) c.orders.push_back(parse_order(a[i], "alphas[" + std::to_string(i) + "]"));
  }
  if (r.has("initial_data")) c.initial = parse_initial(r.get("initial_data"), "initial_data");
  c.forcing = enum_field<Forcing>("forcing", r.string("forcing", "zero"),
                                  {{"zero", Forcing::zero}, {"manufactured_t_pow", Forcing::manufactured_t_pow}});
  if (r.has("levels")) c.levels = r.integers("levels");
  c.level = static_cast<int>(r.integer("level", c.level));
  if (r.has("time")) {
    Reader t(r.get("time"), "time");
    c.time.path = enum_field<TimePath>("time.path", t.string("path", "spectral"),
                                       {{"spectral", TimePath::spectral}, {"contour", TimePath::contour}, {"l1", TimePath::l1}});
    c.time.steps = static_cast<int>(t.integer("steps", c.time.steps));
    c.time.grading = t.number("grading", c.time.grading);
    c.time.horizon = t.number("horizon", c.time.horizon);
    t.reject_unknown();
    if (c.time.steps < 1) throw ConfigError("time.steps", "must be positive");
    if (c.time.grading != 0.0 && c.time.grading < 1.0) throw ConfigError("time.grading", "must be 0 (default) or >= 1");
    if (c.time.horizon < 0.0) throw ConfigError("time.horizon", "must be nonnegative");
  }
  if (r.has("report_times") && r.has("times")) throw ConfigError("times", "give either report_times or times");
  if (r.has("report_times")) c.report_times = r.numbers("report_times");
  if (r.has("times")) c.report_times = r.numbers("times");
  if (r.has("metrics")) {
    const json& m = r.get("metrics");
    if (!m.is_array() || m.empty()) throw ConfigError("metrics", "expected a nonempty array");
    c.metrics.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_string() || !kMetrics.count(m[i].get<std::string>()))
        throw ConfigError("metrics[" + std::to_string(i) + "]", "unknown metric");
      c.metrics.push_back(m[i].get<std::string>());
    }
  } else if (c.study == Study::smoothing) {
    c.metrics = {"h2norm"};
  }
  c.reference_level = static_cast<int>(r.integer("reference_level", c.reference_level));
  c.reference_refine = static_cast<int>(r.integer("reference_refine", c.reference_refine));
  c.eig_cap = static_cast<int>(r.integer("eig_cap", c.eig_cap));
  if (r.has("tolerances")) {
    const json& t = r.get("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string key = it.key();
      const auto us = key.rfind('_');
      const std::string metric = us == std::string::npos ? "" : key.substr(0, us);
      const std::string kind = us == std::string::npos ? "" : key.substr(us + 1);
      if (!kMetrics.count(metric) || (kind != "rate" && kind != "exponent"))
        throw ConfigError("tolerances." + key, "expected <metric>_rate or <metric>_exponent");
      c.tolerances[key] = parse_tolerance(it.value(), "tolerances." + key);
    }
  }
  c.output_dir = r.string("output_dir", c.output_dir);
  c.workers = static_cast<int>(r.integer("workers", c.workers));
  c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long long>(c.seed)));
  r.reject_unknown();

  // cross-field validation
  if (c.study == Study::spatial) {
    if (c.levels.size() < 3) throw ConfigError("levels", "a spatial study needs at least three levels");
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      if (c.levels[i] < 1) throw ConfigError("levels[" + std::to_string(i) + "]", "must be positive");
      if (i > 0 && c.levels[i] <= c.levels[i - 1]) throw ConfigError("levels", "must be strictly increasing");
    }
    if (c.report_times.empty()) throw ConfigError("report_times", "needs at least one time");
  } else {
    if (c.level < 1) throw ConfigError("level", "must be positive");
    if (c.report_times.size() < 2) throw ConfigError("report_times", "a time study needs at least two times");
  }
  for (std::size_t i = 0; i < c.report_times.size(); ++i)
    if (!(c.report_times[i] > 0.0)) throw ConfigError("report_times[" + std::to_string(i) + "]", "must be positive");
  if (c.study == Study::smoothing && (c.metrics.size() != 1 || c.metrics[0] != "h2norm"))
    throw ConfigError("metrics", "a smoothing study measures h2norm only");
  for (std::size_t i = 0; i < c.metrics.size(); ++i) {
    const std::string& m = c.metrics[i];
    const std::string p = "metrics[" + std::to_string(i) + "]";
    if (m == "flux" && !is_mixed(c.flavor)) throw ConfigError(p, "flux error needs a mixed flavor");
    if (m == "h1" && is_mixed(c.flavor)) throw ConfigError(p, "mixed flavors report the flux error instead of h1");
    if (m == "h2norm" && c.study == Study::spatial) throw ConfigError(p, "h2norm is a time-study metric");
  }
  if (c.domain == DomainKind::l_shape) {
    if (c.flavor != FemFlavor::conforming) throw ConfigError("flavor", "the L-shaped domain supports the conforming flavor");
    if (c.initial.kind != InitialKind::bump && c.initial.kind != InitialKind::corner_singular)
      throw ConfigError("initial_data.kind", "the L-shaped domain needs bump or corner_singular data");
    if (c.initial.kind == InitialKind::corner_singular && c.initial.radius > 1.0)
      throw ConfigError("initial_data.radius", "the corner cutoff must stay inside the unit disc");
    if (c.forcing != Forcing::zero) throw ConfigError("forcing", "the L-shaped domain supports zero forcing");
    if (c.study != Study::spatial) throw ConfigError("study", "the L-shaped domain supports spatial studies");
    for (std::size_t i = 0; i < c.levels.size(); ++i)
      if (c.levels[i] % 2) throw ConfigError("levels[" + std::to_string(i) + "]", "must be even on the L-shaped domain");
    for (std::size_t i = 1; i < c.levels.size(); ++i)
      if (c.levels[i] != 2 * c.levels[i - 1]) throw ConfigError("levels", "L-shape levels must double");
    int ref = c.levels.back();
    int gap = 0;
    while (ref < c.reference_level) {
      ref *= 2;
      ++gap;
    }
    if (ref != c.reference_level) throw ConfigError("reference_level", "must be a power-of-two multiple of the finest level");
    if (gap < 2) throw ConfigError("reference_level", "must be at least two refinements above the finest level");
    for (const auto& m : c.metrics)
      if (m != "l2" && m != "h1") throw ConfigError("metrics", "the L-shaped domain reports l2 and h1 against the reference");
  } else {
    if (!c.initial.is_series()) throw ConfigError("initial_data.kind", "bump and corner_singular data are for the L-shaped domain");
  }
  if (c.forcing == Forcing::manufactured_t_pow && c.time.path != TimePath::l1)
    throw ConfigError("time.path", "forced problems need the l1 path");
  for (std::size_t i = 0; i < c.orders.size(); ++i)
    if (c.orders[i].multi_term() && c.time.path != TimePath::l1)
      throw ConfigError("time.path", "multi-term orders need the l1 path");
  if (c.eig_cap < 1) throw ConfigError("eig_cap", "must be positive");
  if (c.reference_refine < 1) throw ConfigError("reference_refine", "must be positive");
  if (c.workers < 1) throw ConfigError("workers", "must be positive");
  // hash excludes output_dir and workers
  json canonical = j;
  canonical.erase("output_dir");
  canonical.erase("workers");
  c.canonical = canonical.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------- discretizations

Discretization::Discretization(FemFlavor f, std::shared_ptr<const Mesh> m) : flavor(f), mesh(std::move(m)) {
  switch (flavor) {
    case FemFlavor::conforming: pair = std::make_unique<DiscreteEllipticPair>(assemble(*mesh)); break;
    case FemFlavor::crouzeix_raviart: pair = std::make_unique<DiscreteEllipticPair>(assemble_cr(*mesh)); break;
    case FemFlavor::mixed_rt0: mixed = std::make_unique<MixedSystem>(*mesh, 0); break;
    case FemFlavor::mixed_rt1: mixed = std::make_unique<MixedSystem>(*mesh, 1); break;
  }
}

int Discretization::size() const { return pair ? pair->size() : mixed->scalar_size(); }
const SparseMatrix& Discretization::mass() const { return pair ? pair->mass : mixed->A; }

const SpectralBasis& Discretization::basis(int cap) const {
  check_eigen_cap(size(), cap);
  std::call_once(basis_once_, [&] { basis_ = pair ? eigendecompose(*pair, cap) : mixed_eigendecompose(*mixed, cap); });
  return basis_;
}

std::shared_ptr<const Discretization> DiscretizationCache::get(FemFlavor flavor, std::shared_ptr<const Mesh> mesh,
                                                               const std::string& key) {
  const std::string k = std::string(to_string(flavor)) + "/" + key;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(k);
    if (it != entries_.end()) return it->second;
  }
  auto d = std::make_shared<const Discretization>(flavor, std::move(mesh));
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.emplace(k, d).first->second;
}

std::shared_ptr<const Discretization> DiscretizationCache::get(FemFlavor flavor, DomainKind domain, int divisions) {
  const std::string key = std::string(to_string(domain)) + "/" + std::to_string(divisions);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(std::string(to_string(flavor)) + "/" + key);
    if (it != entries_.end()) return it->second;
  }
  return get(flavor, std::make_shared<const Mesh>(Mesh::structured({domain}, divisions)), key);
}

void DiscretizationCache::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.clear();
}

DiscretizationCache& global_cache() {
  static DiscretizationCache cache;
  return cache;
}

// ---------------------------------------------------------------- evaluation

namespace {

struct State {
  Vector u;
  Vector sigma;
};

double grading_for(const ExperimentConfig& c, const FractionalOrder& order) {
  return c.time.grading > 0.0 ? c.time.grading : default_grading(order.alpha());
}

Vector solve_mass(const SparseMatrix& M, const Vector& b) {
  Eigen::SimplicialLLT<SparseMatrix> llt(M);
  if (llt.info() != Eigen::Success) throw SolverError("mass Cholesky failed");
  return llt.solve(b);
}

Vector load_from(const Discretization& d, const ElementMoments& m) {
  return d.pair ? load_from_moments(*d.mesh, *d.pair, m) : d.mixed->scalar_load_from_moments(m);
}

Vector project_initial(const Discretization& d, const ExperimentConfig& c) {
  if (c.forcing == Forcing::manufactured_t_pow) return Vector::Zero(d.size());
  if (!c.initial.is_series()) {
    const ScalarFunction f = initial_function(c.initial);
    return d.pair ? l2_project(*d.mesh, *d.pair, f) : d.mixed->scalar_project(f);
  }
  const auto m = ExactSolutionSeries::from_spec(c.initial).moments(*d.mesh);
  return solve_mass(d.mass(), load_from(d, m));
}

// g(t) with u = t^{1+alpha} phi: P(d_t) u + lambda u = g(t) phi
double manufactured_amplitude(const FractionalOrder& order, double lambda, double t) {
  const double a = order.alpha();
  const double g2 = std::tgamma(2.0 + a);
  double g = g2 * t + lambda * std::pow(t, 1.0 + a);
  for (const auto& term : order.terms()) g += term.b * g2 * rgamma(2.0 + a - term.alpha) * std::pow(t, 1.0 + a - term.alpha);
  return g;
}

LoadFunction make_load(const Discretization& d, const ExperimentConfig& c, const FractionalOrder& order) {
  if (c.forcing == Forcing::zero) return {};
  const auto mode = ExactSolutionSeries::single_mode(c.initial.mode_m, c.initial.mode_n);
  const Vector b = load_from(d, mode.moments(*d.mesh));
  const double lambda = ExactSolutionSeries::eigenvalue(c.initial.mode_m, c.initial.mode_n);
  return [b, lambda, order](double t) -> Vector { return manufactured_amplitude(order, lambda, t) * b; };
}

std::unique_ptr<SteppingOperator> stepping_for(const Discretization& d) {
  if (d.pair) return std::make_unique<EllipticStepping>(*d.pair);
  return std::make_unique<MixedStepping>(*d.mixed);
}

std::unique_ptr<ContourPropagator> contour_for(const Discretization& d, const FractionalOrder& order, const Vector& u0) {
  if (d.pair) return std::make_unique<ContourPropagator>(*d.pair, order, u0);
  return std::make_unique<ContourPropagator>(*d.mixed, order, u0);
}

// discrete solutions at the requested times
std::vector<State> solve_at(const ExperimentConfig& c, const Discretization& d, const FractionalOrder& order,
                            const std::vector<double>& times) {
  const Vector u0 = project_initial(d, c);
  std::vector<State> out;
  if (c.time.path == TimePath::spectral) {
    SpectralPropagator prop(d.basis(c.eig_cap), d.mass(), order, u0);
    for (double t : times) {
      State s{prop.solve(t), {}};
      if (d.mixed) s.sigma = flux_from_scalar(*d.mixed, s.u);
      out.push_back(std::move(s));
    }
    return out;
  }
  if (c.time.path == TimePath::contour) {
    const auto prop = contour_for(d, order, u0);
    for (double t : times) {
      State s;
      s.u = prop->solve(t, d.mixed ? &s.sigma : nullptr);
      out.push_back(std::move(s));
    }
    return out;
  }
  const LoadFunction load = make_load(d, c, order);
  for (double t : times) {
    auto op = stepping_for(d);
    EvolutionState st = l1_evolve(*op, order, TimeGrid(t, c.time.steps, grading_for(c, order)), u0, load);
    State s{st.current(), {}};
    if (d.mixed) s.sigma = st.flux_history().back();
    out.push_back(std::move(s));
  }
  return out;
}

// exact series at time t for unit-square problems
class SeriesExact {
 public:
  SeriesExact(const ExperimentConfig& c, const FractionalOrder& order) : c_(&c), order_(order) {
    if (c.forcing == Forcing::manufactured_t_pow)
      base_ = ExactSolutionSeries::single_mode(c.initial.mode_m, c.initial.mode_n);
    else
      base_ = ExactSolutionSeries::from_spec(c.initial);
    if (order.multi_term() && c.forcing == Forcing::zero) {
      int nz = 0;
      for (int i = 0; i < base_.coefficients().size(); ++i) nz += base_.coefficients().data()[i] != 0.0;
      if (nz > 256) throw Unsupported("multi-term reference supports at most 256 nonzero modes");
    }
  }

  ExactSolutionSeries at(double t) const {
    if (c_->forcing == Forcing::manufactured_t_pow) return base_.map([&](double) { return std::pow(t, 1.0 + order_.alpha()); });
    if (!order_.multi_term()) return base_.at_time(order_.alpha(), t);
    // per-mode L1 solve on a refined grid
    const TimeGrid grid(t, c_->time.steps * c_->reference_refine, grading_for(*c_, order_));
    std::map<double, double> cache;
    return base_.map([&](double lambda) {
      auto it = cache.find(lambda);
      if (it == cache.end()) it = cache.emplace(lambda, scalar_l1_evolve(order_, grid, lambda, 1.0).back()).first;
      return it->second;
    });
  }

 private:
  const ExperimentConfig* c_;
  FractionalOrder order_;
  ExactSolutionSeries base_;
};

PiecewiseLinearField scalar_field(const Discretization& d, const Vector& u) {
  return d.pair ? PiecewiseLinearField::from_pair(*d.mesh, *d.pair, u) : d.mixed->scalar_field(u);
}

double series_metric(const std::string& metric, const Discretization& d, const State& s, const ExactSolutionSeries& ex,
                     const ElementMoments& moments, int eig_cap) {
  const Mesh& mesh = *d.mesh;
  if (metric == "l2") return l2_error_moments(mesh, scalar_field(d, s.u), moments, ex.sobolev_norm_sq(0.0));
  if (metric == "h1") {
    if (d.flavor == FemFlavor::conforming)
      return h1_error_moments(mesh, scalar_field(d, s.u), ex.laplacian().moments(mesh), ex.sobolev_norm_sq(1.0));
    return h1_seminorm_error(mesh, scalar_field(d, s.u), ex.flux());
  }
  if (metric == "max" || metric == "max_log") {
    const double e = maxnorm_error(mesh, scalar_field(d, s.u), ex.function());
    return metric == "max" ? e : e / std::abs(std::log(mesh.mesh_size()));
  }
  if (metric == "flux") return flux_error_moments(*d.mixed, s.sigma, moments, ex.sobolev_norm_sq(1.0));
  if (metric == "h2norm") return discrete_sobolev_norm(d.basis(eig_cap), d.mass(), s.u, 2.0);
  throw InvalidParameter("unknown metric " + metric);
}

// metric -> values over the report times
using CellValues = std::map<std::string, std::vector<double>>;

CellValues evaluate_square(const ExperimentConfig& c, const Discretization& d, const FractionalOrder& order) {
  const auto states = solve_at(c, d, order, c.report_times);
  const SeriesExact exact(c, order);
  CellValues out;
  for (std::size_t k = 0; k < c.report_times.size(); ++k) {
    const ExactSolutionSeries ex = exact.at(c.report_times[k]);
    bool need_moments = false;
    for (const auto& m : c.metrics) need_moments |= m == "l2" || m == "flux";
    const ElementMoments moments = need_moments ? ex.moments(*d.mesh) : ElementMoments{};
    for (const auto& m : c.metrics) out[m].push_back(series_metric(m, d, states[k], ex, moments, c.eig_cap));
  }
  return out;
}

template <class F>
void run_pool(int workers, int count, F&& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(workers, count));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string number_tag(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void add_verdict(ConvergenceReport& rep, const ExperimentConfig& c, const Curve& curve) {
  const std::string key = curve.metric + (curve.abscissa == "h" ? "_rate" : "_exponent");
  auto it = c.tolerances.find(key);
  if (it == c.tolerances.end()) return;
  Verdict v;
  v.name = key + " alpha=" + number_tag(curve.alpha) + (curve.abscissa == "h" ? " t=" : " h=") + number_tag(curve.fixed);
  v.value = curve.fit.slope;
  v.tolerance = it->second;
  v.pass = std::isfinite(v.value) && it->second.accepts(v.value);
  rep.verdicts.push_back(v);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c, bool write_files, DiscretizationCache& cache) {
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport rep;
  rep.id = c.id;
  rep.study = to_string(c.study);
  rep.version = FRACFEM_VERSION;
  rep.config_hash = c.hash();

  const int na = static_cast<int>(c.orders.size());
  if (c.study == Study::spatial) {
    const int nl = static_cast<int>(c.levels.size());
    std::vector<double> hs(nl);
    std::vector<CellValues> cells(nl * na);

    if (c.domain == DomainKind::l_shape) {
      int nref = c.levels.back(), extra = 0;
      while (nref < c.reference_level) {
        nref *= 2;
        ++extra;
      }
      const MeshHierarchy hier(Mesh::l_shape(c.levels.front()), nl + extra);
      std::vector<std::shared_ptr<const Discretization>> discs(nl + extra);
      for (int k = 0; k < nl + extra; ++k) {
        auto mesh = std::make_shared<const Mesh>(hier.mesh(k));
        discs[k] = cache.get(c.flavor, mesh, "l_shape_hierarchy/" + std::to_string(c.levels.front()) + "/" + std::to_string(k));
      }
      for (int k = 0; k < nl; ++k) hs[k] = hier.mesh(k).mesh_size();
      const int ref_level = nl + extra - 1;
      // the reference of every order and report time, then the measured levels
      std::vector<std::vector<ReferenceSolution>> refs(na);
      for (int a = 0; a < na; ++a) {
        const Discretization& dr = *discs[ref_level];
        const auto states = solve_at(c, dr, c.orders[a], c.report_times);
        for (const auto& s : states)
          refs[a].emplace_back(hier, ref_level, p1_full_nodal(*dr.mesh, *dr.pair, s.u), nl - 1);
      }
      run_pool(c.workers, nl * na, [&](int i) {
        const int l = i / na, a = i % na;
        const Discretization& d = *discs[l];
        const auto states = solve_at(c, d, c.orders[a], c.report_times);
        CellValues v;
        for (std::size_t k = 0; k < states.size(); ++k) {
          const Vector nodal = p1_full_nodal(*d.mesh, *d.pair, states[k].u);
          for (const auto& m : c.metrics)
            v[m].push_back(m == "l2" ? refs[a][k].l2_distance(l, nodal) : refs[a][k].h1_distance(l, nodal));
        }
        cells[i] = std::move(v);
      });
      rep.info["reference_divisions"] = c.reference_level;
    } else {
      std::vector<std::shared_ptr<const Discretization>> discs(nl);
      run_pool(c.workers, nl, [&](int l) { discs[l] = cache.get(c.flavor, c.domain, c.levels[l]); });
      for (int l = 0; l < nl; ++l) hs[l] = discs[l]->mesh->mesh_size();
      run_pool(c.workers, nl * na, [&](int i) {
        cells[i] = evaluate_square(c, *discs[i / na], c.orders[i % na]);
      });
    }

    for (int a = 0; a < na; ++a)
      for (std::size_t k = 0; k < c.report_times.size(); ++k)
        for (const auto& m : c.metrics) {
          Curve curve;
          curve.metric = m;
          curve.abscissa = "h";
          curve.alpha = c.orders[a].alpha();
          curve.fixed = c.report_times[k];
          curve.x = hs;
          for (int l = 0; l < nl; ++l) curve.e.push_back(cells[l * na + a].at(m)[k]);
          try {
            curve.fit = fit_rate(curve.x, curve.e);
          } catch (const InvalidParameter&) {
            curve.fit.slope = std::nan("");
          }
          add_verdict(rep, c, curve);
          rep.curves.push_back(std::move(curve));
        }
  } else {
    auto disc = cache.get(c.flavor, c.domain, c.level);
    std::vector<CellValues> cells(na);
    run_pool(c.workers, na, [&](int a) { cells[a] = evaluate_square(c, *disc, c.orders[a]); });
    for (int a = 0; a < na; ++a)
      for (const auto& m : c.metrics) {
        Curve curve;
        curve.metric = m;
        curve.abscissa = "t";
        curve.alpha = c.orders[a].alpha();
        curve.fixed = disc->mesh->mesh_size();
        curve.x = c.report_times;
        curve.e = cells[a].at(m);
        try {
          curve.fit = fit_time_exponent(curve.x, curve.e);
        } catch (const InvalidParameter&) {
          curve.fit.slope = std::nan("");
        }
        add_verdict(rep, c, curve);
        rep.curves.push_back(std::move(curve));
      }
  }

  rep.info["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.info["workers"] = c.workers;
  RunResult result{std::move(rep), {}};
  if (write_files) {
    namespace fs = std::filesystem;
    fs::create_directories(c.output_dir);
    const fs::path base = fs::path(c.output_dir) / c.id;
    {
      std::ofstream os(base.string() + ".json");
      result.report.write_json(os);
      result.files.push_back(base.string() + ".json");
    }
    {
      std::ofstream os(base.string() + ".csv");
      result.report.write_csv(os);
      result.files.push_back(base.string() + ".csv");
    }
    for (const auto& curve : result.report.curves) {
      const std::string f = base.string() + "_" + curve.metric + "_a" + number_tag(curve.alpha) + "_" +
                            (curve.abscissa == "h" ? "t" : "h") + number_tag(curve.fixed) + ".dat";
      std::ofstream os(f);
      write_dat(os, curve);
      result.files.push_back(f);
    }
  }
  return result;
}

std::string run_solve(const ExperimentConfig& c, DiscretizationCache& cache) {
  if (c.domain != DomainKind::unit_square && c.flavor != FemFlavor::conforming)
    throw Unsupported("solve on the L-shaped domain supports the conforming flavor");
  const FractionalOrder& order = c.orders.front();
  auto disc = cache.get(c.flavor, c.domain, c.level);
  const Discretization& d = *disc;
  const double horizon = c.time.horizon > 0.0 ? c.time.horizon : c.report_times.back();
  const TimeGrid grid(horizon, c.time.steps, grading_for(c, order));
  const Vector u0 = project_initial(d, c);

  std::vector<Vector> us, sigmas;
  if (c.time.path == TimePath::spectral) {
    SpectralPropagator prop(d.basis(c.eig_cap), d.mass(), order, u0);
    for (double t : grid.nodes()) us.push_back(prop.solve(t));
  } else if (c.time.path == TimePath::contour) {
    const auto prop = contour_for(d, order, u0);
    for (double t : grid.nodes()) {
      Vector sigma;
      us.push_back(prop->solve(t, d.mixed ? &sigma : nullptr));
      if (d.mixed) sigmas.push_back(std::move(sigma));
    }
  } else {
    auto op = stepping_for(d);
    EvolutionState st = l1_evolve(*op, order, grid, u0, make_load(d, c, order));
    us = st.history();
    if (d.mixed) {
      sigmas.push_back(flux_from_scalar(*d.mixed, u0));
      for (const auto& s : st.flux_history()) sigmas.push_back(s);
    }
  }
  if (d.mixed && sigmas.empty())
    for (const auto& u : us) sigmas.push_back(flux_from_scalar(*d.mixed, u));

  std::vector<std::pair<std::string, std::vector<double>>> extra;
  if (c.domain == DomainKind::unit_square) {
    const SeriesExact exact(c, order);
    std::vector<double> err;
    for (int n = 0; n <= grid.steps(); ++n) {
      const double t = grid.t(n);
      const ExactSolutionSeries ex = t > 0.0 ? exact.at(t)
                                             : (c.forcing == Forcing::zero ? ExactSolutionSeries::from_spec(c.initial)
                                                                           : exact.at(0.0));
      err.push_back(l2_error_moments(*d.mesh, scalar_field(d, us[n]), ex.moments(*d.mesh), ex.sobolev_norm_sq(0.0)));
    }
    extra.emplace_back("l2_error", std::move(err));
  }
  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir);
  const std::string path = (fs::path(c.output_dir) / (c.id + "_trajectory.csv")).string();
  std::ofstream os(path);
  write_trajectory_csv(os, grid.nodes(), us, sigmas, extra);
  if (!os) throw SolverError("cannot write " + path);
  return path;
}

}  // namespace fracfem
