#pragma once

#include "fracfem/convergence.hpp"
#include "fracfem/dense_eigen.hpp"
#include "fracfem/elliptic.hpp"
#include "fracfem/fractional.hpp"
#include "fracfem/initial_data.hpp"
#include "fracfem/mesh.hpp"
#include "fracfem/mixed.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracfem {

enum class FemFlavor { conforming, crouzeix_raviart, mixed_rt0, mixed_rt1 };
enum class Study { spatial, temporal, smoothing };
enum class TimePath { spectral, contour, l1 };
enum class Forcing { zero, manufactured_t_pow };

const char* to_string(FemFlavor f);
const char* to_string(Study s);
const char* to_string(TimePath p);
const char* to_string(Forcing f);
bool is_mixed(FemFlavor f);

// Invalid configuration; path names the offending field, e.g. "order.terms[0].b".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct TimeSettings {
  TimePath path = TimePath::spectral;
  int steps = 256;
  double grading = 0.0;  // 0 selects (2 - alpha) / alpha
  double horizon = 0.0;  // solve only; 0 selects the last report time
};

struct ExperimentConfig {
  std::string id = "experiment";
  Study study = Study::spatial;
  DomainKind domain = DomainKind::unit_square;
  FemFlavor flavor = FemFlavor::conforming;
  std::vector<FractionalOrder> orders{FractionalOrder(0.5)};
  InitialDataSpec initial;
  Forcing forcing = Forcing::zero;
  std::vector<int> levels{8, 16, 32};
  int level = 16;
  TimeSettings time;
  std::vector<double> report_times{0.1, 0.5, 1.0};
  std::vector<std::string> metrics{"l2"};
  int reference_level = 0;  // divisions of the reference mesh (L-shape)
  int reference_refine = 16;  // multi-term series reference: step factor
  int eig_cap = kDefaultEigenCap;
  std::map<std::string, Tolerance> tolerances;
  std::string output_dir = "out";
  int workers = 1;
  std::uint64_t seed = 1;
  std::string canonical;  // normalized JSON used for the config hash

  std::uint64_t hash() const { return fnv1a(canonical); }
};

// Parses and validates; throws ConfigError naming the first bad field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// One spatial discretization with lazily computed spectral basis; shared between experiments.
struct Discretization {
  FemFlavor flavor = FemFlavor::conforming;
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<DiscreteEllipticPair> pair;
  std::unique_ptr<MixedSystem> mixed;

  Discretization(FemFlavor flavor, std::shared_ptr<const Mesh> mesh);
  int size() const;
  const SparseMatrix& mass() const;
  const SpectralBasis& basis(int cap) const;

 private:
  mutable std::once_flag basis_once_;
  mutable SpectralBasis basis_;
};

class DiscretizationCache {
 public:
  std::shared_ptr<const Discretization> get(FemFlavor flavor, std::shared_ptr<const Mesh> mesh, const std::string& key);
  std::shared_ptr<const Discretization> get(FemFlavor flavor, DomainKind domain, int divisions);
  void clear();

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Discretization>> entries_;
};

DiscretizationCache& global_cache();

struct RunResult {
  ConvergenceReport report;
  std::vector<std::string> files;
};

// Runs the configured study. Reports are written to config.output_dir when write_files is set.
RunResult run_experiment(const ExperimentConfig& config, bool write_files = true,
                         DiscretizationCache& cache = global_cache());

// Single-level trajectory: writes <output_dir>/<id>_trajectory.csv and returns its path.
std::string run_solve(const ExperimentConfig& config, DiscretizationCache& cache = global_cache());

}  // namespace fracfem
