#pragma once

#include "fracfem/experiment.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fracfem {

// Command-line and environment overrides of run settings. Environment variables
// FRACFEM_OUT, FRACFEM_WORKERS and FRACFEM_SEED are read first; flags win.
struct RunOverrides {
  std::optional<std::string> output_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

RunOverrides env_overrides();
RunOverrides merge(RunOverrides base, const RunOverrides& top);
void apply(ExperimentConfig& config, const RunOverrides& overrides);

// mesh.txt and operator files (coordinate format) of one discretization
void export_discretization(const std::string& dir, const Discretization& d);

}  // namespace fracfem
