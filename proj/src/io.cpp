#include "fracfem/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace fracfem {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

}  // namespace

RunOverrides env_overrides() {
  RunOverrides o;
  o.output_dir = env("FRACFEM_OUT");
  try {
    if (auto w = env("FRACFEM_WORKERS")) o.workers = std::stoi(*w);
    if (auto s = env("FRACFEM_SEED")) o.seed = std::stoull(*s);
  } catch (const std::exception&) {
    throw ConfigError("environment", "FRACFEM_WORKERS and FRACFEM_SEED must be integers");
  }
  if (o.workers && *o.workers < 1) throw ConfigError("environment", "FRACFEM_WORKERS must be positive");
  return o;
}

RunOverrides merge(RunOverrides base, const RunOverrides& top) {
  if (top.output_dir) base.output_dir = top.output_dir;
  if (top.workers) base.workers = top.workers;
  if (top.seed) base.seed = top.seed;
  return base;
}

void apply(ExperimentConfig& c, const RunOverrides& o) {
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.workers) c.workers = *o.workers;
  if (o.seed) c.seed = *o.seed;
}

void export_discretization(const std::string& dir, const Discretization& d) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "mesh.txt");
    d.mesh->write(os);
  }
  if (d.pair) {
    std::ofstream k(fs::path(dir) / "stiffness.txt");
    export_coordinate(k, d.pair->stiffness);
    std::ofstream m(fs::path(dir) / "mass.txt");
    export_coordinate(m, d.pair->mass);
  } else {
    std::ofstream os(fs::path(dir) / "mixed_blocks.txt");
    export_mixed(os, *d.mixed);
  }
}

}  // namespace fracfem
