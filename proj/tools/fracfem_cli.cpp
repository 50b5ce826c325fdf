#include "fracfem/experiment.hpp"
#include "fracfem/fractional.hpp"
#include "fracfem/io.hpp"
#include "fracfem/kernels.hpp"
#include "fracfem/mesh.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace fracfem;

namespace {

enum Exit { kPass = 0, kToleranceFail = 1, kConfigError = 2, kRuntimeError = 3 };

int converge(const std::string& path, const RunOverrides& o) {
  ExperimentConfig c = load_config(path);
  apply(c, o);
  RunResult r = run_experiment(c);
  for (const auto& v : r.report.verdicts)
    std::printf("%s %-40s %10.4f in %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value,
                v.tolerance.describe().c_str());
  for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
  std::printf("%s %s config %s\n", r.report.pass() ? "PASS" : "FAIL", c.id.c_str(), hex64(c.hash()).c_str());
  return r.report.pass() ? kPass : kToleranceFail;
}

int solve(const std::string& path, const RunOverrides& o) {
  ExperimentConfig c = load_config(path);
  apply(c, o);
  std::printf("wrote %s\n", run_solve(c).c_str());
  return kPass;
}

int mesh_info(const std::string& domain, int n, const std::string& export_dir, const std::string& flavor) {
  DomainSpec spec{domain_kind_from_string(domain)};
  Mesh mesh = Mesh::structured(spec, n);
  mesh.validate();
  std::printf("domain          %s\n", to_string(spec.kind));
  std::printf("divisions       %d\n", n);
  std::printf("vertices        %d (interior %d)\n", mesh.num_vertices(), mesh.num_interior_vertices());
  std::printf("triangles       %d\n", mesh.num_triangles());
  std::printf("edges           %d (interior %d)\n", mesh.num_edges(), mesh.num_interior_edges());
  std::printf("mesh size h     %.17g\n", mesh.mesh_size());
  std::printf("area            %.17g\n", mesh.total_area());
  std::printf("min angle deg   %.12g\n", mesh.min_angle() * 180.0 / 3.14159265358979323846);
  std::printf("R/r             %.12g\n", mesh.shape_regularity());
  std::printf("beta            %.12g\n", spec.reentrant_exponent());
  if (!export_dir.empty()) {
    FemFlavor f = FemFlavor::conforming;
    if (flavor == "crouzeix_raviart") f = FemFlavor::crouzeix_raviart;
    else if (flavor == "mixed_rt0") f = FemFlavor::mixed_rt0;
    else if (flavor == "mixed_rt1") f = FemFlavor::mixed_rt1;
    else if (flavor != "conforming") throw ConfigError("--flavor", "unknown flavor '" + flavor + "'");
    export_discretization(export_dir, Discretization(f, std::make_shared<const Mesh>(mesh)));
    std::printf("exported to %s\n", export_dir.c_str());
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element laboratory for time-fractional diffusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FRACFEM_VERSION);

  std::string out;
  int workers = 0;
  std::uint64_t seed = 0;
  bool serial = false;
  app.add_option("--out", out, "output directory (env FRACFEM_OUT)");
  app.add_option("--workers", workers, "parallel experiment cells (env FRACFEM_WORKERS)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized probes (env FRACFEM_SEED)");
  app.add_flag("--serial", serial, "use the serial reference kernels");

  std::string config;
  auto* conv = app.add_subcommand("converge", "run a convergence study; exit 0 pass, 1 tolerance fail, 2 config error, 3 runtime error");
  conv->add_option("--config", config, "experiment JSON")->required();
  conv->fallthrough();
  auto* sol = app.add_subcommand("solve", "single-level evolution with trajectory CSV");
  sol->add_option("--config", config, "experiment JSON")->required();
  sol->fallthrough();

  double alpha = 0, beta = 0, z = 0;
  auto* ml = app.add_subcommand("ml-eval", "evaluate E_{alpha,beta}(z) for z <= 0");
  ml->add_option("alpha", alpha)->required();
  ml->add_option("beta", beta)->required();
  ml->add_option("z", z)->required();

  std::string domain = "unit_square", export_dir, flavor = "conforming";
  int n = 8;
  auto* mi = app.add_subcommand("mesh-info", "structured mesh statistics and optional export");
  mi->add_option("--domain", domain, "unit_square or l_shape");
  mi->add_option("--n", n, "divisions per unit direction")->check(CLI::PositiveNumber);
  mi->add_option("--export", export_dir, "write mesh and operators to this directory");
  mi->add_option("--flavor", flavor, "operators to export");
  mi->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  if (serial) set_default_exec(Exec::serial);

  RunOverrides flags;
  if (!out.empty()) flags.output_dir = out;
  if (workers > 0) flags.workers = workers;
  if (app.count("--seed")) flags.seed = seed;

  try {
    const RunOverrides o = merge(env_overrides(), flags);
    if (*conv) return converge(config, o);
    if (*sol) return solve(config, o);
    if (*ml) {
      std::printf("%.17g\n", mittag_leffler(alpha, beta, z));
      return kPass;
    }
    if (*mi) return mesh_info(domain, n, export_dir, flavor);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return *ml || *mi ? kConfigError : kRuntimeError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kRuntimeError;
  }
  return kRuntimeError;
}
