#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw nodalot::Error("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_verify(const nodalot::ExperimentConfig& cfg) {
  nodalot::VerifyReport rep = nodalot::verify(cfg);
  int passed = 0;
  for (const nodalot::VerifyCheck& c : rep.checks) {
    if (c.passed) ++passed;
    std::printf("[verify] %s %-4s %-32s %s\n", c.passed ? "PASS" : "FAIL",
                c.hard ? "hard" : "soft", c.name.c_str(), c.detail.c_str());
  }
  std::printf("[verify] %d/%zu checks passed: %s\n", passed, rep.checks.size(),
              rep.ok() ? "OK" : "HARD FAILURE");
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodal sets, wavelength tubes and transport distances of Laplace eigenfunctions"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  long long jobs = 1;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (defaults built in)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "master seed");
    return sub;
  };

  add_common(app.add_subcommand("scan-w1", "transport distance between the sign measures"));
  add_common(app.add_subcommand("scan-tube-mass", "mass retention outside wavelength tubes"));
  add_common(app.add_subcommand("scan-doubling", "doubling exponents, coverings and good balls"));
  add_common(app.add_subcommand("scan-uncertainty", "transport-length uncertainty products"));
  add_common(app.add_subcommand("verify", "invariant suite; exits nonzero on any hard failure"));

  CLI11_PARSE(app, argc, argv);

  try {
    nodalot::ExperimentConfig cfg = config_path.empty()
                                        ? nodalot::default_config()
                                        : nodalot::parse_config(slurp(config_path));
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) cfg.out_dir = out_dir;
    if (sub->count("--format")) cfg.format = format;
    if (sub->count("--jobs")) cfg.jobs = static_cast<int>(jobs);
    if (sub->count("--seed")) cfg.seed = seed;

    const std::string name = sub->get_name();
    if (name == "verify") return run_verify(cfg);

    nodalot::ScanOutput out;
    if (name == "scan-w1")
      out = nodalot::scan_w1(cfg);
    else if (name == "scan-tube-mass")
      out = nodalot::scan_tube_mass(cfg);
    else if (name == "scan-doubling")
      out = nodalot::scan_doubling(cfg);
    else
      out = nodalot::scan_uncertainty(cfg);

    for (const std::string& p : nodalot::write_output(out, cfg))
      std::printf("wrote %s\n", p.c_str());

    int errors = 0;
    for (const auto& r : out.rows) errors += r.contains("error") ? 1 : 0;
    if (errors > 0) {
      std::fprintf(stderr, "%d instance(s) failed; see report comment rows\n", errors);
      return 2;
    }
    return 0;
  } catch (const nodalot::ConfigInvalid& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 64;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
}
