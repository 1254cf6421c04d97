#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nodalot/manifold.hpp"

namespace nodalot {

struct ResolutionRule {
  int min_resolution = 96;
  double per_wavelength = 12.0;  // grid nodes per wavelength 2*pi/sqrt(lambda)
  int round_to = 16;
};

struct TransportConfig {
  std::string engine = "exact";  // exact | sinkhorn
  int sinkhorn_atoms = 600;
  int stages = 6;
  int iters_per_stage = 200;
  double marginal_tol = 1e-4;
};

struct FamilyConfig {
  std::vector<int> torus_k;          // axis modes sin(kx) on the square torus
  std::vector<int> beam_l;           // Gaussian beams on the unit sphere
  std::vector<int> combo_lambda;     // random torus eigenspace draws
  int combo_count = 2;               // seeded draws per combo eigenvalue
};

struct ExperimentConfig {
  std::uint64_t seed = 7771;
  int jobs = 1;
  double torus_size = 2.0 * 3.14159265358979323846;
  double sphere_radius = 1.0;
  ResolutionRule resolution;
  FamilyConfig family;
  std::vector<double> deltas_sqrtlambda = {0.05, 0.1, 0.2, 0.3};
  std::vector<double> p_list = {1.0, 2.0,
                                std::numeric_limits<double>::infinity()};
  std::vector<double> d_list = {4.0, 6.0, 8.0, 10.0};
  TransportConfig transport;
  std::string out_dir = ".";
  std::string format = "csv";
  // Test fixture: multiplies the witness field inside verify() to prove the
  // Lipschitz verification actually bites.  1.0 in any real run.
  double witness_scale = 1.0;
};

ExperimentConfig default_config();

// Parses and validates a JSON config document; throws ConfigInvalid with the
// offending field path.
ExperimentConfig parse_config(const std::string& json_text);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Grid resolution honoring the nodes-per-wavelength rule at this eigenvalue.
int resolution_for(const ExperimentConfig& cfg, const Manifold& m, double lambda);

struct ScanOutput {
  std::string name;                        // subcommand
  std::vector<std::string> columns;        // pinned, versioned order
  std::vector<nlohmann::json> rows;        // error rows carry an "error" key
  std::vector<std::pair<std::string, std::string>> artifacts;  // filename, body
};

ScanOutput scan_w1(const ExperimentConfig& cfg);
ScanOutput scan_tube_mass(const ExperimentConfig& cfg);
ScanOutput scan_doubling(const ExperimentConfig& cfg);
ScanOutput scan_uncertainty(const ExperimentConfig& cfg);

std::string render_csv(const ScanOutput& out);
std::string render_json(const ScanOutput& out, const ExperimentConfig& cfg);

// Writes the rendered report (plus artifacts) under cfg.out_dir and returns
// the paths written.
std::vector<std::string> write_output(const ScanOutput& out, const ExperimentConfig& cfg);

struct VerifyCheck {
  std::string name;
  bool hard = true;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const;  // every hard check passed
};

// Cross-module invariant suite on small instances; hard checks gate exit 0.
VerifyReport verify(const ExperimentConfig& cfg);

std::string sha1_hex(const std::string& bytes);
std::string format_double(double v);  // canonical %.12g rendering

}  // namespace nodalot
