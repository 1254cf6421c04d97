#include "nodalot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>
#include <utility>

#include "nodalot/densetransport.hpp"
#include "nodalot/eigenmodel.hpp"
#include "nodalot/errors.hpp"
#include "nodalot/fit.hpp"
#include "nodalot/grid.hpp"
#include "nodalot/growth.hpp"
#include "nodalot/massconc.hpp"
#include "nodalot/mincostflow.hpp"
#include "nodalot/nodal.hpp"
#include "nodalot/oracle1d.hpp"
#include "nodalot/transport.hpp"

namespace nodalot {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;
constexpr int kDoublingProbes = 200;   // random centers per df scan
constexpr int kFrequencyBudget = 128;  // lift evaluations per ball scan
constexpr double kCoveringR0 = 2.0;    // covering radius r0 / sqrt(lambda)

// Pinned column orders; renderers bump the "v1" tag if these ever change.
const std::vector<std::string> kW1Columns = {
    "family", "seed",        "lambda", "resolution",   "engine",
    "w1",     "lower_bound", "l1",     "atoms",        "marginal_err"};
const std::vector<std::string> kRetentionColumns = {
    "family",      "seed",      "lambda",    "p",        "delta",
    "delta_sqrtlambda", "ratio_total", "ratio_pos", "ratio_neg"};
const std::vector<std::string> kDoublingColumns = {
    "family",       "seed",          "lambda",       "resolution",
    "probes",       "max_doubling",  "mean_doubling", "multiplicity",
    "d",            "mass_fraction_good", "ball_fraction_good", "mass_bound"};
const std::vector<std::string> kGoodBallColumns = {
    "ball_index", "center", "r", "Np_ratio", "good_doubling",
    "N_lift",     "good_frequency", "deep_flag"};
const std::vector<std::string> kUncertaintyColumns = {
    "family", "seed", "lambda", "resolution", "engine",
    "w1",     "l1",   "nodal_length", "product"};

// ---------------------------------------------------------------------------
// SHA-1 (FIPS 180-1), used to fingerprint report content.

struct Sha1 {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                        0xC3D2E1F0u};
  std::uint64_t bits = 0;
  unsigned char buf[64];
  std::size_t fill = 0;

  static std::uint32_t rol(std::uint32_t v, int s) {
    return (v << s) | (v >> (32 - s));
  }

  void block(const unsigned char* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const unsigned char* p, std::size_t n) {
    bits += 8ull * n;
    while (n > 0) {
      std::size_t take = std::min(n, std::size_t(64) - fill);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == 64) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string hex_digest() {
    std::uint64_t total = bits;
    const unsigned char pad = 0x80, zero = 0;
    update(&pad, 1);
    while (fill != 56) update(&zero, 1);
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = (total >> (56 - 8 * i)) & 0xFFu;
    update(len, 8);
    char out[41];
    for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 40);
  }
};

// ---------------------------------------------------------------------------
// Config parsing.

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigInvalid(path, msg);
}

const json* maybe(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void expect_keys(const json& j, const std::string& base,
                 std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) bad(base + "." + it.key(), "unknown field");
  }
}

void load_int(const json& j, const std::string& base, const char* key, int& out,
              long long lo, long long hi) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_number_integer() && !v->is_number_unsigned())
    bad(base + "." + key, "expected an integer");
  long long x = v->get<long long>();
  if (x < lo || x > hi)
    bad(base + "." + key,
        "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  out = static_cast<int>(x);
}

void load_u64(const json& j, const std::string& base, const char* key,
              std::uint64_t& out) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (v->is_number_unsigned())
    out = v->get<std::uint64_t>();
  else if (v->is_number_integer() && v->get<long long>() >= 0)
    out = static_cast<std::uint64_t>(v->get<long long>());
  else
    bad(base + "." + key, "expected a non-negative integer");
}

void load_double(const json& j, const std::string& base, const char* key,
                 double& out, double lo, double hi) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_number()) bad(base + "." + key, "expected a number");
  double x = v->get<double>();
  if (!(x >= lo && x <= hi))
    bad(base + "." + key, "out of range [" + format_double(lo) + ", " +
                              format_double(hi) + "]");
  out = x;
}

void load_string(const json& j, const std::string& base, const char* key,
                 std::string& out) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_string()) bad(base + "." + key, "expected a string");
  out = v->get<std::string>();
}

void load_int_list(const json& j, const std::string& base, const char* key,
                   std::vector<int>& out, long long lo, long long hi) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_array()) bad(base + "." + key, "expected an array");
  std::vector<int> got;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    std::string path = base + "." + key + "[" + std::to_string(i) + "]";
    if (!e.is_number_integer() && !e.is_number_unsigned())
      bad(path, "expected an integer");
    long long x = e.get<long long>();
    if (x < lo || x > hi)
      bad(path, "out of range [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
    got.push_back(static_cast<int>(x));
  }
  out = std::move(got);
}

void load_double_list(const json& j, const std::string& base, const char* key,
                      std::vector<double>& out, double lo, double hi) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_array()) bad(base + "." + key, "expected an array");
  std::vector<double> got;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    std::string path = base + "." + key + "[" + std::to_string(i) + "]";
    if (!e.is_number()) bad(path, "expected a number");
    double x = e.get<double>();
    if (!(x >= lo && x <= hi))
      bad(path, "out of range [" + format_double(lo) + ", " +
                    format_double(hi) + "]");
    got.push_back(x);
  }
  out = std::move(got);
}

// p entries are numbers >= 1 or the string "inf".
void load_p_list(const json& j, const char* key, std::vector<double>& out) {
  const json* v = maybe(j, key);
  if (!v) return;
  if (!v->is_array()) bad(std::string("$.") + key, "expected an array");
  std::vector<double> got;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    std::string path = std::string("$.") + key + "[" + std::to_string(i) + "]";
    if (e.is_string()) {
      if (e.get<std::string>() != "inf") bad(path, "expected a number or \"inf\"");
      got.push_back(std::numeric_limits<double>::infinity());
    } else if (e.is_number()) {
      double p = e.get<double>();
      if (!(p >= 1.0)) bad(path, "p must be >= 1");
      got.push_back(p);
    } else {
      bad(path, "expected a number or \"inf\"");
    }
  }
  if (got.empty()) bad(std::string("$.") + key, "must not be empty");
  out = std::move(got);
}

// ---------------------------------------------------------------------------
// Instances and the parallel driver.

json json_num(double v) {
  if (std::isfinite(v)) return json(v);
  return json(format_double(v));  // "inf" / "-inf" / "nan"
}

struct Instance {
  std::string family;
  Eigenfunction e;
  std::uint64_t seed = 0;
  bool broken = false;  // construction failed; carries the message instead
  std::string error;
};

std::vector<Instance> build_instances(const ExperimentConfig& cfg) {
  std::vector<Instance> out;
  const Manifold torus = Manifold::flat_torus(cfg.torus_size, cfg.torus_size);
  std::uint64_t idx = 0;
  auto next_seed = [&] { return cfg.seed + 1000ull * idx++; };
  for (int k : cfg.family.torus_k) {
    Instance s;
    s.family = "torus_mode";
    s.seed = next_seed();
    s.e = make_torus_mode(torus, {{k, 0, 1.0, 0.0}});
    out.push_back(std::move(s));
  }
  for (int l : cfg.family.beam_l) {
    Instance s;
    s.family = "beam";
    s.seed = next_seed();
    s.e = make_gaussian_beam(l, cfg.sphere_radius);
    out.push_back(std::move(s));
  }
  for (int lam : cfg.family.combo_lambda)
    for (int c = 0; c < cfg.family.combo_count; ++c) {
      Instance s;
      s.family = "torus_combo";
      s.seed = next_seed();
      try {
        s.e = random_torus_combination(lam, s.seed);
      } catch (const std::exception& ex) {
        s.broken = true;
        s.error = ex.what();
        s.e.eigenvalue = lam;
      }
      out.push_back(std::move(s));
    }
  return out;
}

struct InstanceOut {
  std::vector<json> rows;
  std::vector<std::pair<std::string, std::string>> artifacts;
};

json error_row(const Instance& s, const std::string& msg) {
  json r;
  r["error"] = msg;
  r["family"] = s.family;
  r["seed"] = s.seed;
  r["lambda"] = json_num(s.e.eigenvalue);
  return r;
}

// Runs one task per instance on cfg.jobs threads; output order is the
// instance order regardless of scheduling, so reports are deterministic.
std::vector<InstanceOut> run_instances(
    const ExperimentConfig& cfg, const std::vector<Instance>& list,
    const std::function<InstanceOut(const Instance&)>& work) {
  std::vector<InstanceOut> slots(list.size());
  auto run_one = [&](std::size_t i) {
    const Instance& s = list[i];
    if (s.broken) {
      slots[i].rows.push_back(error_row(s, s.error));
      return;
    }
    try {
      slots[i] = work(s);
    } catch (const std::exception& ex) {
      slots[i].rows.assign(1, error_row(s, ex.what()));
      slots[i].artifacts.clear();
    }
  };
  std::size_t jobs = std::min<std::size_t>(std::max(cfg.jobs, 1), list.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < list.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = cursor.fetch_add(1); i < list.size();
             i = cursor.fetch_add(1))
          run_one(i);
      });
    for (auto& th : pool) th.join();
  }
  return slots;
}

ScanOutput gather(const char* name, const std::vector<std::string>& columns,
                  const ExperimentConfig& cfg,
                  const std::function<InstanceOut(const Instance&)>& work) {
  ScanOutput out;
  out.name = name;
  out.columns = columns;
  std::vector<Instance> list = build_instances(cfg);
  std::vector<InstanceOut> slots = run_instances(cfg, list, work);
  for (auto& slot : slots) {
    for (auto& r : slot.rows) out.rows.push_back(std::move(r));
    for (auto& a : slot.artifacts) out.artifacts.push_back(std::move(a));
  }
  return out;
}

struct Prepared {
  int resolution = 0;
  ScalarField f;
  NodalGeometry ng;
};

Prepared prepare(const ExperimentConfig& cfg, const Instance& s) {
  Prepared p;
  p.resolution = resolution_for(cfg, s.e.manifold, s.e.eigenvalue);
  p.f = sample(s.e, build_grid(s.e.manifold, p.resolution));
  p.ng = extract_nodal_set(p.f, s.e.eigenvalue);
  return p;
}

SinkhornRunOptions sinkhorn_options(const ExperimentConfig& cfg,
                                    std::uint64_t seed) {
  SinkhornRunOptions o;
  o.target_atoms = cfg.transport.sinkhorn_atoms;
  o.seed = seed;
  o.stages = cfg.transport.stages;
  o.iters_per_stage = cfg.transport.iters_per_stage;
  o.marginal_tol = cfg.transport.marginal_tol;
  return o;
}

TransportResult run_transport(const ExperimentConfig& cfg, const Instance& s,
                              const ScalarField& f, const SignedMeasures& sm) {
  if (cfg.transport.engine == "exact") return w1_exact(f, sm);
  return w1_sinkhorn(f, sm, sinkhorn_options(cfg, s.seed));
}

void stamp(json& r, const Instance& s, int resolution) {
  r["family"] = s.family;
  r["seed"] = s.seed;
  r["lambda"] = json_num(s.e.eigenvalue);
  r["resolution"] = resolution;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += sep;
    s += parts[i];
  }
  return s;
}

std::string goodball_csv(const BallScan& scan, const GoodBallReport& rep,
                         double d) {
  std::string s = "# nodalot-csv v1 goodballs d=" + format_double(d) + "\n";
  s += join(kGoodBallColumns, ',') + "\n";
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    const BallScanRow& b = scan.rows[i];
    s += std::to_string(b.index);
    s += ',';
    s += format_double(b.center.x()) + ";" + format_double(b.center.y());
    s += ',';
    s += format_double(b.r);
    s += ',';
    s += format_double(b.np_ratio);
    s += ',';
    s += rep.good_doubling[i] ? '1' : '0';
    s += ',';
    s += format_double(b.n_lift);
    s += ',';
    s += std::to_string(static_cast<int>(rep.good_frequency[i]));
    s += ',';
    s += b.deep ? '1' : '0';
    s += '\n';
  }
  return s;
}

std::string goodball_name(const Instance& s) {
  long long lam = std::llround(s.e.eigenvalue);
  return "goodballs_" + s.family + "_lam" + std::to_string(lam) + "_seed" +
         std::to_string(s.seed) + ".csv";
}

std::string cell(const json& row, const std::string& key) {
  auto it = row.find(key);
  if (it == row.end()) return "";
  const json& v = *it;
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string sanitize_comment(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Max |f(a)-f(b)| / len over grid edges: the graph Lipschitz constant.
double edge_lipschitz(const SampleGrid& g, const Eigen::ArrayXd& v) {
  double worst = 0.0;
  for (int a = 0; a < g.node_count(); ++a)
    for (int idx = g.adj_offsets[a]; idx < g.adj_offsets[a + 1]; ++idx) {
      int b = g.adj_targets[idx];
      double len = g.adj_lengths[idx];
      if (len > 0.0) worst = std::max(worst, std::abs(v[a] - v[b]) / len);
    }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string sha1_hex(const std::string& bytes) {
  Sha1 h;
  h.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return h.hex_digest();
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.family.torus_k = {2, 4, 8, 16, 32};
  cfg.family.beam_l = {8, 16, 32};
  cfg.family.combo_lambda = {25, 325};
  cfg.family.combo_count = 2;
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& ex) {
    bad("$", std::string("not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) bad("$", "top level must be an object");
  expect_keys(j, "$",
              {"seed", "jobs", "torus_size", "sphere_radius", "resolution",
               "family", "deltas_sqrtlambda", "p_list", "d_list", "transport",
               "out_dir", "format", "_fixtures"});

  ExperimentConfig cfg = default_config();
  load_u64(j, "$", "seed", cfg.seed);
  load_int(j, "$", "jobs", cfg.jobs, 1, 1024);
  load_double(j, "$", "torus_size", cfg.torus_size, 1e-6, 1e6);
  load_double(j, "$", "sphere_radius", cfg.sphere_radius, 1e-6, 1e6);

  if (const json* r = maybe(j, "resolution")) {
    if (!r->is_object()) bad("$.resolution", "expected an object");
    expect_keys(*r, "$.resolution", {"min_resolution", "per_wavelength", "round_to"});
    load_int(*r, "$.resolution", "min_resolution", cfg.resolution.min_resolution, 16, 4096);
    load_double(*r, "$.resolution", "per_wavelength", cfg.resolution.per_wavelength, 1e-3, 64.0);
    load_int(*r, "$.resolution", "round_to", cfg.resolution.round_to, 1, 256);
  }

  if (const json* f = maybe(j, "family")) {
    if (!f->is_object()) bad("$.family", "expected an object");
    expect_keys(*f, "$.family", {"torus_k", "beam_l", "combo_lambda", "combo_count"});
    load_int_list(*f, "$.family", "torus_k", cfg.family.torus_k, 1, 128);
    load_int_list(*f, "$.family", "beam_l", cfg.family.beam_l, 1, 128);
    load_int_list(*f, "$.family", "combo_lambda", cfg.family.combo_lambda, 1, 100000);
    load_int(*f, "$.family", "combo_count", cfg.family.combo_count, 0, 64);
  }

  load_double_list(j, "$", "deltas_sqrtlambda", cfg.deltas_sqrtlambda, 0.0, 100.0);
  load_p_list(j, "p_list", cfg.p_list);
  load_double_list(j, "$", "d_list", cfg.d_list, 1e-6, 64.0);

  if (const json* t = maybe(j, "transport")) {
    if (!t->is_object()) bad("$.transport", "expected an object");
    expect_keys(*t, "$.transport",
                {"engine", "sinkhorn_atoms", "stages", "iters_per_stage", "marginal_tol"});
    load_string(*t, "$.transport", "engine", cfg.transport.engine);
    load_int(*t, "$.transport", "sinkhorn_atoms", cfg.transport.sinkhorn_atoms, 16, 100000);
    load_int(*t, "$.transport", "stages", cfg.transport.stages, 1, 100);
    load_int(*t, "$.transport", "iters_per_stage", cfg.transport.iters_per_stage, 1, 100000);
    load_double(*t, "$.transport", "marginal_tol", cfg.transport.marginal_tol, 1e-12, 1.0);
  }

  load_string(j, "$", "out_dir", cfg.out_dir);
  load_string(j, "$", "format", cfg.format);

  if (const json* fx = maybe(j, "_fixtures")) {
    if (!fx->is_object()) bad("$._fixtures", "expected an object");
    expect_keys(*fx, "$._fixtures", {"witness_scale"});
    load_double(*fx, "$._fixtures", "witness_scale", cfg.witness_scale, 1e-6, 100.0);
  }

  if (cfg.format != "csv" && cfg.format != "json")
    bad("$.format", "expected \"csv\" or \"json\"");
  if (cfg.transport.engine != "exact" && cfg.transport.engine != "sinkhorn")
    bad("$.transport.engine", "expected \"exact\" or \"sinkhorn\"");
  bool have_combo = !cfg.family.combo_lambda.empty() && cfg.family.combo_count > 0;
  if (cfg.family.torus_k.empty() && cfg.family.beam_l.empty() && !have_combo)
    bad("$.family", "no instances: torus_k, beam_l and combo_lambda are all empty");
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json ps = json::array();
  for (double p : cfg.p_list) ps.push_back(std::isinf(p) ? json("inf") : json(p));
  return json{
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"torus_size", cfg.torus_size},
      {"sphere_radius", cfg.sphere_radius},
      {"resolution",
       {{"min_resolution", cfg.resolution.min_resolution},
        {"per_wavelength", cfg.resolution.per_wavelength},
        {"round_to", cfg.resolution.round_to}}},
      {"family",
       {{"torus_k", cfg.family.torus_k},
        {"beam_l", cfg.family.beam_l},
        {"combo_lambda", cfg.family.combo_lambda},
        {"combo_count", cfg.family.combo_count}}},
      {"deltas_sqrtlambda", cfg.deltas_sqrtlambda},
      {"p_list", ps},
      {"d_list", cfg.d_list},
      {"transport",
       {{"engine", cfg.transport.engine},
        {"sinkhorn_atoms", cfg.transport.sinkhorn_atoms},
        {"stages", cfg.transport.stages},
        {"iters_per_stage", cfg.transport.iters_per_stage},
        {"marginal_tol", cfg.transport.marginal_tol}}},
      {"out_dir", cfg.out_dir},
      {"format", cfg.format},
      {"_fixtures", {{"witness_scale", cfg.witness_scale}}},
  };
}

int resolution_for(const ExperimentConfig& cfg, const Manifold& m, double lambda) {
  double sl = std::sqrt(std::max(lambda, 0.0));
  double rule, floor_n;
  if (m.is_torus()) {
    // n nodes per axis: wavelength / step = 2*pi*n / (L*sqrt(lambda)).
    rule = cfg.resolution.per_wavelength * std::max(m.lx(), m.ly()) * sl / (2.0 * kPi);
    floor_n = cfg.resolution.min_resolution;
  } else {
    // n rings: wavelength / (R*pi/n) = 2n / (R*sqrt(lambda)).
    rule = cfg.resolution.per_wavelength * m.radius() * sl / 2.0;
    floor_n = cfg.resolution.min_resolution / 2.0;
  }
  double raw = std::max(rule, floor_n);
  int r = cfg.resolution.round_to;
  return r * static_cast<int>(std::ceil(raw / r - 1e-12));
}

// ---------------------------------------------------------------------------
// Scans.

ScanOutput scan_w1(const ExperimentConfig& cfg) {
  return gather("w1", kW1Columns, cfg, [&cfg](const Instance& s) {
    InstanceOut out;
    Prepared p = prepare(cfg, s);
    SignedMeasures sm = signed_measures(p.f);
    TransportResult tr = run_transport(cfg, s, p.f, sm);
    WitnessResult wit = lipschitz_witness(p.f, p.ng, sm);
    json r;
    stamp(r, s, p.resolution);
    r["engine"] = tr.method;
    r["w1"] = json_num(tr.value);
    r["lower_bound"] = json_num(wit.lower_bound);
    r["l1"] = json_num(lp_norm(p.f, 1.0));
    r["atoms"] = tr.atoms;
    r["marginal_err"] = json_num(tr.marginal_err);
    out.rows.push_back(std::move(r));
    return out;
  });
}

ScanOutput scan_tube_mass(const ExperimentConfig& cfg) {
  return gather("tube_mass", kRetentionColumns, cfg, [&cfg](const Instance& s) {
    InstanceOut out;
    Prepared p = prepare(cfg, s);
    double sl = std::sqrt(s.e.eigenvalue);
    std::vector<double> deltas;
    deltas.reserve(cfg.deltas_sqrtlambda.size());
    for (double ds : cfg.deltas_sqrtlambda) deltas.push_back(ds / sl);
    RetentionReport rep = retention(p.f, p.ng, deltas, cfg.p_list);
    for (const RetentionRow& row : rep.rows) {
      json r;
      r["family"] = s.family;
      r["seed"] = s.seed;
      r["lambda"] = json_num(s.e.eigenvalue);
      r["p"] = json_num(row.p);
      r["delta"] = json_num(row.delta);
      r["delta_sqrtlambda"] = json_num(row.delta_sqrtlambda);
      r["ratio_total"] = json_num(row.ratio_total);
      r["ratio_pos"] = json_num(row.ratio_pos);
      r["ratio_neg"] = json_num(row.ratio_neg);
      out.rows.push_back(std::move(r));
    }
    return out;
  });
}

ScanOutput scan_doubling(const ExperimentConfig& cfg) {
  return gather("doubling", kDoublingColumns, cfg, [&cfg](const Instance& s) {
    InstanceOut out;
    Prepared p = prepare(cfg, s);
    DoublingScanResult df =
        df_scan(p.f, s.e.eigenvalue, kDoublingProbes, s.seed);
    Covering cov = build_covering(p.ng, kCoveringR0);
    BallScanOptions bo;
    bo.p = 2.0;
    bo.frequency_budget = kFrequencyBudget;
    bo.seed = s.seed;
    BallScan scan = scan_balls(p.f, s.e, cov, bo);
    bool first = true;
    for (double d : cfg.d_list) {
      GoodBallReport rep = classify_good_balls(p.f, cov, scan, d);
      if (first) {
        out.artifacts.emplace_back(goodball_name(s), goodball_csv(scan, rep, d));
        first = false;
      }
      json r;
      stamp(r, s, p.resolution);
      r["probes"] = df.probes;
      r["max_doubling"] = json_num(df.max_doubling);
      r["mean_doubling"] = json_num(df.mean_doubling);
      r["multiplicity"] = rep.multiplicity;
      r["d"] = json_num(d);
      r["mass_fraction_good"] = json_num(rep.mass_fraction_good);
      r["ball_fraction_good"] = json_num(rep.ball_fraction_good);
      r["mass_bound"] = json_num(rep.mass_bound);
      out.rows.push_back(std::move(r));
    }
    return out;
  });
}

ScanOutput scan_uncertainty(const ExperimentConfig& cfg) {
  return gather("uncertainty", kUncertaintyColumns, cfg, [&cfg](const Instance& s) {
    InstanceOut out;
    Prepared p = prepare(cfg, s);
    bool exact = cfg.transport.engine == "exact";
    UncertaintyResult un =
        uncertainty_product(p.f, p.ng, exact, sinkhorn_options(cfg, s.seed));
    json r;
    stamp(r, s, p.resolution);
    r["engine"] = exact ? "exact_flow" : "sinkhorn";
    r["w1"] = json_num(un.w1);
    r["l1"] = json_num(un.l1);
    r["nodal_length"] = json_num(un.nodal_length);
    r["product"] = json_num(un.product);
    out.rows.push_back(std::move(r));
    return out;
  });
}

// ---------------------------------------------------------------------------
// Rendering and output.

std::string render_csv(const ScanOutput& out) {
  std::string s = "# nodalot-csv v1 " + out.name + "\n";
  s += join(out.columns, ',') + "\n";
  for (const json& row : out.rows) {
    if (row.contains("error")) {
      s += "# error family=" + sanitize_comment(cell(row, "family")) +
           " seed=" + cell(row, "seed") + " lambda=" + cell(row, "lambda") +
           " msg=" + sanitize_comment(cell(row, "error")) + "\n";
      continue;
    }
    std::vector<std::string> cells;
    cells.reserve(out.columns.size());
    for (const std::string& c : out.columns) cells.push_back(cell(row, c));
    s += join(cells, ',') + "\n";
  }
  return s;
}

std::string render_json(const ScanOutput& out, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const json& r : out.rows) rows.push_back(r);
  json artifacts = json::array();
  for (const auto& a : out.artifacts)
    artifacts.push_back({{"file", a.first}, {"sha1", sha1_hex(a.second)}});
  json doc;
  doc["schema"] = "nodalot-json v1";
  doc["scan"] = out.name;
  doc["columns"] = out.columns;
  doc["rows"] = rows;
  doc["artifacts"] = artifacts;
  doc["config"] = config_to_json(cfg);
  doc["content_sha1"] = sha1_hex(rows.dump());
  return doc.dump(2) + "\n";
}

std::vector<std::string> write_output(const ScanOutput& out,
                                      const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  fs::create_directories(dir);
  std::vector<std::string> paths;
  auto emit = [&paths](const fs::path& p, const std::string& body) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
    os << body;
    os.flush();
    if (!os) throw Error("short write to " + p.string());
    paths.push_back(p.string());
  };
  const bool csv = cfg.format == "csv";
  emit(dir / (out.name + (csv ? std::string(".csv") : std::string(".json"))),
       csv ? render_csv(out) : render_json(out, cfg));
  for (const auto& a : out.artifacts) emit(dir / a.first, a.second);
  return paths;
}

// ---------------------------------------------------------------------------
// Verification suite.

bool VerifyReport::ok() const {
  for (const VerifyCheck& c : checks)
    if (c.hard && !c.passed) return false;
  return true;
}

VerifyReport verify(const ExperimentConfig& cfg) {
  VerifyReport rep;
  auto check = [&rep](const std::string& name, bool hard,
                      const std::function<std::pair<bool, std::string>()>& body) {
    VerifyCheck c;
    c.name = name;
    c.hard = hard;
    try {
      auto res = body();
      c.passed = res.first;
      c.detail = res.second;
    } catch (const std::exception& ex) {
      c.passed = false;
      c.detail = ex.what();
    }
    rep.checks.push_back(std::move(c));
  };
  auto pass_if = [](bool ok, std::string detail) {
    return std::make_pair(ok, std::move(detail));
  };

  const Manifold torus = Manifold::flat_torus(cfg.torus_size, cfg.torus_size);
  const Manifold sphere = Manifold::round_sphere(cfg.sphere_radius);
  const double lscale = cfg.torus_size / (2.0 * kPi);  // torus unit rescale

  check("grid-torus-area", true, [&] {
    auto g = build_grid(torus, cfg.resolution.min_resolution);
    double got = g->weights.sum(), want = torus.area();
    return pass_if(std::abs(got - want) <= 1e-9 * want,
                   "sum w = " + format_double(got) + ", area = " + format_double(want));
  });

  check("grid-sphere-area", true, [&] {
    auto g = build_grid(sphere, 48);
    double got = g->weights.sum(), want = sphere.area();
    return pass_if(std::abs(got - want) <= 1e-9 * want,
                   "sum w = " + format_double(got) + ", area = " + format_double(want));
  });

  check("grid-metric-symmetry", true, [&] {
    auto g = build_grid(sphere, 24);
    double worst = 0.0;
    for (int i = 0; i < g->node_count(); i += 97)
      for (int j = 0; j < g->node_count(); j += 131) {
        Point a = g->node(i), b = g->node(j);
        worst = std::max(worst, std::abs(sphere.distance(a, b) - sphere.distance(b, a)));
      }
    return pass_if(worst <= 1e-12, "max asymmetry = " + format_double(worst));
  });

  // Resolution rule: the discrete Laplacian residual certifies the sampling
  // density the config asks for.  Below ~12 nodes per wavelength this fails.
  check("eigen-residual-torus", true, [&] {
    if (cfg.family.torus_k.empty()) return pass_if(true, "no torus modes configured");
    int k = *std::max_element(cfg.family.torus_k.begin(), cfg.family.torus_k.end());
    Eigenfunction e = make_torus_mode(torus, {{k, 0, 1.0, 0.0}});
    int res = resolution_for(cfg, torus, e.eigenvalue);
    double got = residual_check(e, res);
    double bound = 0.03 * e.eigenvalue;
    return pass_if(got <= bound, "k = " + std::to_string(k) + ", n = " +
                                     std::to_string(res) + ", residual = " +
                                     format_double(got) + " vs " + format_double(bound));
  });

  check("eigen-residual-sphere", true, [&] {
    if (cfg.family.beam_l.empty()) return pass_if(true, "no beams configured");
    int l = *std::max_element(cfg.family.beam_l.begin(), cfg.family.beam_l.end());
    Eigenfunction e = make_gaussian_beam(l, cfg.sphere_radius);
    int res = resolution_for(cfg, sphere, e.eigenvalue);
    double got = residual_check(e, res);
    double bound = 0.05 * e.eigenvalue;
    return pass_if(got <= bound, "l = " + std::to_string(l) + ", rings = " +
                                     std::to_string(res) + ", residual = " +
                                     format_double(got) + " vs " + format_double(bound));
  });

  check("eigen-json-roundtrip", true, [&] {
    Eigenfunction e = random_torus_combination(25, cfg.seed);
    Eigenfunction back = eigenfunction_from_json(eigenfunction_to_json(e));
    if (back.eigenvalue != e.eigenvalue) return pass_if(false, "eigenvalue changed");
    double worst = 0.0;
    for (int i = 0; i < 7; ++i) {
      Point p(0.1 + 0.83 * i, 0.2 + 0.59 * i);
      worst = std::max(worst, std::abs(evaluate(e, p) - evaluate(back, p)));
    }
    return pass_if(worst <= 1e-14, "max value drift = " + format_double(worst));
  });

  // Nodal length of a one-frequency mode: two closed lines of length L each,
  // with zeros both on and off the lattice columns.
  for (int aligned = 0; aligned < 2; ++aligned) {
    std::string name = aligned ? "nodal-length-aligned" : "nodal-length-offset";
    check(name, true, [&, aligned] {
      double phase = aligned ? 0.0 : kPi / cfg.resolution.min_resolution;
      Eigenfunction e = make_torus_mode(torus, {{1, 0, 1.0, phase}});
      auto g = build_grid(torus, cfg.resolution.min_resolution);
      ScalarField f = sample(e, g);
      NodalGeometry ng = extract_nodal_set(f, e.eigenvalue);
      double want = 2.0 * cfg.torus_size;
      bool ok = std::abs(ng.total_length - want) <= 1e-9 * want && ng.domain_count == 2;
      return pass_if(ok, "length = " + format_double(ng.total_length) + " vs " +
                             format_double(want) + ", domains = " +
                             std::to_string(ng.domain_count));
    });
  }

  // Shared fixture: the k = 4 axis mode at configured resolution, with its
  // exact transport value and witness.
  struct Fixture {
    Eigenfunction e;
    int resolution = 0;
    ScalarField f;
    NodalGeometry ng;
    SignedMeasures sm;
    TransportResult tr;
    WitnessResult wit;
  };
  std::shared_ptr<Fixture> fx;
  check("transport-exact-vs-closed-form", true, [&] {
    auto w = std::make_shared<Fixture>();
    w->e = make_torus_mode(torus, {{4, 0, 1.0, 0.0}});
    w->resolution = resolution_for(cfg, torus, w->e.eigenvalue);
    w->f = sample(w->e, build_grid(torus, w->resolution));
    w->ng = extract_nodal_set(w->f, w->e.eigenvalue);
    w->sm = signed_measures(w->f);
    w->tr = w1_exact(w->f, w->sm);
    w->wit = lipschitz_witness(w->f, w->ng, w->sm);
    fx = w;
    double want = lscale * lscale * lscale * 8.0 * kPi / 4.0;
    double rel = std::abs(fx->tr.value - want) / want;
    return pass_if(rel <= 0.01, "w1 = " + format_double(fx->tr.value) + " vs " +
                                    format_double(want) + ", rel err = " +
                                    format_double(rel));
  });

  check("retention-zero-delta", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    RetentionReport r = retention(fx->f, fx->ng, {0.0}, cfg.p_list);
    double worst = 0.0;
    for (const RetentionRow& row : r.rows)
      worst = std::max(worst, std::abs(row.ratio_total - 1.0));
    return pass_if(worst <= 1e-12, "max |ratio_total - 1| = " + format_double(worst));
  });

  check("massconc-scalar-invariance", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    ScalarField f2 = fx->f;
    f2.values *= 2.0;
    Point c = fx->f.grid->node(fx->f.grid->node_count() / 3);
    double r = 1.5 / std::sqrt(fx->e.eigenvalue);
    double d1 = doubling_exponent(fx->f, c, r), d2 = doubling_exponent(f2, c, r);
    double l1 = lp_doubling_exponent(fx->f, c, r, 2.0),
           l2 = lp_doubling_exponent(f2, c, r, 2.0);
    double worst = std::max(std::abs(d1 - d2), std::abs(l1 - l2));
    return pass_if(worst <= 1e-12, "max shift under f -> 2f = " + format_double(worst));
  });

  check("transport-scale-covariance", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    ScalarField f2 = fx->f;
    f2.values *= 2.0;
    TransportResult tr2 = w1_exact(f2);
    double rel = std::abs(tr2.value - 2.0 * fx->tr.value) / (2.0 * fx->tr.value);
    return pass_if(rel <= 1e-9, "w1(2f)/2 vs w1(f) rel err = " + format_double(rel));
  });

  check("transport-weak-duality", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    double lb = fx->wit.lower_bound;
    bool ok = lb > 0.0 && lb <= fx->tr.value * (1.0 + 1e-9);
    std::string detail = "bound = " + format_double(lb) + " vs w1 = " +
                         format_double(fx->tr.value);
    Eigenfunction e = random_torus_combination(25, cfg.seed + 1);
    int res = resolution_for(cfg, e.manifold, e.eigenvalue);
    ScalarField f = sample(e, build_grid(e.manifold, res));
    NodalGeometry ng = extract_nodal_set(f, e.eigenvalue);
    SignedMeasures sm = signed_measures(f);
    TransportResult tr = w1_exact(f, sm);
    WitnessResult wit = lipschitz_witness(f, ng, sm);
    double lb2 = wit.lower_bound;
    ok = ok && lb2 > 0.0 && lb2 <= tr.value * (1.0 + 1e-9);
    detail += "; combo bound = " + format_double(lb2) + " vs w1 = " +
              format_double(tr.value);
    return pass_if(ok, detail);
  });

  // The witness field leaves the library normalized to edge slope 1; scaling
  // it (the _fixtures.witness_scale knob) must trip this check and only it.
  check("witness-lipschitz", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    Eigen::ArrayXd scaled = cfg.witness_scale * fx->wit.field;
    double slope = edge_lipschitz(*fx->f.grid, scaled);
    return pass_if(slope <= 1.0 + 1e-6,
                   "edge slope = " + format_double(slope) +
                       " (witness scale " + format_double(cfg.witness_scale) + ")");
  });

  check("transport-sinkhorn-consistency", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    TransportResult sk = w1_sinkhorn(fx->f, fx->sm, sinkhorn_options(cfg, cfg.seed));
    double rel = std::abs(sk.value - fx->tr.value) / fx->tr.value;
    return pass_if(rel <= 0.05, "sinkhorn = " + format_double(sk.value) +
                                    " vs exact = " + format_double(fx->tr.value) +
                                    ", rel err = " + format_double(rel));
  });

  check("transport-oracle-closed-form", true, [&] {
    double got = w1_oracle_circle([](double s) { return std::sin(4.0 * s); },
                                  2.0 * kPi, 2.0 * kPi);
    double want = 8.0 * kPi / 4.0;
    double rel = std::abs(got - want) / want;
    return pass_if(rel <= 1e-6, "oracle = " + format_double(got) + " vs " +
                                    format_double(want) + ", rel err = " +
                                    format_double(rel));
  });

  check("flow-two-atom", true, [&] {
    std::vector<FlowArc> arcs = {{0, 1, 0.3}, {1, 0, 0.3}, {1, 2, 0.4}, {2, 1, 0.4}};
    Eigen::ArrayXd supply(3);
    supply << 0.7, 0.0, -0.7;
    FlowResult fr = min_cost_flow(3, arcs, supply);
    double err1 = std::abs(fr.cost - 0.49);
    Eigen::MatrixXd cost(2, 2);
    cost << 0.3, 1.0, 0.9, 0.2;
    Eigen::ArrayXd mu(2), nu(2);
    mu << 0.4, 0.6;
    nu << 0.5, 0.5;
    double err2 = std::abs(dense_transport_cost(cost, mu, nu) - 0.31);
    return pass_if(err1 <= 1e-12 && err2 <= 1e-12,
                   "graph err = " + format_double(err1) + ", dense err = " +
                       format_double(err2));
  });

  check("growth-lift-degree1", true, [&] {
    FlatLiftField u;
    u.value = [](const Eigen::Vector3d& p) { return p.x(); };
    u.grad_sq = [](const Eigen::Vector3d&) { return 1.0; };
    LiftFrequency lf = flat_lift_frequency(u, Eigen::Vector3d(0.0, 0.4, -0.3), 0.7);
    bool ok = std::abs(lf.N - 1.0) <= 1e-2 && std::abs(lf.Ntilde - 1.0) <= 1e-2;
    return pass_if(ok, "N = " + format_double(lf.N) + ", Ntilde = " +
                           format_double(lf.Ntilde));
  });

  check("growth-lift-consistency", false, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    Point x(0.37 * cfg.torus_size, 0.61 * cfg.torus_size);
    LiftFrequency lf = lift_frequency(fx->e, x, 0.25 / std::sqrt(fx->e.eigenvalue));
    double gap = std::abs(lf.N - lf.Ntilde) / std::max(1.0, std::abs(lf.N));
    return pass_if(gap <= 0.05, "N = " + format_double(lf.N) + ", Ntilde = " +
                                    format_double(lf.Ntilde));
  });

  check("covering-invariants", true, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    Covering cov = build_covering(fx->ng, kCoveringR0);
    BallScanOptions bo;
    bo.frequency_budget = 32;
    bo.seed = cfg.seed;
    BallScan scan = scan_balls(fx->f, fx->e, cov, bo);
    GoodBallReport g = classify_good_balls(fx->f, cov, scan, 8.0);
    bool ok = cov.multiplicity >= 1 && cov.multiplicity <= 16 &&
              g.mass_fraction_good >= g.mass_bound - 1e-12;
    return pass_if(ok, "multiplicity = " + std::to_string(cov.multiplicity) +
                           ", balls = " + std::to_string(cov.balls.size()) +
                           ", good mass = " + format_double(g.mass_fraction_good) +
                           " >= bound " + format_double(g.mass_bound));
  });

  check("growth-monotonicity-quick", false, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    Point x(0.28 * cfg.torus_size, 0.53 * cfg.torus_size);
    double sl = std::sqrt(fx->e.eigenvalue);
    std::vector<double> radii;
    for (int i = 0; i < 5; ++i) radii.push_back(0.25 / sl * std::pow(1.6, i));
    MonotonicityReport mr = check_almost_monotonicity(fx->e, x, radii, 0.1);
    return pass_if(mr.violations.empty(),
                   std::to_string(mr.violations.size()) + " violations over " +
                       std::to_string(mr.values.size()) + " pairs");
  });

  check("uncertainty-product-quick", false, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    UncertaintyResult un = uncertainty_product(fx->f, fx->ng, true);
    double want = 4.0 * kPi * lscale * lscale;
    double rel = std::abs(un.product - want) / want;
    return pass_if(rel <= 0.05, "product = " + format_double(un.product) +
                                    " vs " + format_double(want));
  });

  check("scan-determinism", true, [&] {
    ExperimentConfig mini = cfg;
    mini.family.torus_k = {2};
    mini.family.beam_l.clear();
    mini.family.combo_lambda.clear();
    mini.jobs = 2;
    std::string a = render_csv(scan_w1(mini));
    std::string b = render_csv(scan_w1(mini));
    return pass_if(a == b && a.find("# error") == std::string::npos,
                   "sha1 = " + sha1_hex(a).substr(0, 12));
  });

  check("config-roundtrip", true, [&] {
    std::string a = config_to_json(cfg).dump();
    std::string b = config_to_json(parse_config(a)).dump();
    return pass_if(a == b, a == b ? "round trip stable" : "round trip drifted");
  });

  check("csv-schema-pins", true, [&] {
    bool ok =
        join(kW1Columns, ',') ==
            "family,seed,lambda,resolution,engine,w1,lower_bound,l1,atoms,marginal_err" &&
        join(kRetentionColumns, ',') ==
            "family,seed,lambda,p,delta,delta_sqrtlambda,ratio_total,ratio_pos,ratio_neg" &&
        join(kDoublingColumns, ',') ==
            "family,seed,lambda,resolution,probes,max_doubling,mean_doubling,"
            "multiplicity,d,mass_fraction_good,ball_fraction_good,mass_bound" &&
        join(kGoodBallColumns, ',') ==
            "ball_index,center,r,Np_ratio,good_doubling,N_lift,good_frequency,deep_flag" &&
        join(kUncertaintyColumns, ',') ==
            "family,seed,lambda,resolution,engine,w1,l1,nodal_length,product";
    return pass_if(ok, ok ? "all column sets pinned" : "a column set drifted");
  });

  check("density-radius-quick", false, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    DensityRadius dr = density_radius(fx->ng);
    return pass_if(dr.normalized > 0.0 && dr.normalized <= kPi,
                   "sup dist * sqrt(lambda) = " + format_double(dr.normalized));
  });

  check("asymmetry-quick", false, [&] {
    if (!fx) return pass_if(false, "fixture unavailable");
    // Ball centered on the nodal set: both signs get comparable volume.
    Point c(kPi / 4.0 * lscale * 2.0, 1.1 * lscale);
    AsymmetryResult ar =
        asymmetry_ratio(fx->f, fx->ng, c, 2.0 / std::sqrt(fx->e.eigenvalue));
    bool ok = ar.meets_nodal_set && ar.ratio >= 0.2 && ar.ratio <= 0.8;
    return pass_if(ok, "positive volume fraction = " + format_double(ar.ratio));
  });

  return rep;
}

}  // namespace nodalot
