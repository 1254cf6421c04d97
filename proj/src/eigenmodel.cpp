#include "nodalot/eigenmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "nodalot/errors.hpp"
#include "nodalot/legendre.hpp"

namespace nodalot {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct Angular {
  double wx, wy;  // angular frequencies of a torus summand
};

Angular angular(const Manifold& m, const TorusModeSummand& s) {
  return {kTwoPi * s.k / m.lx(), kTwoPi * s.l / m.ly()};
}

double pole_safe_sin_pow(double s, int p) {
  // sin(theta)^p with p >= 0; avoids pow(0, 0) pitfalls.
  if (p == 0) return 1.0;
  return std::pow(s, p);
}

bool at_pole(const Point& p) {
  return p.x() < 1e-12 || p.x() > kPi - 1e-12;
}

}  // namespace

Eigenfunction make_torus_mode(const Manifold& m, std::vector<TorusModeSummand> summands) {
  if (!m.is_torus()) throw std::invalid_argument("make_torus_mode: manifold is not a torus");
  if (summands.empty()) throw std::invalid_argument("make_torus_mode: empty summand list");
  Eigenfunction e;
  e.manifold = m;
  double lambda = -1.0;
  for (const auto& s : summands) {
    const Angular a = angular(m, s);
    const double l = a.wx * a.wx + a.wy * a.wy;
    if (l <= 0) throw std::invalid_argument("make_torus_mode: zero-frequency summand");
    if (lambda < 0) lambda = l;
    else if (std::abs(l - lambda) > 1e-9 * lambda)
      throw MixedEigenvalue("make_torus_mode: summands span different eigenvalues");
  }
  e.eigenvalue = lambda;
  e.family = TorusMode{std::move(summands)};
  return e;
}

Eigenfunction make_torus_mode(std::vector<TorusModeSummand> summands) {
  return make_torus_mode(Manifold::flat_torus(kTwoPi, kTwoPi), std::move(summands));
}

Eigenfunction make_gaussian_beam(int degree, double radius) {
  if (degree < 1) throw std::invalid_argument("make_gaussian_beam: degree must be >= 1");
  Eigenfunction e;
  e.manifold = Manifold::round_sphere(radius);
  e.eigenvalue = static_cast<double>(degree) * (degree + 1) / (radius * radius);
  e.family = GaussianBeam{degree};
  return e;
}

Eigenfunction make_sphere_harmonic(int degree, int order, double amplitude, double radius) {
  if (degree < 1 || std::abs(order) > degree)
    throw std::invalid_argument("make_sphere_harmonic: need degree >= 1 and |order| <= degree");
  Eigenfunction e;
  e.manifold = Manifold::round_sphere(radius);
  e.eigenvalue = static_cast<double>(degree) * (degree + 1) / (radius * radius);
  e.family = SphereHarmonic{degree, order, amplitude};
  return e;
}

Eigenfunction random_torus_combination(int lambda, std::uint64_t seed, int max_summands) {
  if (lambda < 1) throw std::invalid_argument("random_torus_combination: lambda must be >= 1");
  // Canonical half of the integer representations a^2 + b^2 = lambda:
  // a >= 1 with b free, plus (0, b) with b >= 1.  sin with a free phase spans
  // the same space as the +/- frequency pair.
  std::vector<std::pair<int, int>> reps;
  const int root = static_cast<int>(std::floor(std::sqrt(static_cast<double>(lambda))));
  for (int a = 0; a <= root; ++a) {
    const int rem = lambda - a * a;
    const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rem))));
    if (b * b != rem) continue;
    if (a == 0) {
      if (b >= 1) reps.emplace_back(0, b);
    } else {
      reps.emplace_back(a, b);
      if (b != 0) reps.emplace_back(a, -b);
    }
  }
  if (reps.empty())
    throw std::invalid_argument("random_torus_combination: lambda is not a sum of two squares");

  std::mt19937_64 rng(seed);
  std::shuffle(reps.begin(), reps.end(), rng);
  if (static_cast<int>(reps.size()) > max_summands) reps.resize(max_summands);

  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::bernoulli_distribution flip(0.5);
  std::vector<TorusModeSummand> summands;
  summands.reserve(reps.size());
  for (const auto& [a, b] : reps) {
    TorusModeSummand s;
    s.k = a;
    s.l = b;
    s.amplitude = amp(rng) * (flip(rng) ? -1.0 : 1.0);
    s.phase = phase(rng);
    summands.push_back(s);
  }
  Eigenfunction e = make_torus_mode(std::move(summands));
  e.seed = seed;
  return e;
}

double evaluate(const Eigenfunction& e, const Point& raw) {
  const Point p = e.manifold.reduce(raw);
  if (const auto* tm = std::get_if<TorusMode>(&e.family)) {
    double v = 0.0;
    for (const auto& s : tm->summands) {
      const Angular a = angular(e.manifold, s);
      v += s.amplitude * std::sin(a.wx * p.x() + a.wy * p.y() + s.phase);
    }
    return v;
  }
  if (const auto* gb = std::get_if<GaussianBeam>(&e.family)) {
    return pole_safe_sin_pow(std::sin(p.x()), gb->degree) * std::cos(gb->degree * p.y());
  }
  const auto& sh = std::get<SphereHarmonic>(e.family);
  const int m = std::abs(sh.order);
  const double plm = normalized_legendre(sh.degree, m, p.x());
  const double azim = (sh.order == 0)   ? 1.0
                      : (sh.order > 0)  ? std::sqrt(2.0) * std::cos(m * p.y())
                                        : std::sqrt(2.0) * std::sin(m * p.y());
  return sh.amplitude * plm * azim;
}

Eigen::Vector2d gradient(const Eigenfunction& e, const Point& raw) {
  const Point p = e.manifold.reduce(raw);
  if (const auto* tm = std::get_if<TorusMode>(&e.family)) {
    Eigen::Vector2d g(0.0, 0.0);
    for (const auto& s : tm->summands) {
      const Angular a = angular(e.manifold, s);
      const double c = s.amplitude * std::cos(a.wx * p.x() + a.wy * p.y() + s.phase);
      g.x() += c * a.wx;
      g.y() += c * a.wy;
    }
    return g;
  }
  if (const auto* gb = std::get_if<GaussianBeam>(&e.family)) {
    const int l = gb->degree;
    if (at_pole(p)) {
      if (l == 1) throw PoleGradient("gradient: degree-1 beam has no pole limit");
      return Eigen::Vector2d(0.0, 0.0);
    }
    const double st = std::sin(p.x()), ct = std::cos(p.x());
    const double base = l * pole_safe_sin_pow(st, l - 1);
    return Eigen::Vector2d(base * ct * std::cos(l * p.y()), -base * std::sin(l * p.y())) /
           e.manifold.radius();
  }
  const auto& sh = std::get<SphereHarmonic>(e.family);
  const int m = std::abs(sh.order);
  if (at_pole(p)) {
    if (m == 1) throw PoleGradient("gradient: order-1 harmonic has no pole limit");
    return Eigen::Vector2d(0.0, 0.0);  // continuous extension for m == 0 and m >= 2
  }
  const double plm = normalized_legendre(sh.degree, m, p.x());
  const double dplm = normalized_legendre_dtheta(sh.degree, m, p.x());
  const double root2 = std::sqrt(2.0);
  double azim, dazim;  // azimuthal factor and its phi-derivative
  if (sh.order == 0) {
    azim = 1.0;
    dazim = 0.0;
  } else if (sh.order > 0) {
    azim = root2 * std::cos(m * p.y());
    dazim = -root2 * m * std::sin(m * p.y());
  } else {
    azim = root2 * std::sin(m * p.y());
    dazim = root2 * m * std::cos(m * p.y());
  }
  const double st = std::sin(p.x());
  return sh.amplitude *
         Eigen::Vector2d(dplm * azim, plm * dazim / st) / e.manifold.radius();
}

ScalarField sample(const Eigenfunction& e, std::shared_ptr<const SampleGrid> grid) {
  ScalarField f;
  f.grid = std::move(grid);
  const int n = f.grid->node_count();
  f.values.resize(n);
  for (int v = 0; v < n; ++v) f.values[v] = evaluate(e, f.grid->node(v));
  return f;
}

double residual_check(const Eigenfunction& e, int resolution) {
  const auto grid = build_grid(e.manifold, resolution);
  const ScalarField f = sample(e, grid);
  const SampleGrid& g = *grid;
  const double lambda = e.eigenvalue;
  double worst = 0.0;

  if (e.manifold.is_torus()) {
    const double ihx2 = 1.0 / (g.step_j * g.step_j), ihy2 = 1.0 / (g.step_i * g.step_i);
    for (int i = 0; i < g.ni; ++i) {
      const int iu = (i + 1) % g.ni, id_ = (i + g.ni - 1) % g.ni;
      for (int j = 0; j < g.nj; ++j) {
        const int jr = (j + 1) % g.nj, jl = (j + g.nj - 1) % g.nj;
        const double c = f.values[g.index(i, j)];
        const double lap = (f.values[g.index(i, jr)] - 2 * c + f.values[g.index(i, jl)]) * ihx2 +
                           (f.values[g.index(iu, j)] - 2 * c + f.values[g.index(id_, j)]) * ihy2;
        worst = std::max(worst, std::abs(lap + lambda * c));
      }
    }
    return worst;
  }

  const double r2 = e.manifold.radius() * e.manifold.radius();
  const double dtheta = kPi / g.ni, dphi = kTwoPi / g.nj;
  for (int i = 1; i + 1 < g.ni; ++i) {
    const double theta = (i + 0.5) * dtheta;
    const double st = std::sin(theta);
    const double sp = std::sin(theta + 0.5 * dtheta), sm = std::sin(theta - 0.5 * dtheta);
    for (int j = 0; j < g.nj; ++j) {
      const int jr = (j + 1) % g.nj, jl = (j + g.nj - 1) % g.nj;
      const double c = f.values[g.index(i, j)];
      const double dth = (sp * (f.values[g.index(i + 1, j)] - c) - sm * (c - f.values[g.index(i - 1, j)])) /
                         (st * dtheta * dtheta);
      const double dph = (f.values[g.index(i, jr)] - 2 * c + f.values[g.index(i, jl)]) / (st * st * dphi * dphi);
      worst = std::max(worst, std::abs((dth + dph) / r2 + lambda * c));
    }
  }
  return worst;
}

std::string eigenfunction_to_json(const Eigenfunction& e) {
  nlohmann::json j;
  if (e.manifold.is_torus())
    j["manifold"] = {{"kind", "flat_torus"}, {"lx", e.manifold.lx()}, {"ly", e.manifold.ly()}};
  else
    j["manifold"] = {{"kind", "round_sphere"}, {"radius", e.manifold.radius()}};

  if (const auto* tm = std::get_if<TorusMode>(&e.family)) {
    j["family"] = "torus_mode";
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& s : tm->summands)
      modes.push_back({{"k", s.k}, {"l", s.l}, {"amplitude", s.amplitude}, {"phase", s.phase}});
    j["params"] = {{"modes", modes}};
  } else if (const auto* gb = std::get_if<GaussianBeam>(&e.family)) {
    j["family"] = "gaussian_beam";
    j["params"] = {{"degree", gb->degree}};
  } else {
    const auto& sh = std::get<SphereHarmonic>(e.family);
    j["family"] = "sphere_harmonic";
    j["params"] = {{"degree", sh.degree}, {"order", sh.order}, {"amplitude", sh.amplitude}};
  }
  j["seed"] = e.seed;
  return j.dump(2);
}

Eigenfunction eigenfunction_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const auto& jm = j.at("manifold");
  const std::string family = j.at("family").get<std::string>();
  const auto& params = j.at("params");

  Eigenfunction e;
  if (family == "torus_mode") {
    const Manifold m = Manifold::flat_torus(jm.at("lx").get<double>(), jm.at("ly").get<double>());
    std::vector<TorusModeSummand> summands;
    for (const auto& js : params.at("modes"))
      summands.push_back({js.at("k").get<int>(), js.at("l").get<int>(),
                          js.at("amplitude").get<double>(), js.at("phase").get<double>()});
    e = make_torus_mode(m, std::move(summands));
  } else if (family == "gaussian_beam") {
    e = make_gaussian_beam(params.at("degree").get<int>(), jm.at("radius").get<double>());
  } else if (family == "sphere_harmonic") {
    e = make_sphere_harmonic(params.at("degree").get<int>(), params.at("order").get<int>(),
                             params.at("amplitude").get<double>(), jm.at("radius").get<double>());
  } else {
    throw ConfigInvalid("family", "unknown eigenfunction family '" + family + "'");
  }
  e.seed = j.value("seed", std::uint64_t{0});
  return e;
}

}  // namespace nodalot
