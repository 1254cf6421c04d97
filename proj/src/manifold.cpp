#include "nodalot/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace nodalot {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_period(double v, double period) {
  double r = std::fmod(v, period);
  if (r < 0) r += period;
  // fmod can return exactly `period` after the correction when v is a tiny
  // negative number; fold that back to zero.
  if (r >= period) r -= period;
  return r;
}

// Shortest signed representative of a periodic difference, in [-p/2, p/2].
double wrap_diff(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

}  // namespace

Manifold Manifold::flat_torus(double lx, double ly) {
  if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("torus periods must be positive");
  Manifold m;
  m.kind_ = ManifoldKind::FlatTorus;
  m.lx_ = lx;
  m.ly_ = ly;
  return m;
}

Manifold Manifold::round_sphere(double radius) {
  if (!(radius > 0)) throw std::invalid_argument("sphere radius must be positive");
  Manifold m;
  m.kind_ = ManifoldKind::RoundSphere;
  m.radius_ = radius;
  return m;
}

double Manifold::area() const {
  return is_torus() ? lx_ * ly_ : 4.0 * kPi * radius_ * radius_;
}

double Manifold::diameter() const {
  if (is_torus()) return 0.5 * std::hypot(lx_, ly_);
  return kPi * radius_;
}

Point Manifold::reduce(const Point& p) const {
  if (is_torus()) return Point(wrap_period(p.x(), lx_), wrap_period(p.y(), ly_));
  double theta = p.x();
  double phi = p.y();
  // Fold theta into [0, pi]; each reflection across a pole advances phi by pi.
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0) theta += 2.0 * kPi;
  if (theta > kPi) {
    theta = 2.0 * kPi - theta;
    phi += kPi;
  }
  return Point(theta, wrap_period(phi, 2.0 * kPi));
}

double Manifold::distance(const Point& a, const Point& b) const {
  if (is_torus()) {
    const double dx = wrap_diff(a.x() - b.x(), lx_);
    const double dy = wrap_diff(a.y() - b.y(), ly_);
    return std::hypot(dx, dy);
  }
  // Central angle via atan2(|u x v|, u.v): stable for both tiny and
  // near-antipodal separations, unlike acos of the dot product.
  const Eigen::Vector3d u = embed(a) / radius_;
  const Eigen::Vector3d v = embed(b) / radius_;
  const double angle = std::atan2(u.cross(v).norm(), u.dot(v));
  return radius_ * angle;
}

Eigen::Vector3d Manifold::embed(const Point& p) const {
  if (is_torus()) return Eigen::Vector3d(p.x(), p.y(), 0.0);
  const double st = std::sin(p.x()), ct = std::cos(p.x());
  const double sp = std::sin(p.y()), cp = std::cos(p.y());
  return radius_ * Eigen::Vector3d(st * cp, st * sp, ct);
}

void sphere_frame(const Point& p, Eigen::Vector3d& e_theta, Eigen::Vector3d& e_phi) {
  const double st = std::sin(p.x()), ct = std::cos(p.x());
  const double sp = std::sin(p.y()), cp = std::cos(p.y());
  e_theta = Eigen::Vector3d(ct * cp, ct * sp, -st);
  e_phi = Eigen::Vector3d(-sp, cp, 0.0);
}

Point sphere_exp(const Manifold& m, const Point& p, double alpha, double s) {
  const double r = m.radius();
  Eigen::Vector3d e_theta, e_phi;
  sphere_frame(p, e_theta, e_phi);
  const Eigen::Vector3d x0 = m.embed(p) / r;
  const Eigen::Vector3d dir = std::cos(alpha) * e_theta + std::sin(alpha) * e_phi;
  const Eigen::Vector3d y = std::cos(s / r) * x0 + std::sin(s / r) * dir;
  const double theta = std::atan2(std::hypot(y.x(), y.y()), y.z());
  const double phi = std::atan2(y.y(), y.x());
  return m.reduce(Point(theta, phi));
}

}  // namespace nodalot
