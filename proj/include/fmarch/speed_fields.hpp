#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fmarch/vec.hpp"

namespace fmarch {

/// Initial front sampling: points on the zero level set at t = 0 with unit
/// spacetime normals, grouped into closed polyline components.
struct FrontSample {
  struct Component {
    int first = 0;
    int count = 0;
  };
  std::vector<Vec3> points;   // (x, y, 0)
  std::vector<Vec3> normals;  // unit spacetime normals
  std::vector<Component> components;
};

/// A propagation example: speed evaluator plus, for the test problems, the
/// exact level-set solution, its normals and front samplers.
class SpeedField {
 public:
  virtual ~SpeedField() = default;

  virtual std::string_view name() const = 0;
  virtual double speed(double x, double y, double t) const = 0;
  virtual double phi(double x, double y, double t) const = 0;
  /// Whether phi is a signed distance function (all examples but the rose).
  virtual bool signed_distance() const { return true; }
  /// Latest time the exact solution formula is valid for.
  virtual double max_valid_time() const { return std::numeric_limits<double>::infinity(); }
  virtual double initial_radius() const = 0;
  virtual double default_final_time() const = 0;
  virtual double default_report_time() const = 0;

  /// Unit outward spacetime normal at a point of the manifold.
  virtual Vec3 normal(double x, double y, double t) const = 0;

  /// m equally spaced points per connected component of the initial front.
  virtual FrontSample initial_front(int m) const = 0;

  /// Dense parametric sampling of the exact front at time t.
  virtual std::vector<Vec2> exact_front(double t, int samples) const = 0;

  double speed_at(const Vec3& p) const { return speed(p.x, p.y, p.z); }
  double phi_at(const Vec3& p) const { return phi(p.x, p.y, p.z); }

 protected:
  void require_valid_time(double t) const {
    if (t > max_valid_time() + 1e-12)
      throw std::domain_error(std::string(name()) +
                              ": exact solution queried outside its validity window");
  }

  /// nu = (n_spatial, -F)/sqrt(1+F^2) for a spatial unit normal n.
  Vec3 lift_normal(double nx, double ny, double f) const {
    const double den = std::sqrt(1.0 + f * f);
    return {nx / den, ny / den, -f / den};
  }

  static FrontSample circle_sample(const SpeedField& field, double cx, double cy,
                                   double r, int m, FrontSample base = {}) {
    if (m < 3) throw std::invalid_argument("initial_front: need at least 3 samples");
    FrontSample out = std::move(base);
    FrontSample::Component comp{static_cast<int>(out.points.size()), m};
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * M_PI * k / m;
      const double x = cx + r * std::cos(th);
      const double y = cy + r * std::sin(th);
      out.points.push_back({x, y, 0.0});
      out.normals.push_back(field.normal(x, y, 0.0));
    }
    out.components.push_back(comp);
    return out;
  }

  static std::vector<Vec2> circle_contour(double cx, double cy, double r,
                                          int samples) {
    std::vector<Vec2> out;
    out.reserve(samples);
    for (int k = 0; k < samples; ++k) {
      const double th = 2.0 * M_PI * k / samples;
      out.push_back({cx + r * std::cos(th), cy + r * std::sin(th)});
    }
    return out;
  }
};

/// (a) Expanding circle: F = 1, phi = sqrt(x^2+y^2) - t - r0.
class ExpandingCircleField final : public SpeedField {
 public:
  std::string_view name() const override { return "expanding"; }
  double speed(double, double, double) const override { return 1.0; }
  double phi(double x, double y, double t) const override {
    return std::hypot(x, y) - t - r0_;
  }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 0.5; }
  double default_report_time() const override { return 0.35; }
  Vec3 normal(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    return lift_normal(x / r, y / r, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    return circle_sample(*this, 0.0, 0.0, r0_, m);
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    return circle_contour(0.0, 0.0, r0_ + t, samples);
  }

 private:
  double r0_ = 0.25;
};

/// (b) Football: F(t) = 1 - e^{10t-1}; the circle expands then contracts to
/// a point, tracing a football-shaped manifold.
class FootballField final : public SpeedField {
 public:
  std::string_view name() const override { return "football"; }
  double speed(double, double, double t) const override {
    return 1.0 - std::exp(10.0 * t - 1.0);
  }
  double radius(double t) const {
    return r0_ + t - (std::exp(10.0 * t) - 1.0) / (10.0 * std::exp(1.0));
  }
  double phi(double x, double y, double t) const override {
    return std::hypot(x, y) - radius(t);
  }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 0.5; }  // stops earlier on its own
  double default_report_time() const override { return 0.1; }
  Vec3 normal(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    return lift_normal(x / r, y / r, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    return circle_sample(*this, 0.0, 0.0, r0_, m);
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    const double r = radius(t);
    if (r <= 0.0)
      throw std::domain_error("football: front is empty at this time");
    return circle_contour(0.0, 0.0, r, samples);
  }

 private:
  double r0_ = 0.25;
};

/// (c) Two circles: F(t) = 1 - 2t with two initial circles that merge; the
/// exact solution is valid up to T = 0.5.
class TwoCirclesField final : public SpeedField {
 public:
  std::string_view name() const override { return "two-circles"; }
  double speed(double, double, double t) const override { return 1.0 - 2.0 * t; }
  double radius(double t) const { return r0_ + t - t * t; }
  double phi(double x, double y, double t) const override {
    require_valid_time(t);
    const double s = (x > 0.0) ? 1.0 : ((x < 0.0) ? -1.0 : 0.0);
    return std::hypot(x - s * 0.5, y) - radius(t);
  }
  double max_valid_time() const override { return 0.5; }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 0.5; }
  double default_report_time() const override { return 0.45; }
  Vec3 normal(double x, double y, double t) const override {
    const double s = (x > 0.0) ? 1.0 : ((x < 0.0) ? -1.0 : 0.0);
    const double d = std::hypot(x - s * 0.5, y);
    return lift_normal((x - s * 0.5) / d, y / d, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    FrontSample s = circle_sample(*this, -0.5, 0.0, r0_, m);
    return circle_sample(*this, 0.5, 0.0, r0_, m, std::move(s));
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    require_valid_time(t);
    const double r = radius(t);
    std::vector<Vec2> out;
    if (r < 0.5) {
      auto right = circle_contour(0.5, 0.0, r, samples / 2);
      auto left = circle_contour(-0.5, 0.0, r, samples / 2);
      out.insert(out.end(), left.begin(), left.end());
      out.insert(out.end(), right.begin(), right.end());
      return out;
    }
    // Merged: keep the arcs of each circle on its own side of the y-axis.
    const double th_max = std::acos(std::clamp(-0.5 / r, -1.0, 1.0));
    const int k = samples / 2;
    for (int i = 0; i < k; ++i) {
      const double th = -th_max + 2.0 * th_max * (i + 0.5) / k;
      out.push_back({0.5 + r * std::cos(th), r * std::sin(th)});
    }
    for (int i = 0; i < k; ++i) {
      const double th = -th_max + 2.0 * th_max * (i + 0.5) / k;
      out.push_back({-0.5 - r * std::cos(th), r * std::sin(th)});
    }
    return out;
  }

 private:
  double r0_ = 0.35;
};

/// (d) Oscillating circle: F(t) = a sin(b(t+c)).
class OscillatingCircleField final : public SpeedField {
 public:
  std::string_view name() const override { return "oscillating"; }
  double speed(double, double, double t) const override {
    return a_ * std::sin(b_ * (t + c_));
  }
  double radius(double t) const {
    return r0_ + (a_ / b_) * (std::cos(b_ * c_) - std::cos(b_ * (t + c_)));
  }
  double phi(double x, double y, double t) const override {
    return std::hypot(x, y) - radius(t);
  }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 1.5 * 2.0 * M_PI / b_; }
  double default_report_time() const override { return 0.45; }
  Vec3 normal(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    return lift_normal(x / r, y / r, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    return circle_sample(*this, 0.0, 0.0, r0_, m);
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    return circle_contour(0.0, 0.0, radius(t), samples);
  }

 private:
  double a_ = 0.7, b_ = 10.0, c_ = 0.3, r0_ = 0.25;
};

/// (e) Escaping circle: grows at rate c while the center g(t)*t runs off in
/// the positive x direction.
class EscapingCircleField final : public SpeedField {
 public:
  std::string_view name() const override { return "escaping"; }
  double g(double t) const { return std::atan(b_ * (t - 0.5)) + M_PI / 2.0; }
  double g_prime(double t) const {
    const double u = b_ * (t - 0.5);
    return b_ / (1.0 + u * u);
  }
  double center(double t) const { return g(t) * t; }
  double speed(double x, double y, double t) const override {
    const double dx = x - center(t);
    const double d = std::hypot(dx, y);
    if (d == 0.0) throw std::domain_error("escaping: speed undefined at the center");
    return dx * (g_prime(t) * t + g(t)) / d + c_;
  }
  double phi(double x, double y, double t) const override {
    return std::hypot(x - center(t), y) - (r0_ + c_ * t);
  }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 0.4; }
  double default_report_time() const override { return 0.35; }
  Vec3 normal(double x, double y, double t) const override {
    const double dx = x - center(t);
    const double d = std::hypot(dx, y);
    return lift_normal(dx / d, y / d, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    return circle_sample(*this, 0.0, 0.0, r0_, m);  // g(0)*0 = 0
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    return circle_contour(center(t), 0.0, r0_ + c_ * t, samples);
  }

 private:
  double b_ = 10.0, c_ = 0.5, r0_ = 0.25;
};

/// (f) Three-leaved rose: F depends on the polar angle; phi solves the LSE
/// but is not a signed distance function.
class RoseField final : public SpeedField {
 public:
  std::string_view name() const override { return "rose"; }
  double speed(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    if (r == 0.0) throw std::domain_error("rose: speed undefined at the origin");
    const double th = std::atan2(y, x);
    const double s = std::sin(l_ * th);
    return std::cos(l_ * th) / std::sqrt(1.0 + (l_ * t / r) * (l_ * t / r) * s * s);
  }
  double phi(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    const double th = std::atan2(y, x);
    return r - (t * std::cos(l_ * th) + r0_);
  }
  bool signed_distance() const override { return false; }
  double initial_radius() const override { return r0_; }
  double default_final_time() const override { return 0.19; }
  double default_report_time() const override { return 0.15; }
  Vec3 normal(double x, double y, double t) const override {
    const double r = std::hypot(x, y);
    const double th = std::atan2(y, x);
    // grad phi = r_hat + (l t sin(l theta)/r) theta_hat
    const double a = l_ * t * std::sin(l_ * th) / r;
    const double ct = std::cos(th), st = std::sin(th);
    Vec2 grad{ct - a * st, st + a * ct};
    const double gn = grad.norm();
    return lift_normal(grad.x / gn, grad.y / gn, speed(x, y, t));
  }
  FrontSample initial_front(int m) const override {
    return circle_sample(*this, 0.0, 0.0, r0_, m);
  }
  std::vector<Vec2> exact_front(double t, int samples) const override {
    std::vector<Vec2> out;
    out.reserve(samples);
    for (int k = 0; k < samples; ++k) {
      const double th = 2.0 * M_PI * k / samples;
      const double r = r0_ + t * std::cos(l_ * th);
      out.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return out;
  }

 private:
  double l_ = 3.0, r0_ = 0.25;
};

inline const std::vector<std::string_view>& field_names() {
  static const std::vector<std::string_view> names{
      "expanding", "football", "two-circles", "oscillating", "escaping", "rose"};
  return names;
}

inline std::unique_ptr<SpeedField> make_field(std::string_view name) {
  if (name == "expanding") return std::make_unique<ExpandingCircleField>();
  if (name == "football") return std::make_unique<FootballField>();
  if (name == "two-circles") return std::make_unique<TwoCirclesField>();
  if (name == "oscillating") return std::make_unique<OscillatingCircleField>();
  if (name == "escaping") return std::make_unique<EscapingCircleField>();
  if (name == "rose") return std::make_unique<RoseField>();
  throw std::invalid_argument("unknown example: " + std::string(name));
}

}  // namespace fmarch
