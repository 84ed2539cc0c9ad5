#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hajlasz {

/// Points live in R^dim with dim <= 3; unused trailing coordinates stay zero.
using Point = std::array<double, 3>;
using Index = std::array<std::ptrdiff_t, 3>;

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an operation's inputs violate its documented preconditions.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two fields (or a field and a weight) were sampled on different grids.
class domain_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default:
      return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
  }
}

inline double distance_squared(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const Point& a, const Point& b, int dim) {
  return std::sqrt(distance_squared(a, b, dim));
}

inline double norm(const Point& a, int dim) {
  return std::sqrt(distance_squared(a, Point{}, dim));
}

/// Open ball B(center, radius).
struct Ball {
  Point center{};
  double radius = 1.0;

  Ball() = default;
  Ball(Point c, double r) : center(c), radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw precondition_error("ball radius must be positive and finite, got " + std::to_string(r));
    }
  }
};

}  // namespace hajlasz
