#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hajlasz/grid.hpp"
#include "hajlasz/maximal.hpp"
#include "hajlasz/verification.hpp"

namespace hajlasz {

namespace detail {

struct GaussLegendre {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.nodes[i] = x;
    gl.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

template <class F>
double integrate_gl(F&& f, double a, double b) {
  static const GaussLegendre gl = gauss_legendre(32);
  const double m = 0.5 * (a + b), s = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) acc += gl.weights[i] * f(m + s * gl.nodes[i]);
  return s * acc;
}

// Integral of |z|^{1-n} over the box [0,e_1] x .. x [0,e_n], all e_i >= 0.
inline double corner_box_kernel_integral(const std::array<double, 3>& e, int n) {
  for (int a = 0; a < n; ++a) {
    if (e[a] == 0.0) return 0.0;
  }
  if (n == 1) return e[0];
  if (n == 2) return e[0] * std::asinh(e[1] / e[0]) + e[1] * std::asinh(e[0] / e[1]);
  // 3D: integrate z exactly, then polar coordinates over the base rectangle.
  const double a = e[0], b = e[1], c = e[2];
  auto radial = [c](double R) { return R * std::atan(c / R) + 0.5 * c * std::log1p(R * R / (c * c)); };
  const double theta0 = std::atan2(b, a);
  return integrate_gl([&](double t) { return radial(a / std::cos(t)); }, 0.0, theta0) +
         integrate_gl([&](double t) { return radial(b / std::sin(t)); }, theta0, std::numbers::pi / 2.0);
}

// Integral of |x - y|^{1-n} over y in the box [lo, hi], by inclusion-exclusion of corner boxes.
inline double box_kernel_integral(const Point& x, const Point& lo, const Point& hi, int n) {
  double total = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::array<double, 3> e{};
    double sign = 1.0;
    for (int a = 0; a < n; ++a) {
      const bool upper = corner & (1 << a);
      const double t = (upper ? hi[a] : lo[a]) - x[a];
      if (!upper) sign = -sign;
      if (t < 0.0) sign = -sign;
      e[a] = std::abs(t);
    }
    total += sign * corner_box_kernel_integral(e, n);
  }
  return total;
}

}  // namespace detail

/// Integral of g(y) |x-y|^{1-n} over B. Cells within one cell of x are integrated exactly
/// against the kernel; all others use the midpoint rule.
inline double riesz_potential(const GridFunction& g, const Point& x, const Ball& b) {
  const BoxDomain& d = g.domain();
  const int n = d.dim();
  if (!(distance(x, b.center, n) < b.radius)) throw precondition_error("riesz_potential: x lies outside the ball");
  std::array<std::ptrdiff_t, 3> home{};
  for (int a = 0; a < n; ++a) {
    home[a] = static_cast<std::ptrdiff_t>(std::floor((x[a] - d.lower(a)) / d.spacing(a)));
  }
  const double vol = d.cell_volume();
  const auto v = g.values();
  double total = 0.0;
  for_each_cell_in_ball(d, b.center, b.radius, [&](std::size_t i, double) {
    if (v[i] == 0.0) return;
    const Index idx = d.multi_index(i);
    bool near = true;
    for (int a = 0; a < n; ++a) near = near && std::abs(idx[a] - home[a]) <= 1;
    const Point y = d.center(idx);
    if (near) {
      Point lo{}, hi{};
      for (int a = 0; a < n; ++a) {
        lo[a] = y[a] - 0.5 * d.spacing(a);
        hi[a] = y[a] + 0.5 * d.spacing(a);
      }
      total += v[i] * detail::box_kernel_integral(x, lo, hi, n);
    } else {
      total += v[i] * vol * std::pow(distance(x, y, n), 1.0 - n);
    }
  });
  return total;
}

/// Largest ball centered at the domain midpoint inside the closed box.
inline Ball inscribed_ball(const BoxDomain& d) {
  Point c{};
  double r = kInf;
  for (int a = 0; a < d.dim(); ++a) {
    c[a] = 0.5 * (d.lower(a) + d.upper(a));
    r = std::min(r, 0.5 * (d.upper(a) - d.lower(a)));
  }
  return Ball(c, r);
}

struct PoincareEstimate {
  double constant = 0.0;  ///< max |f(x) - f_B| / riesz_potential(|grad f|, x, B)
  double mean = 0.0;      ///< f_B
  Point argmax{};
  std::size_t samples = 0;
  std::size_t skipped = 0;  ///< 0/0 samples
};

/// Empirical constant of the pointwise Poincare estimate on B, over up to sample_count cells of B.
inline PoincareEstimate poincare_pointwise_check(const GridFunction& f, const Ball& b, std::size_t sample_count) {
  const BoxDomain& d = f.domain();
  const int n = d.dim();
  for (int a = 0; a < n; ++a) {
    if (b.center[a] - b.radius < d.lower(a) - 1e-12 || b.center[a] + b.radius > d.upper(a) + 1e-12) {
      throw precondition_error("poincare_pointwise_check: ball is not inside the domain");
    }
  }
  if (sample_count == 0) throw precondition_error("poincare_pointwise_check: sample_count must be positive");
  const GridFunction grad = gradient_magnitude(f);
  PoincareEstimate est;
  const auto avg = integral_average(f, b, AverageNormalization::covered_cells);
  if (avg.degenerate) throw precondition_error("poincare_pointwise_check: ball contains no cell center");
  est.mean = avg.value;
  std::vector<std::size_t> cells;
  for_each_cell_in_ball(d, b.center, b.radius, [&](std::size_t i, double) { cells.push_back(i); });
  std::vector<std::size_t> picked;
  if (sample_count >= cells.size()) {
    picked = cells;
  } else {
    for (std::size_t k = 0; k < sample_count; ++k) picked.push_back(cells[k * cells.size() / sample_count]);
  }
  std::vector<double> ratio(picked.size(), -1.0);
  const auto total = static_cast<std::ptrdiff_t>(picked.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const std::size_t i = picked[static_cast<std::size_t>(k)];
    const double num = std::abs(f[i] - est.mean);
    const double den = riesz_potential(grad, d.center(i), b);
    if (den > 0.0) {
      ratio[static_cast<std::size_t>(k)] = num / den;
    } else if (num == 0.0) {
      ratio[static_cast<std::size_t>(k)] = -1.0;
    } else {
      ratio[static_cast<std::size_t>(k)] = kInf;
    }
  }
  for (std::size_t k = 0; k < picked.size(); ++k) {
    if (ratio[k] < 0.0) {
      ++est.skipped;
      continue;
    }
    ++est.samples;
    if (ratio[k] > est.constant) {
      est.constant = ratio[k];
      est.argmax = d.center(picked[k]);
    }
  }
  return est;
}

/// Checks riesz_potential(|grad f|, x, B(x,t)) <= (1 + slack) 2^n omega_n t M_t(|grad f|)(x),
/// with the gradient magnitude supplied directly.
inline VerificationReport hedberg_check_field(const GridFunction& grad_magnitude, const Point& x, double t,
                                              double slack = 0.05, const MaximalConfig& base = {}) {
  const BoxDomain& d = grad_magnitude.domain();
  const int n = d.dim();
  MaximalConfig cfg = base;
  cfg.truncation = t;
  const double lhs = riesz_potential(grad_magnitude, x, Ball(x, t));
  const double m = maximal_at(grad_magnitude, x, cfg);
  const double rhs = std::pow(2.0, n) * unit_ball_volume(n) * t * m;
  VerificationReport r;
  r.check = "hedberg";
  r.constants = {{"lhs", lhs}, {"rhs", rhs}, {"maximal", m}, {"t", t}, {"slack", slack}};
  if (rhs > 0.0) {
    r.record_ratio(lhs / rhs);
    r.constants["ratio"] = lhs / rhs;
  } else if (lhs > 0.0) {
    r.record_ratio(kInf);
  }
  if (!(lhs <= (1.0 + slack) * rhs)) r.fail("Riesz potential exceeds the maximal-function bound");
  return r;
}

inline VerificationReport hedberg_check(const GridFunction& f, const Point& x, double t, double slack = 0.05,
                                        const MaximalConfig& base = {}) {
  return hedberg_check_field(gradient_magnitude(f), x, t, slack, base);
}

/// c * M(|grad f|).
inline GridFunction hajlasz_gradient(const GridFunction& f, double c, const MaximalConfig& cfg = {}) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw precondition_error("hajlasz_gradient: c must be finite and >= 0");
  return maximal_field(gradient_magnitude(f), cfg).scaled(c);
}

/// The constant 3 C 2^{n-1} omega_n for a pointwise Poincare constant C.
inline double hajlasz_constant(double poincare_constant, int n) {
  return 3.0 * poincare_constant * std::pow(2.0, n - 1) * unit_ball_volume(n);
}

struct PairSampleOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 12345;
  bool nearest_neighbors = true;
  bool symmetric = false;  ///< require B(y,3|x-y|) inside the domain as well
  std::size_t max_attempts_per_pair = 1000;
};

/// Pairs of cell centers, given as flat cell indices.
struct PairSample {
  BoxDomain domain;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<char> admissible;
  std::vector<char> neighbor;  ///< pair belongs to the nearest-neighbour stratum
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::string strategy;
  bool symmetric = false;

  std::size_t admissible_count() const {
    return static_cast<std::size_t>(std::count(admissible.begin(), admissible.end(), char{1}));
  }
};

/// B(x, 3|x-y|) inside the open box (and B(y, 3|x-y|) too when symmetric).
inline bool admissible_pair(const BoxDomain& d, const Point& x, const Point& y, bool symmetric = false) {
  const double r = 3.0 * distance(x, y, d.dim());
  if (r == 0.0) return false;
  if (!(r <= d.distance_to_boundary(x))) return false;
  return !symmetric || r <= d.distance_to_boundary(y);
}

inline PairSample make_pair_sample(const BoxDomain& d, const PairSampleOptions& opt = {}) {
  PairSample s{d, {}, {}, {}, opt.seed, opt.count, "uniform-admissible", opt.symmetric};
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> cell(0, d.size() - 1);
  const std::size_t budget = opt.count * opt.max_attempts_per_pair;
  for (std::size_t attempt = 0; attempt < budget && s.pairs.size() < opt.count; ++attempt) {
    const std::size_t i = cell(rng), j = cell(rng);
    if (i == j) continue;
    if (!admissible_pair(d, d.center(i), d.center(j), opt.symmetric)) continue;
    s.pairs.emplace_back(i, j);
  }
  s.admissible.assign(s.pairs.size(), 1);
  s.neighbor.assign(s.pairs.size(), 0);
  if (opt.nearest_neighbors) {
    s.strategy += "+nearest-neighbor";
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Index idx = d.multi_index(i);
      for (int a = 0; a < d.dim(); ++a) {
        for (int step : {-1, 1}) {
          Index jdx = idx;
          jdx[a] += step;
          if (!d.in_range(jdx)) continue;
          const std::size_t j = d.flat_index(jdx);
          if (!admissible_pair(d, d.center(i), d.center(j), opt.symmetric)) continue;
          s.pairs.emplace_back(i, j);
          s.admissible.push_back(1);
          s.neighbor.push_back(1);
        }
      }
    }
  }
  return s;
}

/// A fixed list of pairs; admissibility is evaluated here.
inline PairSample pair_sample_from(const BoxDomain& d, std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                   bool symmetric = false) {
  PairSample s{d, std::move(pairs), {}, {}, 0, 0, "explicit", symmetric};
  s.count = s.pairs.size();
  for (const auto& [i, j] : s.pairs) {
    if (i == j) throw precondition_error("pair sample contains a pair with x = y");
    if (i >= d.size() || j >= d.size()) throw precondition_error("pair index out of range");
    s.admissible.push_back(admissible_pair(d, d.center(i), d.center(j), symmetric) ? 1 : 0);
    s.neighbor.push_back(distance(d.center(i), d.center(j), d.dim()) <= 1.5 * d.min_spacing() ? 1 : 0);
  }
  return s;
}

struct PairViolation {
  std::size_t x = 0;
  std::size_t y = 0;
  double ratio = 0.0;
};

struct HajlaszReport {
  double minimal_constant = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_admissible = 0;
  Point worst_x{};
  Point worst_y{};
  double threshold = 1.0;
  std::vector<PairViolation> violations;  ///< first max_violations offending pairs, in sample order
  std::size_t violation_count = 0;
  double neighbor_max = 0.0;  ///< largest ratio over pairs at distance h
  double far_max = 0.0;       ///< largest ratio over pairs at distance >= 8h
  bool blow_up = false;       ///< neighbour ratios dominate far ratios (no bounded gradient in sight)
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::string strategy;
};

/// Ratio |f(x)-f(y)| / (|x-y|(g(x)+g(y))) with 0/0 = 0.
inline double hajlasz_ratio(double fx, double fy, double gx, double gy, double dist) {
  const double num = std::abs(fx - fy);
  if (num == 0.0) return 0.0;
  const double den = dist * (gx + gy);
  return den > 0.0 ? num / den : kInf;
}

inline HajlaszReport verify_pointwise(const GridFunction& f, const GridFunction& g, const PairSample& sample,
                                      double threshold = 1.0, std::size_t max_violations = 1000) {
  GridFunction::require_same_domain(f, g);
  if (!(sample.domain == f.domain())) throw domain_mismatch("pair sample was drawn on a different domain");
  const BoxDomain& d = f.domain();
  HajlaszReport r;
  r.threshold = threshold;
  r.n_pairs = sample.pairs.size();
  r.seed = sample.seed;
  r.count = sample.count;
  r.strategy = sample.strategy;
  const double h = d.min_spacing();
  std::size_t worst = sample.pairs.size();
  for (std::size_t k = 0; k < sample.pairs.size(); ++k) {
    if (!sample.admissible[k]) continue;
    ++r.n_admissible;
    const auto [i, j] = sample.pairs[k];
    const double dist = distance(d.center(i), d.center(j), d.dim());
    const double ratio = hajlasz_ratio(f[i], f[j], g[i], g[j], dist);
    if (worst == sample.pairs.size() || ratio > r.minimal_constant) {
      r.minimal_constant = ratio;
      worst = k;
    }
    if (dist <= 1.5 * h) r.neighbor_max = std::max(r.neighbor_max, ratio);
    if (dist >= 8.0 * h) r.far_max = std::max(r.far_max, ratio);
    if (ratio > threshold) {
      ++r.violation_count;
      if (r.violations.size() < max_violations) r.violations.push_back({i, j, ratio});
    }
  }
  if (r.n_admissible == 0) throw precondition_error("verify_pointwise: no admissible pairs in the sample");
  r.worst_x = d.center(sample.pairs[worst].first);
  r.worst_y = d.center(sample.pairs[worst].second);
  r.blow_up = r.neighbor_max > 0.0 && r.neighbor_max > 4.0 * r.far_max;
  return r;
}

/// 1D check of |f'| <= 2 c g + tau(h) at interior cells, given that c g is a Hajlasz gradient of f
/// on the sample. tau(h) = max |second difference of c g|; cells where f itself has a kink
/// (|second difference of f| > h max|f'| / 4) are excluded and listed.
inline VerificationReport derivative_bound_check(const GridFunction& f, const GridFunction& g, double c,
                                                 const PairSample& sample) {
  const BoxDomain& d = f.domain();
  if (d.dim() != 1) throw precondition_error("derivative_bound_check is one-dimensional");
  if (d.resolution(0) < 3) throw precondition_error("derivative_bound_check needs at least 3 cells");
  const GridFunction G = g.scaled(c);
  const HajlaszReport pre = verify_pointwise(f, G, sample);
  if (!(pre.minimal_constant <= 1.0 + 1e-9)) {
    throw precondition_error("derivative_bound_check: (f, c g) fails the pointwise inequality on the sample (constant " +
                             std::to_string(pre.minimal_constant) + ")");
  }
  const std::size_t n = d.resolution(0);
  const double h = d.spacing(0);
  std::vector<double> df(n, 0.0);
  double max_df = 0.0, tau = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    df[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    max_df = std::max(max_df, std::abs(df[i]));
    tau = std::max(tau, std::abs(G[i + 1] - 2.0 * G[i] + G[i - 1]));
  }
  VerificationReport r;
  r.check = "derivative-bound";
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (std::abs(f[i + 1] - 2.0 * f[i] + f[i - 1]) > 0.25 * h * max_df) {
      r.excluded.push_back(i);
      continue;
    }
    const double bound = 2.0 * G[i] + tau;
    if (bound > 0.0) r.record_ratio(std::abs(df[i]) / bound);
    if (std::abs(df[i]) > bound * (1.0 + 1e-12)) {
      r.fail("cell " + std::to_string(i) + ": |f'| = " + std::to_string(std::abs(df[i])) + " > " +
             std::to_string(bound));
    }
  }
  r.constants = {{"tau", tau}, {"h", h}, {"pair_constant", pre.minimal_constant}, {"c", c}};
  return r;
}

/// Scalar Lipschitz extension x -> min_i (v_i + L |x - p_i|).
class McShaneExtension {
 public:
  McShaneExtension(std::vector<Point> points, std::vector<double> values, double lipschitz, int dim)
      : points_(std::move(points)), values_(std::move(values)), L_(lipschitz), dim_(dim) {
    if (points_.empty()) throw precondition_error("mcshane_extend: no data points");
    if (points_.size() != values_.size()) throw precondition_error("mcshane_extend: points and values differ in size");
    if (!(L_ >= 0.0) || !std::isfinite(L_)) throw precondition_error("mcshane_extend: L must be finite and >= 0");
    if (dim_ < 1 || dim_ > kMaxDim) throw precondition_error("mcshane_extend: unsupported dimension");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        const double gap = std::abs(values_[i] - values_[j]);
        const double allowed = L_ * distance(points_[i], points_[j], dim_);
        if (gap > allowed * (1.0 + 1e-12) + 1e-300) {
          throw precondition_error("mcshane_extend: data is not L-Lipschitz between points " + std::to_string(i) +
                                   " and " + std::to_string(j));
        }
      }
    }
  }

  double operator()(const Point& x) const {
    double best = kInf;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      best = std::min(best, values_[i] + L_ * distance(x, points_[i], dim_));
    }
    return best;
  }

  double lipschitz() const { return L_; }
  int dim() const { return dim_; }

 private:
  std::vector<Point> points_;
  std::vector<double> values_;
  double L_;
  int dim_;
};

inline McShaneExtension mcshane_extend(std::vector<Point> points, std::vector<double> values, double L, int dim) {
  return McShaneExtension(std::move(points), std::move(values), L, dim);
}

/// Cells where g <= k.
inline std::vector<bool> truncation_sets(const GridFunction& g, double k) {
  std::vector<bool> mask(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mask[i] = g[i] <= k;
  return mask;
}

}  // namespace hajlasz
