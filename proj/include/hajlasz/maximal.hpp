#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hajlasz/grid.hpp"
#include "hajlasz/prefix.hpp"

namespace hajlasz {

enum class WindowShape { ball, cube };

struct MaximalConfig {
  double truncation = kInf;                 ///< t in M_t; infinity gives the untruncated operator
  std::optional<std::vector<double>> radii;  ///< explicit radius grid; default is geometric
  WindowShape window = WindowShape::ball;
  double min_radius = 0.0;  ///< smallest default radius; 0 means the minimum grid spacing
  int radii_per_doubling = 4;
};

/// Radii swept by the maximal operator. The default grid is r_min * 2^(k/4) below the cap,
/// followed by the cap itself (t, or the domain diameter when t is infinite).
inline std::vector<double> radius_grid(const BoxDomain& d, const MaximalConfig& cfg) {
  const double t = cfg.truncation;
  if (!(t > 0.0)) throw precondition_error("truncation t must be positive");
  if (cfg.radii) {
    const auto& r = *cfg.radii;
    if (r.empty()) throw precondition_error("empty radius grid");
    const double max_ratio = std::pow(2.0, 0.25) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(r[i] > 0.0) || r[i] > t) throw precondition_error("radii must lie in (0, t]");
      if (i > 0 && !(r[i] > r[i - 1])) throw precondition_error("radii must be strictly increasing");
      if (i > 0 && r[i] / r[i - 1] > max_ratio) {
        throw precondition_error("radius grid needs at least 4 radii per doubling");
      }
    }
    return r;
  }
  if (cfg.radii_per_doubling < 4) throw precondition_error("radius grid needs at least 4 radii per doubling");
  const double r0 = cfg.min_radius > 0.0 ? cfg.min_radius : d.min_spacing();
  const double cap = std::isfinite(t) ? t : d.diameter();
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double r = r0 * std::pow(2.0, static_cast<double>(k) / cfg.radii_per_doubling);
    if (!(r < cap * (1.0 - 1e-12))) break;
    out.push_back(r);
  }
  out.push_back(cap);
  return out;
}

namespace detail {

// Largest c >= 0 with partial + (c*h)^2 < r2; requires partial < r2.
inline std::ptrdiff_t chord_half_width(double partial, double r2, double h) {
  auto c = static_cast<std::ptrdiff_t>(std::floor(std::sqrt(std::max(r2 - partial, 0.0)) / h)) + 1;
  while (c > 0) {
    const double e = static_cast<double>(c) * h;
    if (partial + e * e < r2) break;
    --c;
  }
  return c;
}

struct Chord {
  Index offset{};  // offsets on axes 0..dim-2
  std::ptrdiff_t half_width = 0;
};

// Rows of cells whose centers lie in the open ball of radius r around a cell center.
inline std::vector<Chord> ball_chords(const BoxDomain& d, double r) {
  const int n = d.dim();
  const double r2 = r * r;
  std::vector<Chord> chords;
  Index lim{}, m{};
  for (int a = 0; a < n - 1; ++a) {
    lim[a] = static_cast<std::ptrdiff_t>(std::ceil(r / d.spacing(a)));
    m[a] = -lim[a];
  }
  while (true) {
    double partial = 0.0;
    for (int a = 0; a < n - 1; ++a) {
      const double e = static_cast<double>(m[a]) * d.spacing(a);
      partial += e * e;
    }
    if (partial < r2) chords.push_back({m, chord_half_width(partial, r2, d.spacing(n - 1))});
    int a = n - 2;
    while (a >= 0) {
      if (++m[a] <= lim[a]) break;
      m[a] = -lim[a];
      --a;
    }
    if (a < 0) break;
  }
  return chords;
}

// Squared distance (Euclidean or max-norm) from cell p to the farthest cell center. Once a radius
// exceeds it the window holds every cell and larger radii only lower the average.
inline double farthest_center_distance2(const BoxDomain& d, const Index& p, WindowShape w) {
  double key = 0.0;
  for (int a = 0; a < d.dim(); ++a) {
    const auto far = std::max<std::ptrdiff_t>(p[a], static_cast<std::ptrdiff_t>(d.resolution(a)) - 1 - p[a]);
    const double e = static_cast<double>(far) * d.spacing(a);
    key = w == WindowShape::ball ? key + e * e : std::max(key, e * e);
  }
  return key;
}

inline double window_volume(WindowShape w, int dim, double r) {
  return w == WindowShape::ball ? unit_ball_volume(dim) * std::pow(r, dim) : std::pow(2.0 * r, dim);
}

// Exact ball membership; each chord is summed through per-row prefix sums along the last axis.
inline GridFunction maximal_ball_path(const GridFunction& g, const std::vector<double>& radii) {
  const BoxDomain& d = g.domain();
  const int n = d.dim();
  const auto nl = static_cast<std::ptrdiff_t>(d.resolution(n - 1));
  const std::size_t rows = d.size() / static_cast<std::size_t>(nl);
  const auto v = g.values();
  std::vector<double> prefix(rows * static_cast<std::size_t>(nl + 1));
  for (std::size_t row = 0; row < rows; ++row) {
    double* p = prefix.data() + row * static_cast<std::size_t>(nl + 1);
    p[0] = 0.0;
    for (std::ptrdiff_t j = 0; j < nl; ++j) p[j + 1] = p[j] + std::abs(v[row * static_cast<std::size_t>(nl) + j]);
  }
  std::vector<std::vector<Chord>> tables;
  std::vector<double> scale;
  for (double r : radii) {
    tables.push_back(ball_chords(d, r));
    scale.push_back(d.cell_volume() / window_volume(WindowShape::ball, n, r));
  }
  std::vector<double> out(d.size(), 0.0);
  const auto total = static_cast<std::ptrdiff_t>(d.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t flat = 0; flat < total; ++flat) {
    const Index p = d.multi_index(static_cast<std::size_t>(flat));
    const double far2 = farthest_center_distance2(d, p, WindowShape::ball);
    const auto first_lo = -p[0];
    const auto first_hi = static_cast<std::ptrdiff_t>(d.resolution(0)) - 1 - p[0];
    double best = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      double s = 0.0;
      // Chords are ordered by their first-axis offset; only rows inside the domain are visited.
      auto begin = tables[k].begin(), end = tables[k].end();
      if (n > 1) {
        begin = std::lower_bound(begin, end, first_lo, [](const Chord& c, std::ptrdiff_t v) { return c.offset[0] < v; });
        end = std::upper_bound(begin, end, first_hi, [](std::ptrdiff_t v, const Chord& c) { return v < c.offset[0]; });
      }
      for (auto it = begin; it != end; ++it) {
        const Chord& c = *it;
        std::size_t row = 0;
        bool inside = true;
        for (int a = 0; a < n - 1; ++a) {
          const std::ptrdiff_t q = p[a] + c.offset[a];
          if (q < 0 || q >= static_cast<std::ptrdiff_t>(d.resolution(a))) {
            inside = false;
            break;
          }
          row = row * d.resolution(a) + static_cast<std::size_t>(q);
        }
        if (!inside) continue;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(p[n - 1] - c.half_width, 0);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(p[n - 1] + c.half_width, nl - 1);
        if (lo > hi) continue;
        const double* pr = prefix.data() + row * static_cast<std::size_t>(nl + 1);
        s += pr[hi + 1] - pr[lo];
      }
      const double avg = s * scale[k];
      if (avg > best) best = avg;
      if (radii[k] * radii[k] > far2) break;
    }
    out[static_cast<std::size_t>(flat)] = best;
  }
  return GridFunction(d, std::move(out));
}

// Axis cubes of half-width r through a summed-volume table.
inline GridFunction maximal_cube_path(const GridFunction& g, const std::vector<double>& radii) {
  const BoxDomain& d = g.domain();
  const int n = d.dim();
  std::vector<double> mag(g.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(g[i]);
  const SummedVolumeTable table(d, mag);
  std::vector<std::array<std::ptrdiff_t, 3>> half(radii.size());
  std::vector<double> scale(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r2 = radii[k] * radii[k];
    for (int a = 0; a < n; ++a) half[k][a] = chord_half_width(0.0, r2, d.spacing(a));
    scale[k] = d.cell_volume() / window_volume(WindowShape::cube, n, radii[k]);
  }
  std::vector<double> out(d.size(), 0.0);
  const auto total = static_cast<std::ptrdiff_t>(d.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t flat = 0; flat < total; ++flat) {
    const Index p = d.multi_index(static_cast<std::size_t>(flat));
    const double far2 = farthest_center_distance2(d, p, WindowShape::cube);
    double best = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      std::array<std::size_t, 3> lo{}, hi{};
      for (int a = 0; a < n; ++a) {
        lo[a] = static_cast<std::size_t>(std::max<std::ptrdiff_t>(p[a] - half[k][a], 0));
        hi[a] = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(p[a] + half[k][a], static_cast<std::ptrdiff_t>(d.resolution(a)) - 1) + 1);
      }
      const double avg = table.box_sum(lo, hi) * scale[k];
      if (avg > best) best = avg;
      if (radii[k] * radii[k] > far2) break;
    }
    out[static_cast<std::size_t>(flat)] = best;
  }
  return GridFunction(d, std::move(out));
}

}  // namespace detail

/// Centered maximal function of |g|, maximized over the radius grid; g is extended by zero.
inline GridFunction maximal_field(const GridFunction& g, const MaximalConfig& cfg = {}) {
  const auto radii = radius_grid(g.domain(), cfg);
  return cfg.window == WindowShape::ball ? detail::maximal_ball_path(g, radii) : detail::maximal_cube_path(g, radii);
}

struct MaximalPoint {
  double value = 0.0;
  double radius = 0.0;  ///< smallest maximizing radius
};

/// Single-point evaluation by direct summation over every cell in the largest window.
inline MaximalPoint maximal_at_detail(const GridFunction& g, const Point& x, const MaximalConfig& cfg = {}) {
  const BoxDomain& d = g.domain();
  if (!d.contains(x)) throw precondition_error("evaluation point lies outside the domain");
  const auto radii = radius_grid(d, cfg);
  const int n = d.dim();
  std::vector<double> r2(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) r2[k] = radii[k] * radii[k];

  // Points that coincide with a cell center use exact integer offsets, matching the field paths.
  const Index home = d.cell_of(x);
  const Point hc = d.center(home);
  bool snapped = true;
  for (int a = 0; a < n; ++a) snapped = snapped && std::abs(hc[a] - x[a]) <= 1e-9 * d.spacing(a);

  const double rmax = radii.back();
  Index lo{}, hi{};
  for (int a = 0; a < n; ++a) {
    const double h = d.spacing(a);
    lo[a] = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor((x[a] - rmax - d.lower(a)) / h)) - 1);
    hi[a] = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(d.resolution(a)) - 1,
                                     static_cast<std::ptrdiff_t>(std::ceil((x[a] + rmax - d.lower(a)) / h)) + 1);
  }
  std::vector<double> bucket(radii.size() + 1, 0.0);
  const auto v = g.values();
  Index idx = lo;
  while (true) {
    double key = 0.0;
    for (int a = 0; a < n; ++a) {
      const double e = snapped ? static_cast<double>(idx[a] - home[a]) * d.spacing(a) : d.center_coordinate(a, idx[a]) - x[a];
      if (cfg.window == WindowShape::ball) {
        key += e * e;
      } else {
        key = std::max(key, e * e);
      }
    }
    const auto k = static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), key) - r2.begin());
    bucket[k] += std::abs(v[d.flat_index(idx)]);
    int a = n - 1;
    while (a >= 0) {
      if (++idx[a] <= hi[a]) break;
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
  MaximalPoint best;
  double running = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running += bucket[k];
    const double avg = running * d.cell_volume() / detail::window_volume(cfg.window, n, radii[k]);
    if (avg > best.value) best = {avg, radii[k]};
  }
  if (best.radius == 0.0) best.radius = radii.front();
  return best;
}

inline double maximal_at(const GridFunction& g, const Point& x, const MaximalConfig& cfg = {}) {
  return maximal_at_detail(g, x, cfg).value;
}

/// Reference field by direct summation: for every cell, every other cell within the largest
/// radius is added to the bucket of its smallest enclosing radius. Same membership predicate as
/// maximal_at at cell centers; quadratic cost, meant for verification.
inline GridFunction maximal_field_brute(const GridFunction& g, const MaximalConfig& cfg = {}) {
  const BoxDomain& d = g.domain();
  const int n = d.dim();
  const auto radii = radius_grid(d, cfg);
  std::vector<double> r2(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) r2[k] = radii[k] * radii[k];
  if (radii.size() >= 65535) throw precondition_error("radius grid too long for the direct path");

  // Bucket index for every integer offset within reach of the largest radius.
  std::array<std::ptrdiff_t, 3> reach{0, 0, 0}, ext{1, 1, 1}, tstride{0, 0, 0};
  std::size_t tsize = 1;
  for (int a = n - 1; a >= 0; --a) {
    const auto res = static_cast<std::ptrdiff_t>(d.resolution(a));
    reach[a] = std::min<std::ptrdiff_t>(res - 1, static_cast<std::ptrdiff_t>(std::ceil(radii.back() / d.spacing(a))) + 1);
    ext[a] = 2 * reach[a] + 1;
    tstride[a] = static_cast<std::ptrdiff_t>(tsize);
    tsize *= static_cast<std::size_t>(ext[a]);
  }
  std::vector<std::uint16_t> bucket_of(tsize);
  for (std::size_t t = 0; t < tsize; ++t) {
    double key = 0.0;
    for (int a = 0; a < n; ++a) {
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(t) / tstride[a] % ext[a] - reach[a];
      const double e = static_cast<double>(off) * d.spacing(a);
      key = cfg.window == WindowShape::ball ? key + e * e : std::max(key, e * e);
    }
    bucket_of[t] = static_cast<std::uint16_t>(std::upper_bound(r2.begin(), r2.end(), key) - r2.begin());
  }

  std::vector<double> mag(g.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(g[i]);
  const auto nl = static_cast<std::ptrdiff_t>(d.resolution(n - 1));
  std::vector<double> out(d.size());
  const auto total = static_cast<std::ptrdiff_t>(d.size());
#pragma omp parallel
  {
    std::vector<double> bucket(radii.size() + 1);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t flat = 0; flat < total; ++flat) {
      const Index p = d.multi_index(static_cast<std::size_t>(flat));
      std::fill(bucket.begin(), bucket.end(), 0.0);
      Index lo{}, hi{}, q{};
      for (int a = 0; a < n; ++a) {
        lo[a] = std::max<std::ptrdiff_t>(0, p[a] - reach[a]);
        hi[a] = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(d.resolution(a)) - 1, p[a] + reach[a]);
      }
      q = lo;
      while (true) {
        std::ptrdiff_t t = 0;
        std::size_t row = 0;
        for (int a = 0; a < n - 1; ++a) {
          t += (q[a] - p[a] + reach[a]) * tstride[a];
          row = row * d.resolution(a) + static_cast<std::size_t>(q[a]);
        }
        const std::uint16_t* tb = bucket_of.data() + t + reach[n - 1] - p[n - 1];
        const double* mv = mag.data() + row * static_cast<std::size_t>(nl);
        for (std::ptrdiff_t j = lo[n - 1]; j <= hi[n - 1]; ++j) bucket[tb[j]] += mv[j];
        int a = n - 2;
        while (a >= 0) {
          if (++q[a] <= hi[a]) break;
          q[a] = lo[a];
          --a;
        }
        if (a < 0) break;
      }
      double best = 0.0, running = 0.0;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        running += bucket[k];
        const double avg = running * d.cell_volume() / detail::window_volume(cfg.window, n, radii[k]);
        if (avg > best) best = avg;
      }
      out[static_cast<std::size_t>(flat)] = best;
    }
  }
  return GridFunction(d, std::move(out));
}

/// Pointwise constants relating the two window shapes in dimension n:
/// M_ball <= ball_over_cube * M_cube and M_cube <= cube_over_ball * M_ball.
struct ComparabilityConstants {
  double ball_over_cube;
  double cube_over_ball;
};

inline ComparabilityConstants ball_cube_constants(int n) {
  const double w = unit_ball_volume(n);
  return {std::pow(2.0, n) / w, w * std::pow(static_cast<double>(n), n / 2.0) / std::pow(2.0, n)};
}

}  // namespace hajlasz
