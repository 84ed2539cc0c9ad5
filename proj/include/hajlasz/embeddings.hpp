#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hajlasz/catalog.hpp"
#include "hajlasz/maximal.hpp"
#include "hajlasz/norms.hpp"
#include "hajlasz/weights.hpp"

namespace hajlasz {

struct EmbeddingReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool passed = true;
  double tolerance = 1e-9;
  std::map<std::string, double> details;
};

namespace detail {

inline EmbeddingReport make_embedding_report(std::string check, double lhs, double rhs, double tol) {
  EmbeddingReport r;
  r.check = std::move(check);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tol;
  r.ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
  r.passed = lhs <= rhs * (1.0 + tol);
  return r;
}

inline GridFunction ones_like(const GridFunction& f) { return GridFunction::constant(f.domain(), 1.0, FieldKind::weight); }

}  // namespace detail

/// Grand norm of a, its L^q(w) norm, and the profile entry of a at a given epsilon.
struct GrandizerNorms {
  GrandNormResult grand;
  double lq = 0.0;
};

inline GrandizerNorms grandizer_norms(const GridFunction& a, double q, const GridFunction& w, const EpsGrid& grid) {
  GrandizerNorms out{grand_norm(a, q, &w, &a, grid), lq_norm(a, q, w)};
  if (!(out.lq > 0.0)) throw precondition_error("the grandizer has zero L^q(w) norm");
  if (!std::isfinite(out.lq)) throw precondition_error("the grandizer is not in L^q(w)");
  return out;
}

/// ||f||_{grand(w,a)} <= ||f||_{L^q(w)} ||a||_{grand(w,a)} / ||a||_{L^q(w)}.
inline EmbeddingReport upper_embedding_check(const GridFunction& f, double q, const GridFunction& w,
                                             const GridFunction& a, const EpsGrid& grid = {}, double tol = 1e-9) {
  const auto an = grandizer_norms(a, q, w, grid);
  const GrandNormResult fg = grand_norm(f, q, &w, &a, grid);
  // The Hoelder bound holds entry by entry in epsilon; evaluating a's profile at f's argmax
  // keeps the comparison exact even where the two refined grids differ.
  const double a_sup = std::max(an.grand.value, grand_profile_at(a, q, fg.argmax_eps, &w, &a));
  const double fq = lq_norm(f, q, w);
  auto r = detail::make_embedding_report("upper-embedding", fg.value, fq * a_sup / an.lq, tol);
  r.details = {{"f_lq", fq}, {"a_grand", an.grand.value}, {"a_lq", an.lq}, {"argmax_eps", fg.argmax_eps}};
  return r;
}

/// Every recorded profile entry is at most the grand norm, and each entry recomputed
/// independently through lq_norm with weight w a^eps agrees with it.
inline EmbeddingReport lower_embedding_check(const GridFunction& f, double q, const GridFunction& w,
                                             const GridFunction& a, const GrandNormResult& result,
                                             std::size_t stride = 1, double tol = 1e-9) {
  if (stride == 0) throw precondition_error("stride must be positive");
  double worst = 0.0, max_rel = 0.0;
  for (std::size_t k = 0; k < result.profile.size(); k += stride) {
    const auto& p = result.profile[k];
    const GridFunction weight = w * a.map([e = p.eps](double v) { return std::pow(v, e); });
    const double direct = std::pow(p.eps, 1.0 / (q - p.eps)) * lq_norm(f, q - p.eps, weight);
    worst = std::max(worst, direct);
    if (direct > 0.0) max_rel = std::max(max_rel, std::abs(direct - p.value) / direct);
  }
  auto r = detail::make_embedding_report("lower-embedding", worst, result.value, tol);
  r.details = {{"max_relative_profile_error", max_rel}};
  if (max_rel > tol) r.passed = false;
  return r;
}

/// grand_sobolev_sup(f) <= K_a ||f||_{W^{1,q}(w)} with K_a = 4 ||a||_{grand} / ||a||_{L^q(w)}.
inline EmbeddingReport sobolev_embedding_check(const GridFunction& f, double q, const GridFunction& w,
                                               const GridFunction& a, const EpsGrid& grid = {}, double tol = 1e-9) {
  const auto an = grandizer_norms(a, q, w, grid);
  const GrandNormResult sup = grand_sobolev_sup(f, q, &w, &a, grid);
  const double a_sup = std::max(an.grand.value, grand_profile_at(a, q, sup.argmax_eps, &w, &a));
  const double k_a = 4.0 * a_sup / an.lq;
  const double w1q = sobolev_norm(f, q, w);
  auto r = detail::make_embedding_report("sobolev-embedding", sup.value, k_a * w1q, tol);
  r.details = {{"K_a", k_a}, {"sobolev_norm", w1q}, {"argmax_eps", sup.argmax_eps}};
  return r;
}

/// Axis-aligned sub-box E = prod (lo_i, hi_i); cells belong to E by their centers.
struct SubBox {
  Point lo{};
  Point hi{};
};

/// integral_E |f| <= C ||f||_{grand(w,a)}, with C = |Q| (eps0 integral_Q v)^{-1/p} [v]^{1/p},
/// v = w a^{eps0}, p = q - eps0 and Q the cell-aligned box spanned by the cells of E.
inline EmbeddingReport local_integrability_check(const GridFunction& f, const SubBox& e, double q,
                                                 const WeightSpec& w, const WeightSpec& a, double delta,
                                                 const EpsGrid& grid = {}, const CubeFamily& fam = {},
                                                 double tol = 1e-9) {
  const BoxDomain& d = f.domain();
  const int n = d.dim();
  const GrandizerExponent gz = grandizer_exponent_search(w, a, q, delta, d, 32, fam);
  const double eps0 = gz.epsilon;
  const double p = q - eps0;
  const GridFunction v = sample_weight(WeightProduct(w).times(a, eps0), d);
  const GridFunction wg = sample_weight(w, d);
  const GridFunction ag = sample_weight(a, d);

  Index lo{}, hi{};
  for (int ax = 0; ax < n; ++ax) {
    lo[ax] = static_cast<std::ptrdiff_t>(d.resolution(ax));
    hi[ax] = -1;
  }
  double lhs = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point c = d.center(i);
    bool inside = true;
    for (int ax = 0; ax < n; ++ax) inside = inside && c[ax] > e.lo[ax] && c[ax] < e.hi[ax];
    if (!inside) continue;
    ++cells;
    lhs += std::abs(f[i]);
    const Index idx = d.multi_index(i);
    for (int ax = 0; ax < n; ++ax) {
      lo[ax] = std::min(lo[ax], idx[ax]);
      hi[ax] = std::max(hi[ax], idx[ax]);
    }
  }
  if (cells == 0) throw precondition_error("local_integrability_check: E contains no cell center");
  lhs *= d.cell_volume();

  double sum_v = 0.0, sum_dual = 0.0, q_cells = 0.0;
  Index idx = lo;
  while (true) {
    const double vi = v[d.flat_index(idx)];
    sum_v += vi;
    sum_dual += std::pow(vi, -1.0 / (p - 1.0));
    q_cells += 1.0;
    int ax = n - 1;
    while (ax >= 0) {
      if (++idx[ax] <= hi[ax]) break;
      idx[ax] = lo[ax];
      --ax;
    }
    if (ax < 0) break;
  }
  const double a_on_q = detail::aq_expression(sum_v, sum_dual, q_cells, p);
  const double constant_v = std::max(gz.estimate.value, a_on_q);
  const double q_measure = q_cells * d.cell_volume();
  const double c = q_measure * std::pow(eps0 * sum_v * d.cell_volume(), -1.0 / p) * std::pow(constant_v, 1.0 / p);

  const GrandNormResult fg = grand_norm(f, q, &wg, &ag, grid);
  const double at_eps0 = std::pow(eps0, 1.0 / p) * lq_norm(f, p, v);
  const double grand = std::max(fg.value, at_eps0);
  auto r = detail::make_embedding_report("local-integrability", lhs, c * grand, tol);
  r.details = {{"eps0", eps0},           {"p", p},          {"constant", c},         {"A_p_estimate", gz.estimate.value},
               {"A_p_on_Q", a_on_q},     {"Q_measure", q_measure}, {"grand_norm", fg.value}, {"delta_used", gz.delta_used}};
  return r;
}

struct ProbeReport {
  double max_ratio = 0.0;
  std::size_t argmax = 0;
  std::vector<double> ratios;
  std::vector<double> numerators;  ///< grand norms of M g
  bool finite = true;
};

/// max over the family of ||M g||_{grand} / ||g||_{grand}.
inline ProbeReport maximal_boundedness_probe(const std::vector<GridFunction>& family, double q, const GridFunction* w,
                                             const GridFunction* a, const MaximalConfig& cfg = {},
                                             const EpsGrid& grid = {}) {
  if (family.empty()) throw precondition_error("empty probe family");
  ProbeReport r;
  r.ratios.resize(family.size());
  r.numerators.resize(family.size());
  for (std::size_t k = 0; k < family.size(); ++k) {
    const double den = grand_norm(family[k], q, w, a, grid).value;
    if (!(den > 0.0)) throw precondition_error("probe family member " + std::to_string(k) + " has zero grand norm");
    const GridFunction mg = maximal_field(family[k], cfg);
    if (!mg.all_finite()) {
      r.finite = false;
      r.ratios[k] = kInf;
      r.numerators[k] = kInf;
      continue;
    }
    r.numerators[k] = grand_norm(mg, q, w, a, grid).value;
    r.ratios[k] = r.numerators[k] / den;
  }
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (!std::isfinite(r.ratios[k])) r.finite = false;
    if (r.ratios[k] > r.max_ratio) {
      r.max_ratio = r.ratios[k];
      r.argmax = k;
    }
  }
  return r;
}

/// Resolution-independent stress family on the box [lo, hi]^dim: bumps, indicators, and
/// power singularities |x - c|^{-gamma} with gamma = {0.6, 0.9} * dim / q.
inline std::vector<TestFunctionSpec> stress_family(int dim, double lo, double hi, std::size_t count, double q,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double span = hi - lo;
  std::uniform_real_distribution<double> inner(lo + 0.2 * span, hi - 0.2 * span);
  std::uniform_real_distribution<double> radius(0.03 * span, 0.2 * span);
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  static const char* axes[] = {"x", "y", "z"};
  std::vector<TestFunctionSpec> out;
  for (std::size_t k = 0; k < count; ++k) {
    TestFunctionSpec s;
    switch (k % 4) {
      case 0:
      case 1: {
        s.id = CatalogId::bump;
        s.params = {amp(rng), radius(rng)};
        for (int a = 0; a < dim; ++a) s.params.push_back(inner(rng));
        break;
      }
      case 2: {
        s.id = CatalogId::indicator;
        for (int a = 0; a < dim; ++a) {
          const double c = inner(rng), r = radius(rng);
          s.params.push_back(c - r);
          s.params.push_back(c + r);
        }
        break;
      }
      default: {
        const double gamma = ((k / 4) % 2 == 0 ? 0.6 : 0.9) * dim / q;
        std::ostringstream e;
        e.precision(17);
        e << "(";
        for (int a = 0; a < dim; ++a) {
          e << (a ? "+" : "") << "(" << axes[a] << "-(" << inner(rng) << "))^2";
        }
        e << ")^(" << -0.5 * gamma << ")";
        s.id = CatalogId::custom_expression;
        s.expression = e.str();
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hajlasz
