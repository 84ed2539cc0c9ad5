#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hajlasz/grid.hpp"
#include "hajlasz/verification.hpp"

namespace hajlasz {

/// (integral of |f|^q w)^{1/q}
inline double lq_norm(const GridFunction& f, double q, const GridFunction& w) {
  if (!(q >= 1.0)) throw precondition_error("L^q norm needs q >= 1");
  GridFunction::require_same_domain(f, w);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    if (a > 0.0) s += std::pow(a, q) * w[i];
  }
  return std::pow(s * f.domain().cell_volume(), 1.0 / q);
}

inline double lq_norm(const GridFunction& f, double q) {
  if (!(q >= 1.0)) throw precondition_error("L^q norm needs q >= 1");
  double s = 0.0;
  for (double v : f.values()) {
    const double a = std::abs(v);
    if (a > 0.0) s += std::pow(a, q);
  }
  return std::pow(s * f.domain().cell_volume(), 1.0 / q);
}

/// Sobolev norm ||f||_{L^q(w)} + || |grad f| ||_{L^q(w)}.
inline double sobolev_norm(const GridFunction& f, double q, const GridFunction& w) {
  return lq_norm(f, q, w) + lq_norm(gradient_magnitude(f), q, w);
}

inline double sobolev_norm(const GridFunction& f, double q) {
  return lq_norm(f, q) + lq_norm(gradient_magnitude(f), q);
}

// Evaluation grid for the sup over epsilon in (0, q-1): `points` uniform values on
// [e_min, q-1-e_min] with e_min = (q-1)*min_fraction, then golden-section refinement
// between the neighbours of the grid argmax.
struct EpsGrid {
  std::size_t points = 2048;
  bool refine = true;
  double min_fraction = 1.0 / 4096.0;
  int refine_iterations = 60;
};

struct ProfilePoint {
  double eps = 0.0;
  double value = 0.0;  ///< eps^{1/(q-eps)} * ||g||_{L^{q-eps}(w a^eps)}
};

struct GrandNormResult {
  double value = 0.0;
  double argmax_eps = 0.0;
  double q = 2.0;
  std::vector<ProfilePoint> profile;  ///< sorted by eps
  /// Sign of value(eps) - value(neighbour) at the grid argmax when it sits on a grid endpoint:
  /// +1 means the profile is still increasing toward the open end of the interval.
  int endpoint_trend = 0;
};

namespace detail {

// log|g|, log w and log a on the support of g, for fast evaluation of
// integral |g|^p w a^eps = sum exp(p log|g| + log w + eps log a) * vol.
class LogIntegrand {
 public:
  LogIntegrand(const GridFunction& g, const GridFunction* w, const GridFunction* a) : vol_(g.domain().cell_volume()) {
    if (w) GridFunction::require_same_domain(g, *w);
    if (a) GridFunction::require_same_domain(g, *a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = std::abs(g[i]);
      if (v == 0.0) continue;
      const double wi = w ? (*w)[i] : 1.0;
      const double ai = a ? (*a)[i] : 1.0;
      if (!(wi > 0.0) || !(ai > 0.0) || !std::isfinite(wi) || !std::isfinite(ai)) {
        throw precondition_error("weights must be positive and finite on the support of the function");
      }
      lg_.push_back(std::log(v));
      lw_.push_back(std::log(wi));
      la_.push_back(std::log(ai));
    }
  }

  /// ||g||_{L^p(w a^eps)}
  double norm(double p, double eps) const {
    double s = 0.0;
    const std::size_t n = lg_.size();
    for (std::size_t i = 0; i < n; ++i) s += std::exp(p * lg_[i] + lw_[i] + eps * la_[i]);
    return std::pow(s * vol_, 1.0 / p);
  }

  /// norm(q - e, e) for every e of an equally spaced grid. Terms exp(q log|g| + log w + e log(a/|g|))
  /// are evaluated exactly at the start of each block and advanced by a per-cell factor inside it.
  std::vector<double> norms_on_uniform(double q, const std::vector<double>& eps) const {
    constexpr std::size_t kBlock = 32;
    const std::size_t m = eps.size(), n = lg_.size();
    std::vector<double> sums(m, 0.0);
    const double step = m > 1 ? (eps.back() - eps.front()) / static_cast<double>(m - 1) : 0.0;
    std::vector<double> c(n), slope(n), ratio(n), term(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = q * lg_[i] + lw_[i];
      slope[i] = la_[i] - lg_[i];
      ratio[i] = std::exp(step * slope[i]);
    }
    std::vector<std::size_t> exact;
    for (std::size_t b = 0; b < m; b += kBlock) {
      const std::size_t end = std::min(m, b + kBlock);
      exact.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const double x = c[i] + eps[b] * slope[i];
        // Near the underflow threshold a geometric update could miss a term that grows back.
        if (x < -600.0) {
          exact.push_back(i);
          term[i] = 0.0;
        } else {
          term[i] = std::exp(x);
        }
      }
      for (std::size_t k = b; k < end; ++k) {
        double part[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
          for (std::size_t j = 0; j < 4; ++j) {
            part[j] += term[i + j];
            term[i + j] *= ratio[i + j];
          }
        }
        for (; i < n; ++i) {
          part[0] += term[i];
          term[i] *= ratio[i];
        }
        double acc = (part[0] + part[1]) + (part[2] + part[3]);
        for (std::size_t i : exact) acc += std::exp(c[i] + eps[k] * slope[i]);
        sums[k] = acc;
      }
    }
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = std::pow(sums[k] * vol_, 1.0 / (q - eps[k]));
    return out;
  }

  bool empty() const { return lg_.empty(); }

 private:
  double vol_;
  std::vector<double> lg_, lw_, la_;
};

inline void validate_grid(double q, const EpsGrid& grid) {
  if (!(q > 1.0)) throw precondition_error("grand norms need q > 1");
  if (grid.points == 0) throw precondition_error("empty epsilon grid");
  if (!(grid.min_fraction > 0.0 && grid.min_fraction < 0.5)) {
    throw precondition_error("epsilon grid min_fraction must lie in (0, 1/2)");
  }
}

inline std::vector<double> uniform_eps(double q, const EpsGrid& grid) {
  const double lo = (q - 1.0) * grid.min_fraction;
  const double hi = (q - 1.0) - lo;
  std::vector<double> e(grid.points);
  if (grid.points == 1) {
    e[0] = 0.5 * (q - 1.0);
    return e;
  }
  for (std::size_t i = 0; i < grid.points; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.points - 1);
  }
  return e;
}

// Golden-section search for a maximum of f on [a, b]; every evaluation is reported to `seen`.
template <class F, class Seen>
void golden_maximize(F&& f, double a, double b, int iterations, Seen&& seen) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  seen(c, fc);
  seen(d, fd);
  for (int it = 0; it < iterations && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      seen(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      seen(d, fd);
    }
  }
}

inline double eps_factor(double eps, double q) { return std::pow(eps, 1.0 / (q - eps)); }

}  // namespace detail

/// Generalized grand norm sup_eps (eps * integral |f|^{q-eps} w a^eps)^{1/(q-eps)}.
inline GrandNormResult grand_norm(const GridFunction& f, double q, const GridFunction* w, const GridFunction* a,
                                  const EpsGrid& grid = {}) {
  detail::validate_grid(q, grid);
  const detail::LogIntegrand integrand(f, w, a);
  auto profile_at = [&](double eps) {
    if (integrand.empty()) return 0.0;
    return detail::eps_factor(eps, q) * integrand.norm(q - eps, eps);
  };
  GrandNormResult r;
  r.q = q;
  const auto eps = detail::uniform_eps(q, grid);
  r.profile.reserve(eps.size() + 2 * static_cast<std::size_t>(grid.refine_iterations) + 2);
  if (integrand.empty()) {
    for (double e : eps) r.profile.push_back({e, 0.0});
  } else {
    const auto norms = integrand.norms_on_uniform(q, eps);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      r.profile.push_back({eps[i], detail::eps_factor(eps[i], q) * norms[i]});
    }
    // Entries that can carry the maximum are recomputed directly, so the reported norm bounds
    // every recorded entry exactly.
    double top = 0.0;
    for (const auto& p : r.profile) top = std::max(top, p.value);
    for (auto& p : r.profile) {
      if (p.value >= top * (1.0 - 1e-10)) p.value = profile_at(p.eps);
    }
  }
  for (const auto& p : r.profile) {
    if (!std::isfinite(p.value)) throw precondition_error("non-finite grand-norm profile entry");
  }
  std::size_t k = 0;
  for (std::size_t i = 1; i < r.profile.size(); ++i) {
    if (r.profile[i].value > r.profile[k].value) k = i;
  }
  if (r.profile.size() > 1) {
    if (k == 0) r.endpoint_trend = r.profile[0].value > r.profile[1].value ? 1 : 0;
    if (k + 1 == r.profile.size()) r.endpoint_trend = r.profile[k].value > r.profile[k - 1].value ? 1 : 0;
  }
  if (grid.refine && r.profile.size() >= 3 && !integrand.empty()) {
    const double lo = eps[k == 0 ? 0 : k - 1];
    const double hi = eps[std::min(k + 1, eps.size() - 1)];
    detail::golden_maximize(profile_at, lo, hi, grid.refine_iterations,
                            [&](double e, double v) { r.profile.push_back({e, v}); });
    std::sort(r.profile.begin(), r.profile.end(), [](const auto& x, const auto& y) { return x.eps < y.eps; });
  }
  r.value = 0.0;
  r.argmax_eps = r.profile.front().eps;
  for (const auto& p : r.profile) {
    if (p.value > r.value) {
      r.value = p.value;
      r.argmax_eps = p.eps;
    }
  }
  return r;
}

inline GrandNormResult grand_norm(const GridFunction& f, double q, const GridFunction& w, const GridFunction& a,
                                  const EpsGrid& grid = {}) {
  return grand_norm(f, q, &w, &a, grid);
}

inline GrandNormResult grand_norm(const GridFunction& f, double q, const EpsGrid& grid = {}) {
  return grand_norm(f, q, nullptr, nullptr, grid);
}

/// One profile entry eps^{1/(q-eps)} ||f||_{L^{q-eps}(w a^eps)}, computed directly.
inline double grand_profile_at(const GridFunction& f, double q, double eps, const GridFunction* w,
                               const GridFunction* a) {
  if (!(eps > 0.0 && eps < q - 1.0)) throw precondition_error("epsilon must lie in (0, q-1)");
  const detail::LogIntegrand integrand(f, w, a);
  if (integrand.empty()) return 0.0;
  return detail::eps_factor(eps, q) * integrand.norm(q - eps, eps);
}

enum class InnerSobolevNorm {
  power_sum,  ///< (||f||^p + ||grad f||^p)^{1/p}
  plain_sum,  ///< ||f|| + ||grad f||
};

// Raw norms ||f||_{L^{q-eps}(w a^eps)} and || |grad f| ||_{L^{q-eps}(w a^eps)} on one shared
// epsilon set; both grand Sobolev forms are derived from it.
struct SobolevProfile {
  double q = 2.0;
  std::vector<double> eps;
  std::vector<double> f_norm;
  std::vector<double> grad_norm;

  double factor(std::size_t i) const { return detail::eps_factor(eps[i], q); }

  double sup_entry(std::size_t i, InnerSobolevNorm inner = InnerSobolevNorm::power_sum) const {
    const double p = q - eps[i];
    const double inner_norm = inner == InnerSobolevNorm::power_sum
                                  ? std::pow(std::pow(f_norm[i], p) + std::pow(grad_norm[i], p), 1.0 / p)
                                  : f_norm[i] + grad_norm[i];
    return factor(i) * inner_norm;
  }
  double f_entry(std::size_t i) const { return factor(i) * f_norm[i]; }
  double grad_entry(std::size_t i) const { return factor(i) * grad_norm[i]; }
};

inline SobolevProfile sobolev_profile(const GridFunction& f, double q, const GridFunction* w, const GridFunction* a,
                                      const EpsGrid& grid = {}, InnerSobolevNorm inner = InnerSobolevNorm::power_sum) {
  detail::validate_grid(q, grid);
  const GridFunction grad = gradient_magnitude(f);
  const detail::LogIntegrand fi(f, w, a);
  const detail::LogIntegrand gi(grad, w, a);
  SobolevProfile sp;
  sp.q = q;
  auto add = [&](double e) {
    sp.eps.push_back(e);
    sp.f_norm.push_back(fi.empty() ? 0.0 : fi.norm(q - e, e));
    sp.grad_norm.push_back(gi.empty() ? 0.0 : gi.norm(q - e, e));
  };
  const auto eps = detail::uniform_eps(q, grid);
  sp.eps = eps;
  sp.f_norm = fi.empty() ? std::vector<double>(eps.size(), 0.0) : fi.norms_on_uniform(q, eps);
  sp.grad_norm = gi.empty() ? std::vector<double>(eps.size(), 0.0) : gi.norms_on_uniform(q, eps);
  if (grid.refine && eps.size() >= 3) {
    // Argmax positions are read from the uniform grid only; refinement points go to the shared set.
    const SobolevProfile base = sp;
    auto refine_for = [&](auto score) {
      std::size_t k = 0;
      for (std::size_t i = 1; i < eps.size(); ++i) {
        if (score(base, i) > score(base, k)) k = i;
      }
      const double lo = eps[k == 0 ? 0 : k - 1];
      const double hi = eps[std::min(k + 1, eps.size() - 1)];
      std::vector<double> extra;
      detail::golden_maximize(
          [&](double e) {
            const double fn = fi.empty() ? 0.0 : fi.norm(q - e, e);
            const double gn = gi.empty() ? 0.0 : gi.norm(q - e, e);
            const SobolevProfile one{q, {e}, {fn}, {gn}};
            return score(one, 0);
          },
          lo, hi, grid.refine_iterations, [&](double e, double) { extra.push_back(e); });
      for (double e : extra) add(e);
    };
    refine_for([inner](const SobolevProfile& p, std::size_t i) { return p.sup_entry(i, inner); });
    refine_for([](const SobolevProfile& p, std::size_t i) { return p.f_entry(i); });
    refine_for([](const SobolevProfile& p, std::size_t i) { return p.grad_entry(i); });
  }
  for (const double v : sp.f_norm) {
    if (!std::isfinite(v)) throw precondition_error("non-finite grand Sobolev profile entry");
  }
  for (const double v : sp.grad_norm) {
    if (!std::isfinite(v)) throw precondition_error("non-finite grand Sobolev profile entry");
  }
  return sp;
}

/// Sup-form grand Sobolev norm sup_eps eps^{1/(q-eps)} ||f||_{W^{1,q-eps}(w a^eps)}.
inline GrandNormResult grand_sobolev_sup(const SobolevProfile& sp,
                                         InnerSobolevNorm inner = InnerSobolevNorm::power_sum) {
  GrandNormResult r;
  r.q = sp.q;
  for (std::size_t i = 0; i < sp.eps.size(); ++i) r.profile.push_back({sp.eps[i], sp.sup_entry(i, inner)});
  std::sort(r.profile.begin(), r.profile.end(), [](const auto& x, const auto& y) { return x.eps < y.eps; });
  r.argmax_eps = r.profile.front().eps;
  for (const auto& p : r.profile) {
    if (p.value > r.value) {
      r.value = p.value;
      r.argmax_eps = p.eps;
    }
  }
  return r;
}

inline GrandNormResult grand_sobolev_sup(const GridFunction& f, double q, const GridFunction* w, const GridFunction* a,
                                         const EpsGrid& grid = {},
                                         InnerSobolevNorm inner = InnerSobolevNorm::power_sum) {
  return grand_sobolev_sup(sobolev_profile(f, q, w, a, grid, inner), inner);
}

struct GrandSobolevSum {
  double value = 0.0;
  double f_part = 0.0;
  double grad_part = 0.0;
};

/// Sum-form grand Sobolev norm ||f||_{grand} + || |grad f| ||_{grand}.
inline GrandSobolevSum grand_sobolev_sum(const SobolevProfile& sp) {
  GrandSobolevSum s;
  for (std::size_t i = 0; i < sp.eps.size(); ++i) {
    s.f_part = std::max(s.f_part, sp.f_entry(i));
    s.grad_part = std::max(s.grad_part, sp.grad_entry(i));
  }
  s.value = s.f_part + s.grad_part;
  return s;
}

inline double grand_sobolev_sum(const GridFunction& f, double q, const GridFunction* w, const GridFunction* a,
                                const EpsGrid& grid = {}) {
  return grand_sobolev_sum(sobolev_profile(f, q, w, a, grid)).value;
}

/// Checks 1/4 * sum-form <= sup-form <= sum-form on a shared profile.
inline VerificationReport equivalence_check(const SobolevProfile& sp, double rel_tol = 1e-12) {
  const double sup = grand_sobolev_sup(sp).value;
  const double sum = grand_sobolev_sum(sp).value;
  VerificationReport r;
  r.check = "grand-sobolev-equivalence";
  r.constants = {{"sup_form", sup}, {"sum_form", sum}, {"q", sp.q}};
  if (sum > 0.0) {
    r.constants["ratio"] = sup / sum;
    r.record_ratio(sup / sum);
  }
  const double slack = rel_tol * std::max(sum, std::numeric_limits<double>::min());
  if (!(0.25 * sum <= sup + slack)) r.fail("sup-form below a quarter of the sum-form");
  if (!(sup <= sum + slack)) r.fail("sup-form exceeds the sum-form");
  return r;
}

inline VerificationReport equivalence_check(const GridFunction& f, double q, const GridFunction* w,
                                            const GridFunction* a, const EpsGrid& grid = {}) {
  return equivalence_check(sobolev_profile(f, q, w, a, grid));
}

}  // namespace hajlasz
