#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "kl0/ball.hpp"
#include "kl0/integrals.hpp"
#include "kl0/parallel.hpp"
#include "kl0/params.hpp"
#include "kl0/richardson.hpp"

namespace kl0 {

// Quantity evaluated at each grid point (R for the R-bound, h for the
// residual certificate). Replaceable for negative controls.
using QuantityFn = std::function<Ball(const Params&, const Precision&)>;

struct GridSpec {
  std::vector<int> dims;
  std::vector<std::string> p_offsets;  // decimal strings in (0,1)
  std::vector<std::string> m_values;   // decimal strings, increasing
  Precision prec{50};

  static GridSpec residual_default() {
    return {{3, 4}, {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "0.99"},
            {"2", "3", "5", "7", "10", "15", "20"}, Precision{50}};
  }
  static GridSpec rbound_default() {
    return {{2, 3, 4},
            {"0.05", "0.15", "0.25", "0.35", "0.45", "0.55", "0.65", "0.75", "0.85", "0.95"},
            {"1.001", "1.5", "2", "2.5", "3", "3.5", "4", "4.5", "5", "5.75", "6.5", "8", "10", "12", "15", "17.5",
             "20"},
            Precision{50}};
  }

  size_t size() const { return dims.size() * p_offsets.size() * m_values.size(); }

  void validate(const std::vector<int>& allowed_dims) const {
    prec.validate();
    if (dims.empty() || p_offsets.empty() || m_values.empty()) throw DomainError("grid has an empty axis");
    for (size_t i = 0; i < dims.size(); ++i) {
      if (std::find(allowed_dims.begin(), allowed_dims.end(), dims[i]) == allowed_dims.end())
        throw DomainError("dimension " + std::to_string(dims[i]) + " is not certifiable here");
      if (i > 0 && dims[i] <= dims[i - 1]) throw DomainError("dims must be strictly increasing");
    }
    mpfr_prec_t bits = prec.bits();
    for (size_t i = 0; i < p_offsets.size(); ++i) {
      Real o(p_offsets[i], bits);
      if (!(o > 0L) || !(o < 1L)) throw DomainError("p offset outside (0,1): " + p_offsets[i]);
      if (i > 0 && !(o > Real(p_offsets[i - 1], bits))) throw DomainError("p offsets must be strictly increasing");
    }
    for (size_t i = 0; i < m_values.size(); ++i) {
      Real m(m_values[i], bits);
      if (!(m > 1L)) throw DomainError("M value must exceed 1: " + m_values[i]);
      if (i > 0 && !(m > Real(m_values[i - 1], bits))) throw DomainError("m_values must be strictly increasing");
    }
  }

  // Largest spacing between neighbouring offsets (0 for a single offset).
  Real delta_p() const {
    mpfr_prec_t bits = prec.bits();
    Real best(0L, bits);
    for (size_t i = 1; i < p_offsets.size(); ++i) {
      Real g = Real(p_offsets[i], bits) - Real(p_offsets[i - 1], bits);
      if (g > best) best = g;
    }
    return best;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// d + offset as a decimal string ("4" + "0.95" -> "4.95").
inline std::string p_decimal(int d, const std::string& offset) {
  static const std::regex frac(R"(0\.[0-9]+)");
  if (std::regex_match(offset, frac)) return std::to_string(d) + offset.substr(1);
  Real v = Real(offset, 256) + d;
  return v.str(60);
}

struct CertRecord {
  Params params;
  int digits = 50;
  Ball value;                 // R or h, with the R_upper convention for R
  std::optional<Ball> dM;     // first M-derivative
  std::optional<Ball> d2M;    // second M-derivative
  std::optional<Ball> dp;     // first p-derivative
  std::vector<std::string> flags;

  bool failed() const {
    return std::any_of(flags.begin(), flags.end(), [](const std::string& f) { return f.rfind("error", 0) == 0; });
  }
};

// Closure value for one (d, p, [M_i, M_{i+1}]).
struct IntervalBound {
  int d = 0;
  Real p, m_lo, m_hi;
  Ball value;      // R-bound: R_upper + L_local * width / 2; residual: smallest Taylor gap
  Ball lipschitz;  // R-bound: L_local; residual: largest K_max
  int depth = 0;
  bool pass = false;
};

// One leaf of the sub-interval monotonicity certificate.
struct IntervalCert {
  int d = 0;
  Real p, m_lo, m_hi;
  Real delta_min;  // min of the certified lower ends of h' at the two ends
  Real k_max;      // max of |h''| upper ends at the two ends
  Ball gap;        // delta_min - k_max * (m_hi - m_lo)
  int depth = 0;
  int top = 0;     // index of the grid interval this leaf refines
  bool pass = false;
};

struct CertReport {
  std::string kind;  // "residual" or "rbound"
  GridSpec grid;
  Real target;
  std::vector<CertRecord> records;
  size_t worst_point = 0;
  std::vector<IntervalBound> interval_bounds;
  std::vector<IntervalCert> monotonicity;
  size_t sign_checks_total = 0;
  size_t sign_checks_passed = 0;
  Ball L_p;
  Real delta_p;
  Ball p_correction;
  Ball final_bound;
  bool pass = false;
  std::vector<std::string> failures;
  std::string methodology_note;
};

struct CertOptions {
  int workers = 0;
  QuantityFn quantity;     // empty: ratio_r / h_dlog2
  int max_depth = 8;
  double escalate_rel = 1e-6;
};

inline const char* kMethodologyNote =
    "Integrals come from tanh-sinh quadrature whose error estimate is a refinement-difference heuristic; "
    "each quadrature value is promoted to a ball with that estimate as radius. All arithmetic after the "
    "promotion (ratios, Richardson tables, Lipschitz closures, p-corrections) is outward-rounded ball "
    "arithmetic, so the certificate is semi-rigorous: rigorous conditional on the quadrature radii. "
    "Second-derivative bounds K_max are taken at sub-interval endpoints only and used as a conservative "
    "estimate of the sup over the sub-interval; they are not themselves enclosures of that sup.";

namespace detail {

// An M abscissa lo + (hi - lo) num / 2^shift, rebuilt exactly at any precision.
struct MPoint {
  std::string lo, hi;
  long num = 0;
  int shift = 0;
  Real value(const Precision& prec) const {
    Real a(lo, prec.bits());
    if (num == 0) return a;
    Real b(hi, prec.bits());
    return a + ldexp((b - a) * num, -shift);
  }
};

struct PointPlan {
  bool dM = true;
  bool d2M = true;
  bool dp = false;
};

inline Real m_step(const Real& M) { return min(default_step(M), (M - 1) / 16); }

inline CertRecord eval_point_once(int d, const std::string& p_str, const MPoint& mp, const Precision& prec,
                                  const QuantityFn& fn, PointPlan plan) {
  Params P = Params::checked(d, Real(p_str, prec.bits()), mp.value(prec));
  std::map<Real, Ball> memo;
  auto gM = [&](const Real& m) -> Ball {
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;
    Ball b = fn(Params{d, P.p, m}, prec);
    memo.emplace(m, b);
    return b;
  };
  CertRecord rec{P, prec.digits, gM(P.M), std::nullopt, std::nullopt, std::nullopt, {}};
  Real h0 = m_step(P.M);
  if (plan.dM) rec.dM = richardson_deriv(gM, P.M, 1, h0, prec);
  if (plan.d2M) rec.d2M = richardson_deriv(gM, P.M, 2, h0, prec);
  if (plan.dp) {
    auto gp = [&](const Real& q) { return fn(Params{d, q, P.M}, prec); };
    rec.dp = richardson_deriv(gp, P.p, 1, default_step(P.p), prec);
  }
  if (near_boundary(P)) rec.flags.push_back("near-boundary");
  return rec;
}

inline bool too_wide(const std::optional<Ball>& b, double rel) {
  return b && !(b->rel_rad() <= rel);
}

inline bool needs_escalation(const CertRecord& r, double rel) {
  return too_wide(r.value, rel) || too_wide(r.dM, rel) || too_wide(r.d2M, rel) || too_wide(r.dp, rel);
}

// Evaluate, re-run once at 1.5x digits if any radius is too wide, and turn
// numeric failures into flagged records rather than aborting the grid.
inline CertRecord eval_point(int d, const std::string& p_str, const MPoint& mp, const Precision& prec,
                             const QuantityFn& fn, PointPlan plan, double escalate_rel) {
  try {
    CertRecord rec = eval_point_once(d, p_str, mp, prec, fn, plan);
    if (!needs_escalation(rec, escalate_rel)) return rec;
    Precision hi = prec.scaled_by(3, 2);
    CertRecord again = eval_point_once(d, p_str, mp, hi, fn, plan);
    again.flags.push_back("escalated-to-" + std::to_string(hi.digits));
    if (needs_escalation(again, escalate_rel)) again.flags.push_back("wide-radius");
    return again;
  } catch (const NumericError& e) {
    mpfr_prec_t bits = prec.bits();
    CertRecord rec{Params{d, Real(p_str, bits), mp.value(prec)}, prec.digits, Ball(Real::nan(bits)),
                   std::nullopt, std::nullopt, std::nullopt, {std::string("error: ") + e.what()}};
    return rec;
  }
}

inline size_t grid_index(const GridSpec& g, size_t di, size_t pi, size_t mi) {
  return (di * g.p_offsets.size() + pi) * g.m_values.size() + mi;
}

inline std::vector<CertRecord> eval_grid(const GridSpec& g, const QuantityFn& fn, int workers, double escalate_rel,
                                         const std::function<PointPlan(size_t mi)>& plan_for) {
  size_t nM = g.m_values.size(), nP = g.p_offsets.size();
  return parallel_map<CertRecord>(g.size(), workers, [&](size_t idx) {
    size_t mi = idx % nM;
    size_t pi = (idx / nM) % nP;
    size_t di = idx / (nM * nP);
    int d = g.dims[di];
    return eval_point(d, p_decimal(d, g.p_offsets[pi]), MPoint{g.m_values[mi], g.m_values[mi], 0, 0}, g.prec, fn,
                      plan_for(mi), escalate_rel);
  });
}

inline std::string where(const CertRecord& r) {
  return "(d=" + std::to_string(r.params.d) + ", p=" + r.params.p.str(8) + ", M=" + r.params.M.str(8) + ")";
}

inline QuantityFn default_h() {
  return [](const Params& P, const Precision& prec) { return h_dlog2(P, prec, Route::moments); };
}
inline QuantityFn default_r() {
  return [](const Params& P, const Precision& prec) { return ratio_r(P, prec); };
}

struct Derivs {
  Ball d1, d2;
};

// Taylor-gap check on one grid interval, bisecting up to max_depth.
inline void refine_interval(int d, const std::string& p_str, const std::string& lo, const std::string& hi, int top,
                            const Derivs& at_lo, const Derivs& at_hi, const GridSpec& g, const QuantityFn& fn,
                            int max_depth, double escalate_rel, std::vector<IntervalCert>& out) {
  struct Frame {
    long num_lo, num_hi;
    int shift;
    Derivs a, b;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 1, 0, at_lo, at_hi});
  std::vector<IntervalCert> leaves;
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    int depth = f.shift;
    Real m_lo = MPoint{lo, hi, f.num_lo, f.shift}.value(g.prec);
    Real m_hi = f.num_hi == (1L << f.shift) ? Real(hi, g.prec.bits()) : MPoint{lo, hi, f.num_hi, f.shift}.value(g.prec);
    Real dmin = min(f.a.d1.lower(), f.b.d1.lower());
    Real kmax = max(abs(f.a.d2).upper(), abs(f.b.d2).upper());
    Ball gap = Ball(dmin) - Ball(kmax) * (m_hi - m_lo);
    bool ok = gap.positive();
    if (ok || depth >= max_depth) {
      leaves.push_back({d, Real(p_str, g.prec.bits()), m_lo, m_hi, dmin, kmax, gap, depth, top, ok});
      continue;
    }
    long mid_num = f.num_lo * 2 + 1;
    CertRecord mid = eval_point(d, p_str, MPoint{lo, hi, mid_num, f.shift + 1}, g.prec, fn, PointPlan{true, true, false},
                                escalate_rel);
    if (mid.failed() || !mid.dM || !mid.d2M) {
      leaves.push_back({d, Real(p_str, g.prec.bits()), m_lo, m_hi, dmin, kmax, gap, depth, top, false});
      continue;
    }
    Derivs dm{*mid.dM, *mid.d2M};
    // right half first so the left half is processed first
    stack.push_back({mid_num, f.num_hi * 2, f.shift + 1, dm, f.b});
    stack.push_back({f.num_lo * 2, mid_num, f.shift + 1, f.a, dm});
  }
  std::sort(leaves.begin(), leaves.end(), [](const IntervalCert& x, const IntervalCert& y) { return x.m_lo < y.m_lo; });
  for (auto& l : leaves) out.push_back(std::move(l));
}

inline std::vector<IntervalCert> monotonicity_from(const GridSpec& g, const std::vector<CertRecord>& recs,
                                                   const QuantityFn& fn, int max_depth, int workers,
                                                   double escalate_rel) {
  size_t nM = g.m_values.size(), nP = g.p_offsets.size();
  if (nM < 2) return {};
  size_t per_row = nM - 1;
  size_t tasks = g.dims.size() * nP * per_row;
  auto parts = parallel_map<std::vector<IntervalCert>>(tasks, workers, [&](size_t t) {
    size_t i = t % per_row;
    size_t row = t / per_row;
    size_t pi = row % nP, di = row / nP;
    int d = g.dims[di];
    const CertRecord& a = recs[grid_index(g, di, pi, i)];
    const CertRecord& b = recs[grid_index(g, di, pi, i + 1)];
    std::vector<IntervalCert> out;
    std::string p_str = p_decimal(d, g.p_offsets[pi]);
    if (a.failed() || b.failed() || !a.dM || !a.d2M || !b.dM || !b.d2M) {
      mpfr_prec_t bits = g.prec.bits();
      out.push_back({d, Real(p_str, bits), Real(g.m_values[i], bits), Real(g.m_values[i + 1], bits),
                     Real::nan(bits), Real::nan(bits), Ball(Real::nan(bits)), 0, static_cast<int>(i), false});
      return out;
    }
    refine_interval(d, p_str, g.m_values[i], g.m_values[i + 1], static_cast<int>(i), Derivs{*a.dM, *a.d2M},
                    Derivs{*b.dM, *b.d2M}, g, fn, max_depth, escalate_rel, out);
    return out;
  });
  std::vector<IntervalCert> all;
  for (auto& p : parts)
    for (auto& c : p) all.push_back(std::move(c));
  return all;
}

inline Ball half_spacing_correction(const Real& lp, const Real& delta_p) {
  return Ball(lp) * Ball(delta_p / 2);
}

}  // namespace detail

// Per-leaf monotonicity certificate of h over each grid interval.
inline std::vector<IntervalCert> run_subinterval_monotonicity(const GridSpec& grid, int max_depth = 8,
                                                              const CertOptions& opt = {}) {
  grid.validate({3, 4});
  QuantityFn fn = opt.quantity ? opt.quantity : detail::default_h();
  auto recs = detail::eval_grid(grid, fn, opt.workers, opt.escalate_rel,
                                [](size_t) { return detail::PointPlan{true, true, false}; });
  return detail::monotonicity_from(grid, recs, fn, max_depth, opt.workers, opt.escalate_rel);
}

inline CertReport run_residual_certificate(const GridSpec& grid, const CertOptions& opt = {}) {
  grid.validate({3, 4});
  QuantityFn fn = opt.quantity ? opt.quantity : detail::default_h();
  size_t nM = grid.m_values.size(), nP = grid.p_offsets.size();
  mpfr_prec_t bits = grid.prec.bits();

  CertReport rep;
  rep.kind = "residual";
  rep.grid = grid;
  rep.target = Real(0L, bits);
  rep.methodology_note = kMethodologyNote;
  rep.records = detail::eval_grid(grid, fn, opt.workers, opt.escalate_rel,
                                  [nM](size_t mi) { return detail::PointPlan{true, true, mi + 1 == nM}; });
  rep.monotonicity = detail::monotonicity_from(grid, rep.records, fn, opt.max_depth, opt.workers, opt.escalate_rel);

  for (const auto& r : rep.records)
    if (r.failed()) rep.failures.push_back("evaluation failed at " + detail::where(r) + ": " + r.flags.back());

  // h' > 0 at every grid M after the first
  for (size_t di = 0; di < grid.dims.size(); ++di)
    for (size_t pi = 0; pi < nP; ++pi)
      for (size_t mi = 1; mi < nM; ++mi) {
        const auto& r = rep.records[detail::grid_index(grid, di, pi, mi)];
        ++rep.sign_checks_total;
        if (!r.failed() && r.dM && r.dM->positive())
          ++rep.sign_checks_passed;
        else
          rep.failures.push_back("sign check dh/dM > 0 failed at " + detail::where(r));
      }

  // Per grid interval summary of the monotonicity leaves.
  std::map<std::tuple<int, std::string, int>, IntervalBound> summary;
  std::vector<std::tuple<int, std::string, int>> order;
  for (const auto& c : rep.monotonicity) {
    auto key = std::make_tuple(c.d, c.p.str(30), c.top);
    auto it = summary.find(key);
    if (it == summary.end()) {
      Real lo = Real(grid.m_values[c.top], bits), hi = Real(grid.m_values[c.top + 1], bits);
      summary.emplace(key, IntervalBound{c.d, c.p, lo, hi, c.gap, Ball(c.k_max), c.depth, c.pass});
      order.push_back(key);
      continue;
    }
    IntervalBound& ib = it->second;
    if (c.gap.mid() < ib.value.mid() || c.gap.mid().is_nan()) ib.value = c.gap;
    if (c.k_max > ib.lipschitz.mid()) ib.lipschitz = Ball(c.k_max);
    ib.depth = std::max(ib.depth, c.depth);
    ib.pass = ib.pass && c.pass;
  }
  for (const auto& k : order) {
    const auto& ib = summary.at(k);
    rep.interval_bounds.push_back(ib);
    if (!ib.pass)
      rep.failures.push_back("sub-interval monotonicity failed on d=" + std::to_string(ib.d) + " p=" + ib.p.str(8) +
                             " M in [" + ib.m_lo.str(8) + ", " + ib.m_hi.str(8) + "]");
  }

  // sup over M sits at the last grid M once h' > 0 is certified
  Real worst = Real::inf(bits, -1);
  Real lp(0L, bits);
  bool have = false;
  for (size_t di = 0; di < grid.dims.size(); ++di)
    for (size_t pi = 0; pi < nP; ++pi) {
      size_t idx = detail::grid_index(grid, di, pi, nM - 1);
      const auto& r = rep.records[idx];
      if (r.failed()) continue;
      Real up = r.value.upper();
      if (!have || up > worst) {
        worst = up;
        rep.worst_point = idx;
        have = true;
      }
      if (r.dp) {
        Real m = abs(*r.dp).upper();
        if (m > lp) lp = m;
      }
    }
  rep.L_p = Ball(lp);
  rep.delta_p = grid.delta_p();
  rep.p_correction = detail::half_spacing_correction(lp, rep.delta_p);
  if (!have) {
    rep.final_bound = Ball(Real::nan(bits));
    rep.failures.push_back("no evaluable point at the largest M");
    rep.pass = false;
    return rep;
  }
  rep.final_bound = Ball(worst) + rep.p_correction;
  rep.pass = rep.final_bound.upper() < 0L && rep.failures.empty();
  return rep;
}

inline CertReport run_rbound_certificate(const GridSpec& grid, const CertOptions& opt = {}) {
  grid.validate({2, 3, 4});
  QuantityFn fn = opt.quantity ? opt.quantity : detail::default_r();
  size_t nM = grid.m_values.size(), nP = grid.p_offsets.size();
  mpfr_prec_t bits = grid.prec.bits();

  CertReport rep;
  rep.kind = "rbound";
  rep.grid = grid;
  rep.target = Real(1L, bits);
  rep.methodology_note = kMethodologyNote;
  rep.records = detail::eval_grid(grid, fn, opt.workers, opt.escalate_rel,
                                  [](size_t) { return detail::PointPlan{true, true, true}; });

  Real worst = Real::inf(bits, -1);
  Real lp(0L, bits);
  bool have = false;
  for (size_t i = 0; i < rep.records.size(); ++i) {
    const auto& r = rep.records[i];
    if (r.failed()) {
      rep.failures.push_back("evaluation failed at " + detail::where(r) + ": " + r.flags.back());
      continue;
    }
    Real up = r.value.upper();
    if (!have || up > worst) {
      worst = up;
      rep.worst_point = i;
      have = true;
    }
    if (r.dp) {
      Real m = abs(*r.dp).upper();
      if (m > lp) lp = m;
    }
  }

  // R_upper(M_i) + L_local(i) (M_{i+1} - M_i)/2 on every row interval
  Real worst_interval = Real::inf(bits, -1);
  for (size_t di = 0; di < grid.dims.size(); ++di)
    for (size_t pi = 0; pi < nP; ++pi)
      for (size_t mi = 0; mi + 1 < nM; ++mi) {
        const auto& a = rep.records[detail::grid_index(grid, di, pi, mi)];
        const auto& b = rep.records[detail::grid_index(grid, di, pi, mi + 1)];
        IntervalBound ib{a.params.d, a.params.p, a.params.M, b.params.M, Ball(Real::nan(bits)), Ball(Real::nan(bits)),
                         0, false};
        if (!a.failed() && a.dM && a.d2M) {
          Ball width = Ball(b.params.M) - Ball(a.params.M);
          Ball L = Ball(abs(*a.dM).upper()) + Ball(abs(*a.d2M).upper()) * width;
          Ball bound = Ball(a.value.upper()) + L * width / Ball(Real(2L, bits));
          ib.value = bound;
          ib.lipschitz = L;
          ib.pass = bound.upper() < rep.target;
          if (bound.upper() > worst_interval) worst_interval = bound.upper();
        }
        rep.interval_bounds.push_back(ib);
      }
  if (worst_interval > worst) worst = worst_interval;

  rep.L_p = Ball(lp);
  rep.delta_p = grid.delta_p();
  rep.p_correction = detail::half_spacing_correction(lp, rep.delta_p);
  if (!have) {
    rep.final_bound = Ball(Real::nan(bits));
    rep.failures.push_back("no evaluable grid point");
    return rep;
  }
  rep.final_bound = Ball(worst) + rep.p_correction;
  rep.pass = rep.final_bound.upper() < rep.target && rep.failures.empty();
  return rep;
}

// Worst closure interval of an R-bound report (largest value upper end).
inline const IntervalBound* worst_interval(const CertReport& rep) {
  const IntervalBound* best = nullptr;
  for (const auto& ib : rep.interval_bounds) {
    if (ib.value.mid().is_nan()) continue;
    if (!best || ib.value.upper() > best->value.upper()) best = &ib;
  }
  return best;
}

// Gain-loss cross-check J - p/(d-1) I_L over a grid.
struct GainLossRecord {
  Params params;
  Ball J;
  Ball residual;
  Real rel;  // |residual| upper / J
};

struct GainLossReport {
  std::vector<GainLossRecord> records;
  Real max_rel;
  size_t worst = 0;
};

inline GainLossReport run_gain_loss_check(const GridSpec& grid, int workers = 0) {
  grid.validate({2, 3, 4});
  size_t nM = grid.m_values.size(), nP = grid.p_offsets.size();
  GainLossReport rep;
  rep.records = parallel_map<GainLossRecord>(grid.size(), workers, [&](size_t idx) {
    size_t mi = idx % nM, pi = (idx / nM) % nP, di = idx / (nM * nP);
    int d = grid.dims[di];
    Params P = Params::parse(d, p_decimal(d, grid.p_offsets[pi]), grid.m_values[mi], grid.prec);
    GainLoss g = gain_loss(P, grid.prec);
    Real rel = abs(g.residual).upper() / g.J.mid();
    return GainLossRecord{P, g.J, g.residual, rel};
  });
  rep.max_rel = Real(0L, grid.prec.bits());
  for (size_t i = 0; i < rep.records.size(); ++i)
    if (rep.records[i].rel > rep.max_rel) {
      rep.max_rel = rep.records[i].rel;
      rep.worst = i;
    }
  return rep;
}

}  // namespace kl0
