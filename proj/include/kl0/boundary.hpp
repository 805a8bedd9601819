#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kl0/integrals.hpp"
#include "kl0/kernel.hpp"
#include "kl0/parallel.hpp"

namespace kl0 {

inline Precision peak_precision() { return Precision{30}; }

// d/(M^2+y^2) - d^2 log F/dy^2; positive where the NSD condition holds.
inline Real nsd_margin(const Real& y, const Real& M, int d, const Real& p) {
  if (!(y > 1) || !(y < M)) throw DomainError("nsd_margin needs 1 < y < M");
  auto [l1, l2] = logf_derivs(y, p);
  return d / (square(M) + square(y)) - l2;
}

struct ScanResult {
  std::optional<Real> m_cut;  // empty: no failure up to the scan limit
  Real failure_y;             // y of the most negative margin at m_cut
  Real margin_min;            // over every scanned (y, M)
  Real m_limit;
  bool exceeds_limit() const { return !m_cut.has_value(); }
};

namespace detail {

// Log-spaced interior abscissae y_j = M^{j/(n+1)}, j = 1..n.
inline std::vector<Real> y_grid(const Real& M, int n) {
  std::vector<Real> ys;
  Real lm = log(M);
  for (int j = 1; j <= n; ++j) ys.push_back(exp(lm * j / (n + 1)));
  return ys;
}

struct MinMargin {
  Real margin;
  Real y;
};

inline MinMargin min_margin(const Real& M, int d, const Real& p, int n) {
  MinMargin best{Real::inf(M.prec()), Real(1L, M.prec())};
  for (const auto& y : y_grid(M, n)) {
    Real m = nsd_margin(y, M, d, p);
    if (m < best.margin) best = {m, y};
  }
  return best;
}

}  // namespace detail

// Sweep M = 1.1, 1.2, ... up to m_limit; bisect the first failing step.
inline ScanResult scan_mcut(int d, const Real& p_in, const Real& m_limit_in, int y_grid_density = 400,
                            const Precision& prec = peak_precision(), int workers = 1) {
  if (d < 2) throw DomainError("scan_mcut needs d >= 2");
  if (y_grid_density < 2) throw DomainError("y grid density must be at least 2");
  mpfr_prec_t bits = prec.bits();
  Real p = p_in.at(bits), m_limit = m_limit_in.at(bits);
  Real step("0.1", bits);
  std::vector<Real> ms;
  for (long k = 11;; ++k) {
    Real M = Real(k, bits) / 10;
    if (M > m_limit) break;
    ms.push_back(M);
  }
  auto mins = parallel_map<detail::MinMargin>(ms.size(), workers,
                                              [&](size_t i) { return detail::min_margin(ms[i], d, p, y_grid_density); });
  ScanResult res{std::nullopt, Real(0L, bits), Real::inf(bits), m_limit};
  size_t first = ms.size();
  for (size_t i = 0; i < ms.size(); ++i) {
    if (mins[i].margin < res.margin_min) res.margin_min = mins[i].margin;
    if (first == ms.size() && mins[i].margin < 0L) first = i;
  }
  if (first == ms.size()) return res;
  // bisect between the last passing step and the first failing one
  Real lo = first == 0 ? Real(1L, bits) + step / 2 : ms[first - 1];
  Real hi = ms[first];
  detail::MinMargin at_hi = mins[first];
  while (hi - lo > Real("0.005", bits)) {
    Real mid = (lo + hi) / 2;
    auto mm = detail::min_margin(mid, d, p, y_grid_density);
    if (mm.margin < 0L) {
      hi = mid;
      at_hi = mm;
    } else {
      lo = mid;
    }
  }
  res.m_cut = hi;
  res.failure_y = at_hi.y;
  return res;
}

struct PeakResult {
  Real R_peak;
  Real M_peak;
  Real tol;
  bool unimodal_ok = true;  // R(M_peak) >= R at both ends of the search range
  int evaluations = 0;
};

// Golden-section maximum of M -> R(M,p,d) on m_range.
inline PeakResult r_peak(int d, const Real& p_in, const Real& m_lo, const Real& m_hi, const Real& tol_in,
                         const Precision& prec = peak_precision()) {
  mpfr_prec_t bits = prec.bits();
  Real p = p_in.at(bits), tol = tol_in.at(bits);
  if (!(tol > 0L)) throw DomainError("r_peak tolerance must be positive");
  if (!(m_lo < m_hi) || !(m_lo > 1L)) throw DomainError("r_peak needs 1 < m_lo < m_hi");
  int evals = 0;
  auto R = [&](const Real& M) {
    ++evals;
    return ratio_r(Params::unchecked(d, p, M), prec).mid();
  };
  Real invphi = (sqrt(Real(5L, bits)) - 1) / 2;
  Real a = m_lo.at(bits), b = m_hi.at(bits);
  Real c = b - (b - a) * invphi, e = a + (b - a) * invphi;
  Real fc = R(c), fe = R(e);
  while (b - a > tol) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - (b - a) * invphi;
      fc = R(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + (b - a) * invphi;
      fe = R(e);
    }
  }
  PeakResult res;
  if (fc > fe) {
    res.R_peak = fc;
    res.M_peak = c;
  } else {
    res.R_peak = fe;
    res.M_peak = e;
  }
  Real f_lo = R(m_lo.at(bits)), f_hi = R(m_hi.at(bits));
  res.unimodal_ok = !(f_lo > res.R_peak) && !(f_hi > res.R_peak);
  res.tol = tol;
  res.evaluations = evals;
  return res;
}

inline PeakResult r_peak(int d, const Real& p, const Precision& prec = peak_precision()) {
  mpfr_prec_t bits = prec.bits();
  return r_peak(d, p, Real("1.5", bits), Real(30L, bits), Real("0.05", bits), prec);
}

struct PeakRow {
  Real p;
  PeakResult peak;
};

struct PcritResult {
  std::string verdict;  // "threshold", "supercritical-throughout", "no-threshold"
  Real lower, upper;    // raw bisection bracket
  Real widened_lower, widened_upper;
  Real peak_at_lower, peak_at_upper;
  std::vector<PeakRow> peak_table;
  Real resolution;
  Real tol;
};

// Bisection on p -> [r_peak(p) >= 1] over (d, d+1).
inline PcritResult locate_pcrit(int d, const Real& resolution_in, const Precision& prec = peak_precision(),
                                int workers = 1) {
  if (d < 5) throw DomainError("locate_pcrit is for d >= 5");
  mpfr_prec_t bits = prec.bits();
  Real res_step = resolution_in.at(bits);
  if (!(res_step > 0L)) throw DomainError("resolution must be positive");
  Real tol("0.05", bits);
  auto peak = [&](const Real& p) { return r_peak(d, p, Real("1.5", bits), Real(30L, bits), tol, prec); };

  PcritResult out;
  out.resolution = res_step;
  out.tol = tol;
  Real eps("0.001", bits);
  std::vector<Real> probes;
  for (int k = 1; k <= 5; ++k) probes.push_back(Real(d, bits) + Real(k, bits) / 10);
  probes.push_back(Real(d, bits) + eps);
  probes.push_back(Real(d + 1, bits) - eps);
  auto peaks = parallel_map<PeakResult>(probes.size(), workers, [&](size_t i) { return peak(probes[i]); });
  for (int k = 0; k < 5; ++k) out.peak_table.push_back({probes[k], peaks[k]});
  const PeakResult& first = peaks[5];
  const PeakResult& last = peaks[6];

  if (!(first.R_peak < 1L)) {
    out.verdict = "supercritical-throughout";
    out.lower = Real(d, bits);
    out.upper = probes[5];
    out.peak_at_lower = Real::nan(bits);
    out.peak_at_upper = first.R_peak;
    out.widened_lower = out.lower;
    out.widened_upper = out.upper;
    return out;
  }
  if (last.R_peak < 1L) {
    out.verdict = "no-threshold";
    out.lower = probes[6];
    out.upper = Real(d + 1, bits);
    out.peak_at_lower = last.R_peak;
    out.peak_at_upper = Real::nan(bits);
    out.widened_lower = out.lower;
    out.widened_upper = out.upper;
    return out;
  }
  out.verdict = "threshold";
  Real lo = probes[5], hi = probes[6];
  Real f_lo = first.R_peak, f_hi = last.R_peak;
  for (int k = 0; k < 5; ++k) {
    const Real& pk = probes[k];
    const Real& rk = peaks[k].R_peak;
    if (rk < 1L && pk > lo) {
      lo = pk;
      f_lo = rk;
    }
    if (!(rk < 1L) && pk < hi) {
      hi = pk;
      f_hi = rk;
    }
  }
  while (hi - lo > res_step) {
    Real mid = (lo + hi) / 2;
    Real f = peak(mid).R_peak;
    if (f < 1L) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
      f_hi = f;
    }
  }
  out.lower = lo;
  out.upper = hi;
  out.peak_at_lower = f_lo;
  out.peak_at_upper = f_hi;

  // Widening: half-step plus the golden-section uncertainty in R_peak
  // converted to p through the secant slope of the peak table.
  const PeakRow& r4 = out.peak_table[3];
  const PeakRow& r5 = out.peak_table[4];
  Real slope = (r5.peak.R_peak - r4.peak.R_peak) / (r5.p - r4.p);
  Real pmid = (lo + hi) / 2;
  PeakResult at_mid = peak(pmid);
  Real drop = abs(at_mid.R_peak - ratio_r(Params::unchecked(d, pmid, at_mid.M_peak + tol), prec).mid());
  Real drop2 = abs(at_mid.R_peak - ratio_r(Params::unchecked(d, pmid, at_mid.M_peak - tol), prec).mid());
  if (drop2 > drop) drop = drop2;
  Real half = (hi - lo) / 2 + drop / abs(slope);
  out.widened_lower = pmid - half;
  out.widened_upper = pmid + half;
  return out;
}

struct LargeMRow {
  Real M;
  Ball h;
  Real asymptote;  // -(d-2)/M^2
  Real remainder;  // M^3 |h + (d-2)/M^2|
};

inline std::vector<LargeMRow> largeM_check(int d, const Real& p, const std::vector<Real>& m_values,
                                           const Precision& prec = Precision{50}) {
  if (d != 3 && d != 4) throw DomainError("largeM_check needs d in {3,4}");
  mpfr_prec_t bits = prec.bits();
  std::vector<LargeMRow> rows;
  for (const auto& m_in : m_values) {
    Real M = m_in.at(bits);
    if (M < 20L) throw DomainError("largeM_check needs M >= 20");
    Ball h = h_dlog2(Params::checked(d, p.at(bits), M), prec);
    Real asym = -Real(static_cast<long>(d - 2), bits) / square(M);
    Real rem = pow(M, 3L) * abs(h.mid() - asym);
    rows.push_back({M, h, asym, rem});
  }
  return rows;
}

struct UnimodalityDiag {
  std::vector<Real> M;
  std::vector<Real> log_r;
  std::vector<Real> slope_at;  // midpoints of neighbouring M
  std::vector<Real> slope;     // finite-difference d log R / dM
  bool strictly_decreasing = true;
  std::optional<std::pair<Real, Real>> sign_change;  // bracket of the peak
};

inline UnimodalityDiag unimodality_diag(int d, const Real& p, const std::vector<Real>& m_grid,
                                        const Precision& prec = peak_precision(), int workers = 1) {
  if (m_grid.size() < 3) throw DomainError("unimodality_diag needs at least 3 M values");
  for (size_t i = 1; i < m_grid.size(); ++i)
    if (!(m_grid[i] > m_grid[i - 1])) throw DomainError("m_grid must be increasing");
  mpfr_prec_t bits = prec.bits();
  UnimodalityDiag out;
  for (const auto& m : m_grid) out.M.push_back(m.at(bits));
  out.log_r = parallel_map<Real>(out.M.size(), workers, [&](size_t i) {
    return log(ratio_r(Params::unchecked(d, p.at(bits), out.M[i]), prec).mid());
  });
  for (size_t i = 0; i + 1 < out.M.size(); ++i) {
    out.slope_at.push_back((out.M[i] + out.M[i + 1]) / 2);
    out.slope.push_back((out.log_r[i + 1] - out.log_r[i]) / (out.M[i + 1] - out.M[i]));
  }
  for (size_t i = 0; i + 1 < out.slope.size(); ++i) {
    if (!(out.slope[i + 1] < out.slope[i])) out.strictly_decreasing = false;
    if (!out.sign_change && out.slope[i] > 0L && !(out.slope[i + 1] > 0L))
      out.sign_change = std::make_pair(out.slope_at[i], out.slope_at[i + 1]);
  }
  return out;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace kl0
