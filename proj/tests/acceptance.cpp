// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// a subset, e.g. `acceptance 3 7`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kl0/tables.hpp"
#include "oracles.hpp"

using namespace kl0;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::optional<double> budget_s;  // wall-clock limit, when the criterion states one
  std::function<Outcome()> run;
};

std::string fmt(double v, int sig = 6) {
  std::ostringstream os;
  os.precision(sig);
  os << v;
  return os.str();
}

bool within(double v, double target, double tol) { return std::fabs(v - target) <= tol; }

const int kWorkers = resolve_workers(0);

// ---- 1
Outcome triple_root() {
  Precision prec{50};
  mpfr_prec_t bits = prec.bits();
  Real worst(0L, bits);
  Real one(1L, bits);
  for (int i = 0; i < 40; ++i) {
    Real p = 2 + Real(4L * i + 1, bits) / 162;  // 40 values spread over (2, 6)
    auto [v0, v1, v2] = n_a_derivs_at_1(p);
    for (const Real& v : {v0, v1, v2, n_a(one, p), n_a_deriv(one, p, 1), n_a_deriv(one, p, 2)})
      worst = max(worst, abs(v));
  }
  Real bound = Real::pow10(-40, bits);
  return {worst < bound, "max |N_A^(k)(1,p)|, k<=2, over 40 p = " + worst.str(3) + " (need < 1e-40)"};
}

// ---- 2
Outcome dual_forms() {
  Precision prec{50};
  mpfr_prec_t bits = prec.bits();
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<int> ud(2, 4);
  std::uniform_real_distribution<double> uo(0.01, 0.99), ulm(std::log(1.01), std::log(20.0));
  std::vector<Params> pts;
  for (int i = 0; i < 30; ++i) {
    int d = ud(gen);
    Real p = Real(d, bits) + Real(uo(gen), bits);
    Real M = exp(Real(ulm(gen), bits));
    pts.push_back(Params::checked(d, p, M));
  }
  auto rels = parallel_map<Real>(pts.size(), kWorkers, [&](size_t i) {
    const Params& P = pts[i];
    Real a = abs(i_l(P, prec, Form::x_form).mid() / i_l(P, prec, Form::y_form).mid() - 1);
    Real b = abs(i_r(P, prec, Form::x_form).mid() / i_r(P, prec, Form::y_form).mid() - 1);
    return max(a, b);
  });
  Real worst(0L, bits);
  for (const auto& r : rels) worst = max(worst, r);
  return {worst < Real::pow10(-25, bits), "max relative x/y-form gap over 30 points = " + worst.str(3) + " (need < 1e-25)"};
}

// ---- 3
Outcome worst_point() {
  Precision prec{50};
  Ball r = ratio_r(Params::parse(4, "4.95", "5.75", prec), prec);
  double v = r.mid().to_double();
  return {within(v, 0.7032, 5e-4), "R(5.75,4.95,4) = " + r.mid().str(12) + " (target 0.7032 +/- 5e-4)"};
}

// ---- 4
Outcome rbound_full() {
  CertOptions opt;
  opt.workers = kWorkers;
  CertReport rep = run_rbound_certificate(GridSpec::rbound_default(), opt);
  double fb = rep.final_bound.upper().to_double();
  double lp = rep.L_p.mid().to_double();
  const IntervalBound* ib = worst_interval(rep);
  double wi = ib ? ib->value.upper().to_double() : NAN;
  bool ok = fb >= 0.767 && fb <= 0.769 && within(lp, 0.5311, 1e-3) && within(wi, 0.7415, 1e-3) && rep.pass;
  return {ok, "final bound " + fmt(fb, 7) + " (need [0.767,0.769]), L_p " + fmt(lp, 6) + " (0.5311 +/- 1e-3), worst interval " +
                  fmt(wi, 6) + " (0.7415 +/- 1e-3), verdict " + (rep.pass ? "pass" : "fail") + ", " +
                  std::to_string(rep.records.size()) + " points"};
}

// ---- 5
Outcome residual_full() {
  CertOptions opt;
  opt.workers = kWorkers;
  CertReport rep = run_residual_certificate(GridSpec::residual_default(), opt);
  const auto& w = rep.records[rep.worst_point];
  double wh = w.value.upper().to_double();
  bool at = w.params.d == 3 && w.params.p == Real("3.1", w.params.p.prec()) && w.params.M == 20L;
  double pc = rep.p_correction.upper().to_double();
  double fb = rep.final_bound.upper().to_double();
  size_t mono_ok = 0;
  for (const auto& ib : rep.interval_bounds) mono_ok += ib.pass;
  bool ok = within(wh, -0.009395, 1e-5) && at && within(pc, 0.000101, 2e-5) && fb <= -0.009 &&
            rep.sign_checks_total == 120 && rep.sign_checks_passed == 120 && mono_ok == rep.interval_bounds.size();
  std::ostringstream os;
  os << "worst h " << fmt(wh, 7) << " at (" << w.params.d << "," << w.params.p.str(4) << "," << w.params.M.str(4)
     << ") (need -0.009395 +/- 1e-5 at (3,3.1,20)), p-correction " << fmt(pc, 5) << " (0.000101 +/- 2e-5), final "
     << fmt(fb, 7) << " (<= -0.009), sign checks " << rep.sign_checks_passed << "/" << rep.sign_checks_total
     << ", monotonicity " << mono_ok << "/" << rep.interval_bounds.size();
  return {ok, os.str()};
}

// ---- 6
Outcome phase1_table() {
  // printed value and its number of decimals, rows M = 1.1, 2, 5, 10, 20
  struct Cell {
    int d;
    const char* p;
    const char* M;
    double printed;
    int decimals;
  };
  const std::vector<Cell> cells = {
      {4, "4.9", "1.1", -501.1, 1}, {3, "3.5", "1.1", -452.2, 1}, {2, "2.5", "1.1", -1344.7, 1},
      {4, "4.9", "2", -5.58, 2},    {3, "3.5", "2", -4.73, 2},    {2, "2.5", "2", -7.41, 2},
      {4, "4.9", "5", -0.51, 2},    {3, "3.5", "5", -0.42, 2},    {2, "2.5", "5", -1.03, 2},
      {4, "4.9", "10", -0.12, 2},   {3, "3.5", "10", -0.09, 2},   {2, "2.5", "10", -0.22, 2},
      {4, "4.9", "20", -0.015, 3},  {3, "3.5", "20", -0.010, 3},  {2, "2.5", "20", -0.05, 2}};
  Precision prec{50};
  auto hs = parallel_map<Ball>(cells.size(), kWorkers, [&](size_t i) {
    return h_dlog2(Params::parse(cells[i].d, cells[i].p, cells[i].M, prec), prec);
  });
  int ok = 0;
  std::string misses;
  for (size_t i = 0; i < cells.size(); ++i) {
    double unit = std::pow(10.0, -cells[i].decimals);
    double v = hs[i].mid().to_double();
    if (std::fabs(v - cells[i].printed) <= unit * (1 + 1e-9))
      ++ok;
    else
      misses += std::string(misses.empty() ? "" : ", ") + "(" + std::to_string(cells[i].d) + "," + cells[i].p + "," +
                cells[i].M + "): " + fmt(v, 5) + " vs " + fmt(cells[i].printed, 5);
  }
  return {ok == 15, std::to_string(ok) + "/15 cells within one printed unit" + (misses.empty() ? "" : "; misses " + misses)};
}

// ---- 7
Outcome ir_ratio() {
  Precision prec{50};
  mpfr_prec_t bits = prec.bits();
  double v = ir_d2_ratio(Real("2.95", bits), Real("1.5", bits), prec).mid().to_double();
  bool ok = within(v, 0.7553, 1e-3);
  std::string d = "ratio(2.95,1.5) = " + fmt(v, 6) + " (0.7553 +/- 1e-3)";
  for (const char* ps : {"2.5", "2.95"}) {
    Real p(ps, bits);
    double lim = ir_d2_ratio(p, Real("1.0001", bits), prec).mid().to_double();
    double target = (p / (p + 1)).to_double();
    ok = ok && within(lim, target, 1e-3);
    d += "; M=1.0001, p=" + std::string(ps) + ": " + fmt(lim, 6) + " vs p/(p+1) = " + fmt(target, 6);
  }
  return {ok, d};
}

// ---- 8
Outcome gain_loss_identity() {
  GainLossReport rep = run_gain_loss_check(GridSpec::rbound_default(), kWorkers);
  mpfr_prec_t bits = Precision{50}.bits();
  size_t good = 0;
  for (const auto& r : rep.records) good += r.rel < Real::pow10(-25, bits);
  const auto& w = rep.records[rep.worst];
  return {good == rep.records.size(),
          std::to_string(good) + "/" + std::to_string(rep.records.size()) +
              " points with |J - p/(d-1) I_L|/J < 1e-25; worst " + rep.max_rel.str(4) + " at (" +
              std::to_string(w.params.d) + "," + w.params.p.str(4) + "," + w.params.M.str(4) + ")"};
}

// ---- 9
Outcome mcut_tables() {
  struct Row {
    int d;
    const char* p;
    double m_cut;
  };
  const std::vector<Row> rows = {{4, "4.1", 8.65}, {4, "4.2", 8.46},  {4, "4.3", 8.43},  {4, "4.4", 9.07},
                                 {4, "4.5", 9.42}, {4, "4.6", 9.34},  {4, "4.7", 9.30},  {4, "4.8", 9.83},
                                 {4, "4.9", 10.33}, {4, "4.99", 10.37}, {3, "3.1", 6.2}, {3, "3.2", 8.7},
                                 {3, "3.3", 11.9}, {3, "3.4", 15.8},  {3, "3.5", 19.95}};
  Precision prec = peak_precision();
  mpfr_prec_t bits = prec.bits();
  int ok = 0;
  std::string detail;
  for (const auto& r : rows) {
    ScanResult s = scan_mcut(r.d, Real(r.p, bits), Real(20L, bits), 400, prec, kWorkers);
    bool hit = s.m_cut && within(s.m_cut->to_double(), r.m_cut, 0.4);
    ok += hit;
    detail += std::string(detail.empty() ? "" : ", ") + "(" + std::to_string(r.d) + "," + r.p + ") " +
              (s.m_cut ? s.m_cut->fixed(2) : std::string(">20")) + " vs " + fmt(r.m_cut, 4);
  }
  ScanResult s38 = scan_mcut(3, Real("3.8", bits), Real(20L, bits), 400, prec, kWorkers);
  bool ok38 = s38.exceeds_limit();
  return {ok == static_cast<int>(rows.size()) && ok38,
          std::to_string(ok) + "/" + std::to_string(rows.size()) + " rows within 0.4; (3,3.8) " +
              (ok38 ? "exceeds-scan-limit" : "fails at " + s38.m_cut->fixed(2)) + "; " + detail};
}

// ---- 10
Outcome pcrit5() {
  const double peaks[5] = {0.7297, 0.7831, 0.8386, 0.8961, 0.9556};
  Precision prec = peak_precision();
  PcritResult r = locate_pcrit(5, Real("0.001", prec.bits()), prec, kWorkers);
  bool ok = r.verdict == "threshold";
  std::string d;
  for (int i = 0; i < 5; ++i) {
    double v = r.peak_table[i].peak.R_peak.to_double();
    ok = ok && within(v, peaks[i], 5e-4);
    d += fmt(v, 5) + "/" + fmt(peaks[i], 4) + " ";
  }
  double lo = r.lower.to_double(), hi = r.upper.to_double();
  bool meets = lo < 5.5750 && hi > 5.5718;
  ok = ok && meets;
  return {ok, "peaks " + d + "; bracket (" + fmt(lo, 6) + ", " + fmt(hi, 6) + ") vs (5.5718, 5.5750), widened (" +
                  fmt(r.widened_lower.to_double(), 6) + ", " + fmt(r.widened_upper.to_double(), 6) + ")"};
}

// ---- 11
Outcome supercritical() {
  Precision prec = peak_precision();
  mpfr_prec_t bits = prec.bits();
  auto probe = [&](int d) { return r_peak(d, Real(d, bits) + Real("0.001", bits), prec).R_peak.to_double(); };
  double r6 = probe(6), r7 = probe(7);
  bool ok = r6 >= 1.20 && r6 <= 1.25 && r7 >= 1.90 && r7 <= 1.96;
  return {ok, "R_peak(6.001, d=6) = " + fmt(r6, 5) + " (need [1.20,1.25]), R_peak(7.001, d=7) = " + fmt(r7, 5) +
                  " (need [1.90,1.96])"};
}

// ---- 12
Outcome exponents() {
  Precision prec{50};
  mpfr_prec_t bits = prec.bits();
  const std::vector<double> near{1e-4, 1e-5, 1e-6};
  const std::vector<double> far{1e3, 1e4, 1e5};
  bool ok = true;
  std::string d;
  auto check = [&](const std::string& what, double got, double want) {
    bool hit = std::fabs(got - want) <= 0.02 * std::fabs(want);
    ok = ok && hit;
    d += what + " " + fmt(got, 4) + (hit ? "" : "!") + "/" + fmt(want, 4) + " ";
  };
  for (auto [dd, ps] : std::vector<std::pair<int, const char*>>{{2, "2.5"}, {3, "3.5"}, {4, "4.5"}}) {
    Real p(ps, bits);
    double pd = p.to_double();
    std::vector<double> il, ir, rr, ilf, irf;
    for (double e : near) {
      Params P = Params::checked(dd, p, 1 + Real(e, bits));
      Ball L = i_l(P, prec), Rr = i_r(P, prec);
      il.push_back(L.mid().to_double());
      ir.push_back(Rr.mid().to_double());
      rr.push_back(ratio_r(P, prec).mid().to_double());
    }
    for (double m : far) {
      Params P = Params::checked(dd, p, Real(m, bits));
      ilf.push_back(i_l(P, prec).mid().to_double());
      irf.push_back(i_r(P, prec).mid().to_double());
    }
    std::string tag = "(" + std::to_string(dd) + "," + ps + ")";
    check(tag + " I_R@1", loglog_slope(near, ir), dd - 2);
    check(tag + " I_L@1", loglog_slope(near, il), pd + dd - 4);
    check(tag + " R@1", loglog_slope(near, rr), pd + 2 - dd);
    check(tag + " I_R@inf", loglog_slope(far, irf), dd - 2);
    check(tag + " I_L@inf", loglog_slope(far, ilf), dd - 2);
  }
  return {ok, "fitted/expected (! = outside 2%): " + d};
}

// ---- 13
Outcome large_m() {
  Precision prec{50};
  mpfr_prec_t bits = prec.bits();
  bool ok = true;
  std::string d;
  for (auto [dd, ps] : std::vector<std::pair<int, const char*>>{{3, "3.5"}, {4, "4.5"}}) {
    auto rows = largeM_check(dd, Real(ps, bits), {Real(50L, bits), Real(100L, bits), Real(200L, bits)}, prec);
    d += "(" + std::to_string(dd) + "," + ps + "):";
    for (size_t i = 0; i < rows.size(); ++i) {
      ok = ok && rows[i].h.negative();
      if (i > 0) ok = ok && !(rows[i].remainder > rows[i - 1].remainder);
      d += " M=" + rows[i].M.str(3) + " h=" + rows[i].h.mid().str(4) + " M^3|h+(d-2)/M^2|=" + rows[i].remainder.str(4);
    }
    d += "; ";
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all = {
      {1, "triple root of N_A at x=1", 1.0, triple_root},
      {2, "x-form and y-form integrals agree", 120.0, dual_forms},
      {3, "R at the worst grid point", 10.0, worst_point},
      {4, "full R-bound certificate", std::nullopt, rbound_full},
      {5, "residual certificate", std::nullopt, residual_full},
      {6, "phase-1 h table", 60.0, phase1_table},
      {7, "d=2 I_R derivative ratio", 10.0, ir_ratio},
      {8, "gain-loss identity on the R-bound grid", std::nullopt, gain_loss_identity},
      {9, "M_cut tables", std::nullopt, mcut_tables},
      {10, "d=5 peak table and p_crit bracket", std::nullopt, pcrit5},
      {11, "d>=6 supercritical probes", 120.0, supercritical},
      {12, "asymptotic exponents", 120.0, exponents},
      {13, "large-M remainder", 60.0, large_m},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  std::cout << "acceptance run, " << kWorkers << " worker(s)\n";
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = !c.budget_s || secs <= *c.budget_s;
    bool pass = o.pass && in_time;
    failed += !pass;
    char head[96];
    std::snprintf(head, sizeof head, "criterion %2d: %s  %-42s [%.1f s%s]", c.id, pass ? "PASS" : "FAIL", c.title, secs,
                  in_time ? "" : ", over budget");
    std::cout << head << "  " << o.detail << "\n" << std::flush;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
