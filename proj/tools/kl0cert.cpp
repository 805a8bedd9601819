#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kl0/tables.hpp"

namespace {

using namespace kl0;

enum Exit { kPass = 0, kCertFail = 1, kDomain = 2, kNumeric = 3, kUsage = 64 };

int env_digits() {
  const char* s = std::getenv("KL0_DIGITS");
  if (!s || !*s) return 50;
  try {
    size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(std::string("KL0_DIGITS is not an integer: ") + s);
  }
}

struct Common {
  std::optional<int> digits;
  std::string format;
  std::string out;
  int parallel = 0;

  Precision prec(int fallback) const {
    Precision p{digits ? *digits : fallback};
    p.validate();
    return p;
  }
};

void add_common(CLI::App* app, Common& c, const std::string& default_format) {
  c.format = default_format;
  app->add_option("--digits", c.digits, "working precision in decimal digits (>= 15)");
  app->add_option("--format", c.format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
  app->add_option("--out", c.out, "write output here instead of stdout");
  app->add_option("--parallel", c.parallel, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

void write_out(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("cannot open " + c.out);
  f << text;
  if (!f) throw Error("write failed: " + c.out);
}

std::string ball_text(const Ball& b) { return b.mid().str() + " ± " + b.rad().str(3) + "\n"; }

// ---- eval

struct EvalArgs {
  Common c;
  std::string quantity;
  int d = 0;
  std::string p, M;
  std::string form = "y";
};

int run_eval(const EvalArgs& a) {
  if (a.c.format == "csv") throw DomainError("eval supports json or table output");
  Precision prec = a.c.prec(env_digits());
  Form form = a.form == "x" ? Form::x_form : Form::y_form;
  Ball value;
  std::optional<Ball> extra;
  int d = a.d;
  if (a.quantity == "ir-d2-ratio") {
    if (d != 0 && d != 2) throw DomainError("ir-d2-ratio is the d = 2 quantity");
    d = 2;
    Params P = Params::parse(2, a.p, a.M, prec);
    value = ir_d2_ratio(P.p, P.M, prec);
  } else {
    Params P = Params::parse(d, a.p, a.M, prec);
    if (a.quantity == "R") {
      value = ratio_r(P, prec);
    } else if (a.quantity == "IL") {
      value = i_l(P, prec, form);
    } else if (a.quantity == "IR") {
      value = i_r(P, prec, form);
    } else if (a.quantity == "h") {
      if (d > 4) throw DomainError("h is defined for d in {2,3,4}");
      value = h_dlog2(P, prec);
    } else {
      GainLoss g = gain_loss(P, prec);
      value = g.residual;
      extra = g.J;
    }
  }
  if (a.c.format == "json") {
    io::json j{{"quantity", a.quantity}, {"d", d}, {"p", a.p}, {"M", a.M}, {"digits", prec.digits},
               {"value", io::ball_json(value)}};
    if (extra) j["J"] = io::ball_json(*extra);
    write_out(a.c, j.dump(2) + "\n");
  } else {
    write_out(a.c, ball_text(value));
  }
  return kPass;
}

// ---- cert

struct CertArgs {
  Common c;
  std::string kind;
  std::vector<int> dims;
  std::vector<std::string> p_offsets, m_values;
  int max_depth = 8;
};

int run_cert(const CertArgs& a) {
  GridSpec g = a.kind == "rbound" ? GridSpec::rbound_default() : GridSpec::residual_default();
  if (!a.dims.empty()) g.dims = a.dims;
  if (!a.p_offsets.empty()) g.p_offsets = a.p_offsets;
  if (!a.m_values.empty()) g.m_values = a.m_values;
  g.prec = a.c.prec(env_digits());
  CertOptions opt;
  opt.workers = a.c.parallel;
  opt.max_depth = a.max_depth;
  CertReport rep = a.kind == "rbound" ? run_rbound_certificate(g, opt) : run_residual_certificate(g, opt);
  write_out(a.c, emit_report(rep, parse_format(a.c.format)));
  for (const auto& r : rep.records)
    if (r.failed()) {
      std::cerr << "evaluation failed at d=" << r.params.d << " p=" << r.params.p.str(10) << " M=" << r.params.M.str(10)
                << "\n";
      return kNumeric;
    }
  return rep.pass ? kPass : kCertFail;
}

// ---- scan

struct ScanArgs {
  Common c;
  std::string kind;
  int d = 0;
  std::string p;
  std::string m_limit = "20";
  int density = 400;
  std::string resolution = "0.001";
  std::string tolerance = "0.05";
  std::string m_lo = "1.5", m_hi = "30";
  std::vector<std::string> m_values;
};

std::vector<Real> reals(const std::vector<std::string>& v, mpfr_prec_t bits) {
  std::vector<Real> out;
  for (const auto& s : v) out.emplace_back(s, bits);
  return out;
}

int run_scan(ScanArgs a) {
  if (a.c.format == "csv") throw DomainError("scan supports json or table output");
  bool table = a.c.format == "table";
  int code = kPass;
  io::json j;
  std::ostringstream t;
  auto need_p = [&] {
    if (a.p.empty()) throw DomainError("--p is required for scan " + a.kind);
  };
  if (a.kind == "mcut") {
    need_p();
    Precision prec = a.c.prec(peak_precision().digits);
    mpfr_prec_t bits = prec.bits();
    Real p(a.p, bits);
    if (!(p > a.d) || !(p < a.d + 1)) throw DomainError("p must lie in (d, d+1)");
    ScanResult s = scan_mcut(a.d, p, Real(a.m_limit, bits), a.density, prec, a.c.parallel);
    j = io::scan_json(a.d, p, s, prec.digits, a.density);
    if (s.m_cut)
      t << "M_cut(" << a.d << ", " << a.p << ") ~ " << s.m_cut->fixed(2) << ", failure y ~ " << s.failure_y.fixed(2);
    else
      t << "M_cut(" << a.d << ", " << a.p << ") exceeds-scan-limit (" << a.m_limit << ")";
    t << ", min margin " << s.margin_min.str(4) << "\n";
  } else if (a.kind == "rpeak") {
    need_p();
    Precision prec = a.c.prec(peak_precision().digits);
    mpfr_prec_t bits = prec.bits();
    Real p(a.p, bits);
    if (!(p > a.d) || !(p < a.d + 1)) throw DomainError("p must lie in (d, d+1)");
    PeakResult r = r_peak(a.d, p, Real(a.m_lo, bits), Real(a.m_hi, bits), Real(a.tolerance, bits), prec);
    j = io::peak_json(a.d, p, r);
    j["kind"] = "rpeak";
    t << "R_peak(" << a.d << ", " << a.p << ") = " << r.R_peak.fixed(4) << " at M ~ " << r.M_peak.fixed(2)
      << " (tol " << a.tolerance << ")" << (r.unimodal_ok ? "" : " [three-point check failed]") << "\n";
    if (!r.unimodal_ok) code = kCertFail;
  } else if (a.kind == "pcrit") {
    Precision prec = a.c.prec(peak_precision().digits);
    mpfr_prec_t bits = prec.bits();
    PcritResult r = locate_pcrit(a.d, Real(a.resolution, bits), prec, a.c.parallel);
    j = io::pcrit_json(a.d, r, prec.digits);
    t << "p_crit(" << a.d << "): " << r.verdict << ", bracket (" << r.lower.fixed(4) << ", " << r.upper.fixed(4)
      << "), widened (" << r.widened_lower.fixed(4) << ", " << r.widened_upper.fixed(4) << ")\n";
  } else if (a.kind == "largem") {
    need_p();
    Precision prec = a.c.prec(env_digits());
    if (a.m_values.empty()) a.m_values = {"50", "100", "200"};
    Real p(a.p, prec.bits());
    auto rows = largeM_check(a.d, p, reals(a.m_values, prec.bits()), prec);
    j = io::largem_json(a.d, p, rows, prec.digits);
    for (const auto& r : rows) {
      t << "M=" << r.M.str(6) << "  h=" << r.h.mid().str(8) << "  asymptote=" << r.asymptote.str(6)
        << "  M^3|h+(d-2)/M^2|=" << r.remainder.str(6) << "\n";
      if (!r.h.negative()) code = kCertFail;
    }
  } else {
    need_p();
    Precision prec = a.c.prec(peak_precision().digits);
    if (a.m_values.empty()) a.m_values = {"1.5", "2", "3", "4", "5", "5.75", "6.5", "8", "10", "15", "20"};
    Real p(a.p, prec.bits());
    if (!(p > a.d) || !(p < a.d + 1)) throw DomainError("p must lie in (d, d+1)");
    auto u = unimodality_diag(a.d, p, reals(a.m_values, prec.bits()), prec, a.c.parallel);
    j = io::unimodal_json(a.d, p, u, prec.digits);
    for (size_t i = 0; i < u.slope.size(); ++i)
      t << "M~" << u.slope_at[i].str(6) << "  dlogR/dM=" << u.slope[i].str(6) << "\n";
    t << "strictly decreasing: " << (u.strictly_decreasing ? "yes" : "no");
    if (u.sign_change) t << ", sign change in (" << u.sign_change->first.str(4) << ", " << u.sign_change->second.str(4) << ")";
    t << "\n";
    if (!u.strictly_decreasing) code = kCertFail;
  }
  write_out(a.c, table ? t.str() : j.dump(2) + "\n");
  return code;
}

// ---- tables

struct TablesArgs {
  Common c;
  std::string which;
  std::string out_dir = ".";
  std::string resolution = "0.001";
};

int run_tables(const TablesArgs& a) {
  TableOut out;
  if (a.which == "appendix-b-phase1") {
    out = table_phase1(a.c.prec(env_digits()), a.c.parallel);
  } else if (a.which == "appendix-b-rbound") {
    out = table_rbound(a.c.prec(env_digits()), a.c.parallel);
  } else if (a.which == "mcut-d3" || a.which == "mcut-d4") {
    out = table_mcut(a.which.back() - '0', a.c.prec(peak_precision().digits), a.c.parallel);
  } else {
    Precision prec = a.c.prec(peak_precision().digits);
    out = table_pcrit5(prec, Real(a.resolution, prec.bits()), a.c.parallel);
  }
  std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  auto put = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw Error("write failed: " + path.string());
  };
  put(dir / (a.which + ".txt"), out.text);
  put(dir / (a.which + ".json"), out.json.dump(2) + "\n");
  std::cout << out.text;
  return out.pass ? kPass : kCertFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiprecision certificates for the log-concavity ratio R(M,p,d)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "kl0cert 1.0");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate one quantity as a ball");
  eval->add_option("quantity", ev.quantity, "R, IL, IR, h, J-residual or ir-d2-ratio")
      ->required()
      ->check(CLI::IsMember({"R", "IL", "IR", "h", "J-residual", "ir-d2-ratio"}));
  eval->add_option("--d", ev.d, "dimension");
  eval->add_option("--p", ev.p, "exponent p (decimal)")->required();
  eval->add_option("--M", ev.M, "M > 1 (decimal)")->required();
  eval->add_option("--form", ev.form, "integral form for IL/IR: x or y")->check(CLI::IsMember({"x", "y"}));
  add_common(eval, ev.c, "table");

  CertArgs ce;
  auto* cert = app.add_subcommand("cert", "run a grid certificate");
  cert->add_option("kind", ce.kind, "residual or rbound")->required()->check(CLI::IsMember({"residual", "rbound"}));
  cert->add_option("--dims", ce.dims, "comma-separated dimensions")->delimiter(',');
  cert->add_option("--p-offsets", ce.p_offsets, "comma-separated offsets p - d")->delimiter(',');
  cert->add_option("--m-values", ce.m_values, "comma-separated increasing M values")->delimiter(',');
  cert->add_option("--max-depth", ce.max_depth, "bisection depth for interval closure")->check(CLI::Range(0, 20));
  add_common(cert, ce.c, "table");

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan", "boundary scans");
  scan->add_option("kind", sc.kind, "mcut, pcrit, rpeak, largem or unimodal")
      ->required()
      ->check(CLI::IsMember({"mcut", "pcrit", "rpeak", "largem", "unimodal"}));
  scan->add_option("--d", sc.d, "dimension")->required();
  scan->add_option("--p", sc.p, "exponent p");
  scan->add_option("--m-limit", sc.m_limit, "M_cut scan limit");
  scan->add_option("--density", sc.density, "y points per M step");
  scan->add_option("--resolution", sc.resolution, "p bisection resolution");
  scan->add_option("--tolerance", sc.tolerance, "golden-section tolerance in M");
  scan->add_option("--m-lo", sc.m_lo, "peak search lower M");
  scan->add_option("--m-hi", sc.m_hi, "peak search upper M");
  scan->add_option("--m-values", sc.m_values, "comma-separated M values")->delimiter(',');
  add_common(scan, sc.c, "json");

  TablesArgs ta;
  auto* tables = app.add_subcommand("tables", "regenerate a printed table with a JSON twin");
  tables->add_option("which", ta.which, "table name")->required()->check(CLI::IsMember(table_names()));
  tables->add_option("--out-dir", ta.out_dir, "directory for <which>.txt and <which>.json");
  tables->add_option("--resolution", ta.resolution, "p bisection resolution (pcrit5-peaks)");
  add_common(tables, ta.c, "table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*eval) return run_eval(ev);
    if (*cert) return run_cert(ce);
    if (*scan) return run_scan(sc);
    return run_tables(ta);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
}
