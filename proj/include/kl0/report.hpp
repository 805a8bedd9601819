#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "kl0/certify.hpp"

namespace kl0 {

enum class ReportFormat { json, csv, table };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "table" || s == "text-table") return ReportFormat::table;
  throw DomainError("unknown format '" + s + "' (json, csv, table)");
}

namespace io {

using json = nlohmann::ordered_json;

inline json ball_json(const Ball& b) { return json{{"mid", b.mid().str()}, {"rad", b.rad().str()}}; }
inline json opt_ball_json(const std::optional<Ball>& b) { return b ? ball_json(*b) : json(nullptr); }

inline Real real_of(const json& j, mpfr_prec_t bits) { return Real(j.get<std::string>(), bits); }
inline Ball ball_of(const json& j, mpfr_prec_t bits) {
  Real mid = real_of(j.at("mid"), bits), rad = real_of(j.at("rad"), bits);
  if (rad.is_nan()) rad = Real(0L, bits);
  return Ball(std::move(mid), std::move(rad));
}
inline std::optional<Ball> opt_ball_of(const json& j, mpfr_prec_t bits) {
  if (j.is_null()) return std::nullopt;
  return ball_of(j, bits);
}

inline json grid_json(const GridSpec& g) {
  return json{{"dims", g.dims}, {"p_offsets", g.p_offsets}, {"m_values", g.m_values}, {"digits", g.prec.digits}};
}
inline GridSpec grid_of(const json& j) {
  GridSpec g;
  g.dims = j.at("dims").get<std::vector<int>>();
  g.p_offsets = j.at("p_offsets").get<std::vector<std::string>>();
  g.m_values = j.at("m_values").get<std::vector<std::string>>();
  g.prec = Precision{j.at("digits").get<int>()};
  return g;
}

// Records may carry a higher precision after escalation.
inline mpfr_prec_t record_bits(int digits) { return Precision{digits}.bits(); }

inline json record_json(const CertRecord& r) {
  return json{{"d", r.params.d},       {"p", r.params.p.str()},     {"M", r.params.M.str()},
              {"digits", r.digits},    {"value", ball_json(r.value)}, {"dM", opt_ball_json(r.dM)},
              {"d2M", opt_ball_json(r.d2M)}, {"dp", opt_ball_json(r.dp)}, {"flags", r.flags}};
}
inline CertRecord record_of(const json& j) {
  int digits = j.at("digits").get<int>();
  mpfr_prec_t bits = record_bits(digits);
  CertRecord r;
  r.params = Params{j.at("d").get<int>(), real_of(j.at("p"), bits), real_of(j.at("M"), bits)};
  r.digits = digits;
  r.value = ball_of(j.at("value"), bits);
  r.dM = opt_ball_of(j.at("dM"), bits);
  r.d2M = opt_ball_of(j.at("d2M"), bits);
  r.dp = opt_ball_of(j.at("dp"), bits);
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

}  // namespace io

inline nlohmann::ordered_json report_to_json(const CertReport& rep) {
  using io::json;
  json j;
  j["kind"] = rep.kind;
  j["grid"] = io::grid_json(rep.grid);
  j["target"] = rep.target.str();
  json recs = json::array();
  for (const auto& r : rep.records) recs.push_back(io::record_json(r));
  j["records"] = recs;
  j["worst_point"] = rep.worst_point;
  json ibs = json::array();
  for (const auto& ib : rep.interval_bounds)
    ibs.push_back(json{{"d", ib.d},
                       {"p", ib.p.str()},
                       {"m_lo", ib.m_lo.str()},
                       {"m_hi", ib.m_hi.str()},
                       {"value", io::ball_json(ib.value)},
                       {"lipschitz", io::ball_json(ib.lipschitz)},
                       {"depth", ib.depth},
                       {"pass", ib.pass}});
  j["interval_bounds"] = ibs;
  json mono = json::array();
  for (const auto& c : rep.monotonicity)
    mono.push_back(json{{"d", c.d},
                        {"p", c.p.str()},
                        {"m_lo", c.m_lo.str()},
                        {"m_hi", c.m_hi.str()},
                        {"delta_min", c.delta_min.str()},
                        {"k_max", c.k_max.str()},
                        {"gap", io::ball_json(c.gap)},
                        {"depth", c.depth},
                        {"top", c.top},
                        {"pass", c.pass}});
  j["monotonicity"] = mono;
  j["sign_checks"] = json{{"total", rep.sign_checks_total}, {"passed", rep.sign_checks_passed}};
  j["L_p"] = io::ball_json(rep.L_p);
  j["delta_p"] = rep.delta_p.str();
  j["p_correction"] = io::ball_json(rep.p_correction);
  j["final_bound"] = io::ball_json(rep.final_bound);
  j["verdict"] = rep.pass ? "pass" : "fail";
  j["failures"] = rep.failures;
  j["methodology_note"] = rep.methodology_note;
  return j;
}

inline CertReport report_from_json(const nlohmann::ordered_json& j) {
  CertReport rep;
  rep.kind = j.at("kind").get<std::string>();
  rep.grid = io::grid_of(j.at("grid"));
  mpfr_prec_t bits = rep.grid.prec.bits();
  rep.target = io::real_of(j.at("target"), bits);
  for (const auto& r : j.at("records")) rep.records.push_back(io::record_of(r));
  rep.worst_point = j.at("worst_point").get<size_t>();
  for (const auto& ib : j.at("interval_bounds"))
    rep.interval_bounds.push_back(IntervalBound{ib.at("d").get<int>(), io::real_of(ib.at("p"), bits),
                                                io::real_of(ib.at("m_lo"), bits), io::real_of(ib.at("m_hi"), bits),
                                                io::ball_of(ib.at("value"), bits), io::ball_of(ib.at("lipschitz"), bits),
                                                ib.at("depth").get<int>(), ib.at("pass").get<bool>()});
  for (const auto& c : j.at("monotonicity"))
    rep.monotonicity.push_back(IntervalCert{c.at("d").get<int>(), io::real_of(c.at("p"), bits),
                                            io::real_of(c.at("m_lo"), bits), io::real_of(c.at("m_hi"), bits),
                                            io::real_of(c.at("delta_min"), bits), io::real_of(c.at("k_max"), bits),
                                            io::ball_of(c.at("gap"), bits), c.at("depth").get<int>(),
                                            c.at("top").get<int>(), c.at("pass").get<bool>()});
  rep.sign_checks_total = j.at("sign_checks").at("total").get<size_t>();
  rep.sign_checks_passed = j.at("sign_checks").at("passed").get<size_t>();
  rep.L_p = io::ball_of(j.at("L_p"), bits);
  rep.delta_p = io::real_of(j.at("delta_p"), bits);
  rep.p_correction = io::ball_of(j.at("p_correction"), bits);
  rep.final_bound = io::ball_of(j.at("final_bound"), bits);
  rep.pass = j.at("verdict").get<std::string>() == "pass";
  rep.failures = j.at("failures").get<std::vector<std::string>>();
  rep.methodology_note = j.at("methodology_note").get<std::string>();
  return rep;
}

inline CertReport parse_report(const std::string& text) { return report_from_json(nlohmann::ordered_json::parse(text)); }

inline const char* kCsvHeader = "kind,d,p,M,digits,value_mid,value_rad,value_upper,dM_mid,dM_rad,d2M_mid,d2M_rad,dp_mid,dp_rad,flags";
inline constexpr int kCsvColumns = 15;

namespace io {

inline std::string csv_ball(const std::optional<Ball>& b) { return b ? b->mid().str() + "," + b->rad().str() : ","; }

inline std::string pct(const Real& margin) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << margin.to_double() * 100 << "%";
  return os.str();
}

inline void table_rbound(std::ostream& os, const CertReport& rep) {
  os << "R-bound certificate, d in {";
  for (size_t i = 0; i < rep.grid.dims.size(); ++i) os << (i ? "," : "") << rep.grid.dims[i];
  os << "}, M in [" << rep.grid.m_values.front() << ", " << rep.grid.m_values.back() << "], " << rep.records.size()
     << " points, " << rep.grid.prec.digits << " digits\n\n";
  os << std::left << std::setw(4) << "d" << std::setw(10) << "worst p" << std::setw(10) << "worst M" << std::setw(12)
     << "R_upper" << "margin\n";
  for (int d : rep.grid.dims) {
    const CertRecord* w = nullptr;
    for (const auto& r : rep.records)
      if (r.params.d == d && !r.failed() && (!w || r.value.upper() > w->value.upper())) w = &r;
    if (!w) continue;
    Real up = w->value.upper();
    os << std::setw(4) << d << std::setw(10) << w->params.p.fixed(4) << std::setw(10) << w->params.M.fixed(4)
       << std::setw(12) << up.fixed(4) << pct(1 - up) << "\n";
  }
  if (const IntervalBound* ib = worst_interval(rep)) {
    const CertRecord* at = nullptr;
    for (const auto& r : rep.records)
      if (r.params.d == ib->d && r.params.p == ib->p && r.params.M == ib->m_lo) at = &r;
    os << "\nworst M-interval (d=" << ib->d << ", p=" << ib->p.fixed(4) << ", M in [" << ib->m_lo.fixed(4) << ", "
       << ib->m_hi.fixed(4) << "]): R_upper=" << (at ? at->value.upper().fixed(4) : std::string("?"))
       << ", L_local=" << ib->lipschitz.mid().fixed(4) << ", bound=" << ib->value.upper().fixed(4) << "\n";
  }
  os << "p-direction: L_p=" << rep.L_p.mid().fixed(4) << ", delta_p/2=" << (rep.delta_p / 2).fixed(4)
     << ", correction=" << rep.p_correction.upper().fixed(4) << "\n";
  os << "final bound: " << rep.final_bound.upper().fixed(6) << " (target < " << rep.target.fixed(0) << ")\n";
}

inline void table_residual(std::ostream& os, const CertReport& rep) {
  os << "Residual certificate, d in {";
  for (size_t i = 0; i < rep.grid.dims.size(); ++i) os << (i ? "," : "") << rep.grid.dims[i];
  os << "}, " << rep.records.size() << " points, " << rep.grid.prec.digits << " digits\n\n";
  os << std::left << std::setw(4) << "d" << std::setw(8) << "p" << std::setw(8) << "M" << std::setw(16) << "value"
     << std::setw(6) << "sign" << "dh/dM\n";
  for (const auto& r : rep.records) {
    os << std::setw(4) << r.params.d << std::setw(8) << r.params.p.fixed(3) << std::setw(8) << r.params.M.fixed(3);
    if (r.failed()) {
      os << "error\n";
      continue;
    }
    std::string sign = r.value.negative() ? "-" : r.value.positive() ? "+" : "?";
    os << std::setw(16) << r.value.mid().str(6) << std::setw(6) << sign << (r.dM ? r.dM->mid().str(4) : "") << "\n";
  }
  os << "\nsign checks: " << rep.sign_checks_passed << "/" << rep.sign_checks_total << "\n";
  size_t passed = 0;
  for (const auto& ib : rep.interval_bounds) passed += ib.pass ? 1 : 0;
  os << "sub-interval monotonicity: " << passed << "/" << rep.interval_bounds.size() << " intervals\n";
  if (!rep.records.empty()) {
    const auto& w = rep.records[rep.worst_point];
    os << "worst h_upper: " << w.value.upper().str(6) << " at (d=" << w.params.d << ", p=" << w.params.p.fixed(3)
       << ", M=" << w.params.M.fixed(3) << ")\n";
  }
  os << "p-correction: " << rep.p_correction.upper().str(6) << " (L_p=" << rep.L_p.mid().str(6) << ")\n";
  os << "final bound: " << rep.final_bound.upper().str(6) << " (target < " << rep.target.fixed(0) << ")\n";
}

}  // namespace io

inline void emit_report(std::ostream& os, const CertReport& rep, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::json:
      os << report_to_json(rep).dump(2) << "\n";
      break;
    case ReportFormat::csv: {
      os << kCsvHeader << "\n";
      for (const auto& r : rep.records) {
        std::string flags;
        for (size_t i = 0; i < r.flags.size(); ++i) {
          std::string f = r.flags[i];
          for (auto& ch : f)
            if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
          flags += (i ? ";" : "") + f;
        }
        os << rep.kind << "," << r.params.d << "," << r.params.p.str() << "," << r.params.M.str() << "," << r.digits
           << "," << r.value.mid().str() << "," << r.value.rad().str() << "," << r.value.upper().str() << ","
           << io::csv_ball(r.dM) << "," << io::csv_ball(r.d2M) << "," << io::csv_ball(r.dp) << "," << flags << "\n";
      }
      break;
    }
    case ReportFormat::table:
      if (rep.kind == "rbound")
        io::table_rbound(os, rep);
      else
        io::table_residual(os, rep);
      os << "verdict: " << (rep.pass ? "pass" : "fail") << "\n";
      for (const auto& f : rep.failures) os << "  failure: " << f << "\n";
      os << "\nnote: " << rep.methodology_note << "\n";
      break;
  }
  if (!os) throw Error("report write failed");
}

inline std::string emit_report(const CertReport& rep, ReportFormat fmt) {
  std::ostringstream os;
  emit_report(os, rep, fmt);
  return os.str();
}

}  // namespace kl0
