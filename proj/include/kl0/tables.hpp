#pragma once

#include <array>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "kl0/boundary_report.hpp"

namespace kl0 {

struct TableOut {
  std::string text;
  io::json json;
  bool pass = true;
};

inline const std::vector<std::string>& table_names() {
  static const std::vector<std::string> names{"appendix-b-phase1", "appendix-b-rbound", "mcut-d3", "mcut-d4",
                                              "pcrit5-peaks"};
  return names;
}

// h = d^2 log I_L / dM^2 at the five printed M values for three (d, p).
inline TableOut table_phase1(const Precision& prec, int workers = 1) {
  static const std::array<std::pair<int, const char*>, 3> cols{{{4, "4.9"}, {3, "3.5"}, {2, "2.5"}}};
  static const std::array<const char*, 5> ms{"1.1", "2.0", "5.0", "10", "20"};
  static const int decimals[5][3] = {{1, 1, 1}, {2, 2, 2}, {2, 2, 2}, {2, 2, 2}, {3, 3, 2}};
  auto hs = parallel_map<Ball>(ms.size() * cols.size(), workers, [&](size_t i) {
    auto [d, p] = cols[i % cols.size()];
    return h_dlog2(Params::parse(d, p, ms[i / cols.size()], prec), prec);
  });
  std::ostringstream os;
  os << std::left << std::setw(6) << "M";
  for (auto [d, p] : cols) os << std::setw(22) << ("d=" + std::to_string(d) + ", p=" + p);
  os << "\n" << std::setw(6) << "";
  for (size_t c = 0; c < cols.size(); ++c) os << std::setw(14) << "value" << std::setw(8) << "sign";
  os << "\n";
  io::json rows = io::json::array();
  bool all_negative = true;
  for (size_t r = 0; r < ms.size(); ++r) {
    os << std::setw(6) << ms[r];
    for (size_t c = 0; c < cols.size(); ++c) {
      const Ball& h = hs[r * cols.size() + c];
      std::string sign = h.negative() ? "-" : h.positive() ? "+" : "?";
      all_negative = all_negative && h.negative();
      os << std::setw(14) << h.mid().fixed(decimals[r][c]) << std::setw(8) << sign;
      rows.push_back(io::json{{"d", cols[c].first},
                              {"p", cols[c].second},
                              {"M", ms[r]},
                              {"printed", h.mid().fixed(decimals[r][c])},
                              {"h", io::ball_json(h)},
                              {"sign", sign}});
    }
    os << "\n";
  }
  return {os.str(), io::json{{"table", "appendix-b-phase1"}, {"digits", prec.digits}, {"rows", rows}}, all_negative};
}

inline TableOut table_rbound(const Precision& prec, int workers = 0) {
  GridSpec g = GridSpec::rbound_default();
  g.prec = prec;
  CertOptions opt;
  opt.workers = workers;
  CertReport rep = run_rbound_certificate(g, opt);
  std::ostringstream os;
  io::table_rbound(os, rep);
  os << "verdict: " << (rep.pass ? "pass" : "fail") << "\n";
  return {os.str(), report_to_json(rep), rep.pass};
}

inline std::vector<std::string> mcut_rows(int d) {
  if (d == 4) return {"4.1", "4.2", "4.3", "4.4", "4.5", "4.6", "4.7", "4.8", "4.9", "4.99"};
  if (d == 3) return {"3.1", "3.2", "3.3", "3.4", "3.5"};
  throw DomainError("M_cut tables exist for d = 3 and d = 4");
}

inline TableOut table_mcut(int d, const Precision& prec, int workers = 1) {
  mpfr_prec_t bits = prec.bits();
  std::ostringstream os;
  os << std::left << std::setw(8) << "p" << std::setw(22) << "M_cut" << "failure y\n";
  io::json rows = io::json::array();
  for (const auto& ps : mcut_rows(d)) {
    Real p(ps, bits);
    ScanResult s = scan_mcut(d, p, Real(20L, bits), 400, prec, workers);
    os << std::setw(8) << ps;
    if (s.m_cut)
      os << std::setw(22) << ("~ " + s.m_cut->fixed(2)) << "y ~ " << s.failure_y.fixed(2) << "\n";
    else
      os << std::setw(22) << "> 20 (scan limit)" << "-\n";
    rows.push_back(io::scan_json(d, p, s, prec.digits, 400));
  }
  std::string name = "mcut-d" + std::to_string(d);
  return {os.str(), io::json{{"table", name}, {"digits", prec.digits}, {"rows", rows}}, true};
}

inline TableOut table_pcrit5(const Precision& prec, const Real& resolution, int workers = 1) {
  PcritResult pc = locate_pcrit(5, resolution, prec, workers);
  std::ostringstream os;
  os << std::left << std::setw(8) << "p" << std::setw(10) << "R_peak" << std::setw(12) << "1-R_peak" << "M_peak\n";
  for (const auto& row : pc.peak_table) {
    Real margin = (1 - row.peak.R_peak) * 100;
    os << std::setw(8) << row.p.fixed(1) << std::setw(10) << row.peak.R_peak.fixed(4) << std::setw(12)
       << (margin.fixed(2) + "%") << row.peak.M_peak.fixed(1) << "\n";
  }
  os << "\np_crit(5): " << pc.verdict << ", bracket (" << pc.lower.fixed(4) << ", " << pc.upper.fixed(4)
     << "), widened (" << pc.widened_lower.fixed(4) << ", " << pc.widened_upper.fixed(4) << ")\n";
  io::json j = io::pcrit_json(5, pc, prec.digits);
  j["table"] = "pcrit5-peaks";
  return {os.str(), j, true};
}

}  // namespace kl0
