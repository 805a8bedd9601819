#pragma once

#include "kl0/boundary.hpp"
#include "kl0/report.hpp"

namespace kl0::io {

inline json scan_json(int d, const Real& p, const ScanResult& s, int digits, int density) {
  json j{{"kind", "mcut"}, {"d", d}, {"p", p.str()}, {"digits", digits}, {"y_grid_density", density},
         {"m_limit", s.m_limit.str()}};
  if (s.m_cut) {
    j["m_cut"] = s.m_cut->str();
    j["failure_y"] = s.failure_y.str();
  } else {
    j["m_cut"] = "exceeds-scan-limit";
    j["failure_y"] = nullptr;
  }
  j["margin_min"] = s.margin_min.str();
  return j;
}

inline json peak_json(int d, const Real& p, const PeakResult& r) {
  return json{{"d", d},
              {"p", p.str()},
              {"R_peak", r.R_peak.str()},
              {"M_peak", r.M_peak.str()},
              {"tol", r.tol.str()},
              {"unimodal_ok", r.unimodal_ok},
              {"evaluations", r.evaluations}};
}

inline json pcrit_json(int d, const PcritResult& r, int digits) {
  json rows = json::array();
  for (const auto& row : r.peak_table) rows.push_back(peak_json(d, row.p, row.peak));
  return json{{"kind", "pcrit"},
              {"d", d},
              {"digits", digits},
              {"verdict", r.verdict},
              {"lower", r.lower.str()},
              {"upper", r.upper.str()},
              {"peak_at_lower", r.peak_at_lower.str()},
              {"peak_at_upper", r.peak_at_upper.str()},
              {"widened_lower", r.widened_lower.str()},
              {"widened_upper", r.widened_upper.str()},
              {"resolution", r.resolution.str()},
              {"tol", r.tol.str()},
              {"peak_table", rows}};
}

inline json largem_json(int d, const Real& p, const std::vector<LargeMRow>& rows, int digits) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"M", r.M.str()}, {"h", ball_json(r.h)}, {"asymptote", r.asymptote.str()},
                       {"remainder", r.remainder.str()}});
  return json{{"kind", "largem"}, {"d", d}, {"p", p.str()}, {"digits", digits}, {"rows", arr}};
}

inline json unimodal_json(int d, const Real& p, const UnimodalityDiag& u, int digits) {
  json pts = json::array(), slopes = json::array();
  for (size_t i = 0; i < u.M.size(); ++i) pts.push_back(json{{"M", u.M[i].str()}, {"log_R", u.log_r[i].str()}});
  for (size_t i = 0; i < u.slope.size(); ++i)
    slopes.push_back(json{{"at", u.slope_at[i].str()}, {"dlogR_dM", u.slope[i].str()}});
  json j{{"kind", "unimodal"}, {"d", d},        {"p", p.str()}, {"digits", digits}, {"points", pts},
         {"slopes", slopes},   {"strictly_decreasing", u.strictly_decreasing}};
  if (u.sign_change)
    j["sign_change"] = json::array({u.sign_change->first.str(), u.sign_change->second.str()});
  else
    j["sign_change"] = nullptr;
  return j;
}

}  // namespace kl0::io
