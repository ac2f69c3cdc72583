#pragma once

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "sis/analysis.hpp"
#include "sis/chain.hpp"
#include "sis/montecarlo.hpp"

namespace sis {

// Keys keep insertion order so re-reading and re-dumping a document gives
// the same bytes.
using Json = nlohmann::ordered_json;

inline constexpr int kJsonIndent = 2;

/// Fixed-width table formatting: 6 significant digits.
inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_string(CertificatePath p) {
  switch (p) {
    case CertificatePath::M: return "M";
    case CertificatePath::MPrime: return "M'";
    case CertificatePath::MDoublePrime: return "M''";
  }
  return "?";
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json params_json(const EpidemicParams& prm) {
  return Json{{"beta", prm.beta}, {"delta", prm.delta}};
}

inline Json to_json(const ComparisonRow& r) {
  Json j;
  j["graph"] = r.graph;
  j["n"] = r.n;
  j["edges"] = r.edges;
  j["params"] = params_json(r.params);
  j["rho_m"] = r.rho_m;
  j["rho_m_prime"] = r.rho_m_prime;
  j["rho_m_double_prime"] = optional_json(r.rho_m_double_prime);
  j["horizon"] = r.horizon;
  j["sign_condition"] = r.sign_holds ? "holds_to_horizon" : "fails_at_t";
  j["sign_first_failure"] = optional_json(r.sign_first_failure);
  return j;
}

inline Json to_json(const ScanResult& s) {
  Json j;
  j["delta"] = s.delta;
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back(Json{{"beta", r.beta},
                        {"rho_m", r.rho_m},
                        {"rho_mp", r.rho_m_prime},
                        {"rho_mpp", optional_json(r.rho_m_double_prime)},
                        {"cond_holds", r.sign_holds}});
  }
  j["rows"] = rows;
  auto crossing = [](const std::optional<Crossing>& c) {
    if (!c) return Json(nullptr);
    return Json{{"beta_lo", c->beta_lo}, {"beta_hi", c->beta_hi}, {"beta", c->beta}};
  };
  j["crossing_m"] = crossing(s.m);
  j["crossing_mp"] = crossing(s.m_prime);
  j["crossing_mpp"] = crossing(s.m_double_prime);
  return j;
}

inline Json to_json(const DominanceReport& r) {
  auto clause = [](const ClauseResult& c) {
    return Json{{"checked", c.checked}, {"max_violation", c.max_violation}};
  };
  Json j;
  j["horizon"] = r.horizon;
  j["sign_condition_holds"] = r.sign_condition_holds;
  j["q_bound_propagates"] = r.q_bound_propagates;
  j["marginal"] = clause(r.marginal);
  j["pairwise_marginal"] = clause(r.pairwise_marginal);
  j["pair_lower"] = clause(r.pair_lower);
  j["q_form"] = clause(r.q_form);
  j["multi_step"] = clause(r.multi_step);
  j["union_bound"] = clause(r.union_bound);
  j["worst"] = r.worst();
  return j;
}

inline Json to_json(const MixingBound& m) {
  Json j;
  j["bound"] = optional_json(m.value);
  j["path"] = m.path ? Json(to_string(*m.path)) : Json(nullptr);
  Json c = Json::array();
  for (const auto& p : m.candidates) {
    c.push_back(Json{{"path", to_string(p.path)},
                     {"rho", p.rho},
                     {"applicable", p.applicable},
                     {"bound", p.applicable ? Json(p.value) : Json(nullptr)},
                     {"reason", p.reason}});
  }
  j["candidates"] = c;
  return j;
}

inline Json to_json(const McEstimate& e) {
  Json j;
  j["n_traj"] = e.n_traj;
  j["absorbed"] = e.absorbed;
  j["mean_fraction"] = e.mean_fraction;
  j["stderr"] = e.stderr_fraction;
  j["alive"] = e.alive;
  Json rec = Json::array();
  for (std::size_t r = 0; r < e.record_times.size(); ++r) {
    rec.push_back(Json{{"t", e.record_times[r]}, {"node_frequency", e.node_frequency[r]}});
  }
  j["records"] = rec;
  return j;
}

inline void write_json(std::ostream& out, const Json& j) { out << j.dump(kJsonIndent) << '\n'; }

/// CSV: beta,rho_m,rho_mp,rho_mpp,cond_holds (empty rho_mpp when not assembled).
inline void write_scan_csv(std::ostream& out, const ScanResult& s, bool table = false) {
  out << "beta,rho_m,rho_mp,rho_mpp,cond_holds\n";
  auto num = [&](double v) { return table ? fmt6(v) : fmt17(v); };
  for (const auto& r : s.rows) {
    out << num(r.beta) << ',' << num(r.rho_m) << ',' << num(r.rho_m_prime) << ','
        << (r.rho_m_double_prime ? num(*r.rho_m_double_prime) : std::string()) << ','
        << (r.sign_holds ? 1 : 0) << '\n';
  }
}

/// Comparison CSV: graph,n,delta,beta,rho_m,rho_mp,cond,rho_mpp.
inline void write_table_header(std::ostream& out) {
  out << "graph,n,delta,beta,rho_m,rho_mp,cond,rho_mpp\n";
}

inline void write_table_row(std::ostream& out, const ComparisonRow& r) {
  out << r.graph << ',' << r.n << ',' << fmt6(r.params.delta) << ',' << fmt6(r.params.beta) << ','
      << fmt6(r.rho_m) << ',' << fmt6(r.rho_m_prime) << ',' << (r.sign_holds ? '+' : '-') << ','
      << (r.rho_m_double_prime ? fmt6(*r.rho_m_double_prime) : std::string()) << '\n';
}

}  // namespace sis
