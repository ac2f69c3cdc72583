#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sis/bounds.hpp"
#include "sis/chain.hpp"
#include "sis/errors.hpp"
#include "sis/graph.hpp"
#include "sis/params.hpp"
#include "sis/spectral.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Bound propagation
// ---------------------------------------------------------------------------

/// Time series of a linear bound. `pair` holds p_E for M' (sign already
/// restored) and q_E for M''; it is empty for M.
struct BoundTrajectory {
  BoundKind kind = BoundKind::M;
  std::vector<Eigen::VectorXd> p;
  std::vector<Eigen::VectorXd> pair;
  bool valid = true;
};

struct PropagateOptions {
  // For M'': compute the trajectory even when 1 - delta - beta < 0 and mark
  // it invalid instead of throwing.
  bool allow_invalid = false;
  // For M': precomputed sign-condition report; computed to the propagation
  // horizon when absent.
  std::optional<SignConditionReport> sign_report;
};

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

/// Iterates the bound map T times from the initial moments. M' acts on
/// (p, -p_E); M'' on (p, q_E).
inline BoundTrajectory propagate(BoundKind kind, const Graph& g, const EpidemicParams& prm,
                                 const ExactMoments& initial, std::size_t T,
                                 const PropagateOptions& opt = {}) {
  const auto n = Eigen::Index(g.node_count());
  BoundTrajectory tr;
  tr.kind = kind;
  if (kind == BoundKind::MDoublePrime && !prm.q_bound_propagates()) {
    if (!opt.allow_invalid) {
      throw PropagationInvalid("M'' bound needs 1 - delta - beta >= 0");
    }
    tr.valid = false;
  }
  const BoundMatrix mat = build_bound(kind, g, prm);
  Eigen::VectorXd x(Eigen::Index(mat.dim()));
  x.head(n) = to_vector(initial.p);
  switch (kind) {
    case BoundKind::M: break;
    case BoundKind::MPrime: x.tail(x.size() - n) = -to_vector(initial.p_e); break;
    case BoundKind::MDoublePrime: x.tail(x.size() - n) = to_vector(initial.q_e); break;
  }
  if (kind == BoundKind::MPrime) {
    const auto rep = opt.sign_report ? *opt.sign_report
                                     : check_sign_condition(mat, std::max<std::size_t>(T, 1));
    tr.valid = rep.holds_to_horizon();
  }
  auto record = [&](const Eigen::VectorXd& s) {
    tr.p.push_back(s.head(n));
    if (kind == BoundKind::MPrime) tr.pair.push_back(-s.tail(s.size() - n));
    if (kind == BoundKind::MDoublePrime) tr.pair.push_back(s.tail(s.size() - n));
  };
  record(x);
  Eigen::VectorXd y(x.size());
  for (std::size_t t = 1; t <= T; ++t) {
    y.noalias() = mat.values() * x;
    x.swap(y);
    record(x);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Dominance against the exact chain
// ---------------------------------------------------------------------------

struct ClauseResult {
  double max_violation = 0.0;  // largest amount by which the bound is broken
  bool checked = false;

  void observe(double v) {
    checked = true;
    max_violation = std::max(max_violation, v);
  }
};

/// Largest violation of each bound over t <= T from the all-infected start.
/// One-step clauses compare the exact moments at t+1 against the bound
/// applied to the exact moments at t:
///   a  marginal bound p_i' <= (1-d)p_i + b sum_j p_j
///   b  pairwise marginal bound p_i' <= (1-d)p_i + b sum_j (p_j - p_ij), and
///      its right side never exceeds that of (a)
///   c  pairwise lower bound p_ij' >= (1-d)b(p_i + p_j) + (1-d)(1-d-2b)p_ij
///   d  q-form bounds on p_i' and q_ij'
/// Multi-step clause e checks exact p <= p_hat(M) always, exact p <= p_hat(M')
/// <= p_hat(M) when the sign condition holds to T, and exact (p, q) <=
/// (p_hat, q_hat)(M'') when 1 - d - b >= 0. The union clause checks
/// tv <= 1^T p <= 1^T p_hat(M).
struct DominanceReport {
  std::size_t horizon = 0;
  bool sign_condition_holds = false;
  bool q_bound_propagates = false;
  ClauseResult marginal;          // a
  ClauseResult pairwise_marginal; // b
  ClauseResult pair_lower;        // c
  ClauseResult q_form;            // d
  ClauseResult multi_step;        // e
  ClauseResult union_bound;

  double worst() const {
    return std::max({marginal.max_violation, pairwise_marginal.max_violation,
                     pair_lower.max_violation, q_form.max_violation, multi_step.max_violation,
                     union_bound.max_violation});
  }
  bool passed(double tol) const { return worst() <= tol; }
};

inline DominanceReport dominance_check(const Graph& g, const EpidemicParams& prm, std::size_t T,
                                       std::size_t cap = kDefaultStateCap) {
  const double b = prm.beta, d = prm.delta;
  const std::size_t n = g.node_count(), m = g.edge_count();
  DominanceReport rep;
  rep.horizon = T;

  std::vector<ExactMoments> exact;
  std::vector<double> tv;
  auto dist = ChainDistribution::all_infected(n, cap);
  exact.push_back(exact_moments(dist, g));
  tv.push_back(tv_from_stationary(dist));
  for (std::size_t t = 1; t <= T; ++t) {
    dist = transition_apply(g, prm, dist);
    exact.push_back(exact_moments(dist, g));
    tv.push_back(tv_from_stationary(dist));
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto& now = exact[t];
    const auto& nxt = exact[t + 1];
    for (std::size_t i = 0; i < n; ++i) {
      double sum_p = 0.0, sum_q = 0.0;
      for (std::size_t a : g.out_arcs(Node(i))) {
        const Arc arc = g.arc(a);
        const std::size_t e = a < m ? a : a - m;
        sum_p += now.p[arc.to];
        sum_q += now.p[arc.to] - now.p_e[e];
      }
      const double rhs3 = (1.0 - d) * now.p[i] + b * sum_p;
      const double rhs13 = (1.0 - d) * now.p[i] + b * sum_q;
      rep.marginal.observe(nxt.p[i] - rhs3);
      rep.pairwise_marginal.observe(std::max(nxt.p[i] - rhs13, rhs13 - rhs3));
      double sum_qdirect = 0.0;
      for (std::size_t a : g.out_arcs(Node(i))) sum_qdirect += now.q_e[a];
      rep.q_form.observe(nxt.p[i] - ((1.0 - d) * now.p[i] + b * sum_qdirect));
    }
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = g.edges()[k];
      const double rhs14 =
          (1.0 - d) * b * (now.p[e.u] + now.p[e.v]) + (1.0 - d) * (1.0 - d - 2.0 * b) * now.p_e[k];
      rep.pair_lower.observe(rhs14 - nxt.p_e[k]);
    }
    for (std::size_t a = 0; a < 2 * m; ++a) {
      const Arc arc = g.arc(a);
      const std::size_t rev = a < m ? a + m : a - m;
      double rest = 0.0;
      for (std::size_t s : g.out_arcs(arc.to))
        if (s != rev) rest += now.q_e[s];
      const double rhs21 = d * (1.0 - d) * now.p[arc.to] + (1.0 - d) * (1.0 - d - b) * now.q_e[a] +
                           b * d * now.q_e[rev] + b * (1.0 + d) * rest;
      rep.q_form.observe(nxt.q_e[a] - rhs21);
    }
  }

  const ExactMoments init = exact.front();
  const auto traj_m = propagate(BoundKind::M, g, prm, init, T);
  const auto traj_mp = propagate(BoundKind::MPrime, g, prm, init, T);
  rep.sign_condition_holds = traj_mp.valid;
  rep.q_bound_propagates = prm.q_bound_propagates();
  std::optional<BoundTrajectory> traj_mpp;
  if (rep.q_bound_propagates) traj_mpp = propagate(BoundKind::MDoublePrime, g, prm, init, T);

  for (std::size_t t = 0; t <= T; ++t) {
    const Eigen::VectorXd p = to_vector(exact[t].p);
    rep.multi_step.observe((p - traj_m.p[t]).maxCoeff());
    if (rep.sign_condition_holds) {
      rep.multi_step.observe((p - traj_mp.p[t]).maxCoeff());
      rep.multi_step.observe((traj_mp.p[t] - traj_m.p[t]).maxCoeff());
    }
    if (traj_mpp) {
      rep.multi_step.observe((p - traj_mpp->p[t]).maxCoeff());
      if (m > 0) rep.multi_step.observe((to_vector(exact[t].q_e) - traj_mpp->pair[t]).maxCoeff());
    }
    rep.union_bound.observe(tv[t] - p.sum());
    rep.union_bound.observe(p.sum() - traj_m.p[t].sum());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Radii comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string graph;
  std::size_t n = 0;
  std::size_t edges = 0;
  EpidemicParams params;
  double rho_m = 0.0;
  double rho_m_prime = 0.0;
  std::optional<double> rho_m_double_prime;  // absent only when M'' is too large
  std::size_t horizon = 0;
  bool sign_holds = false;
  std::optional<std::size_t> sign_first_failure;

  /// M'' is reported on rows where the sign condition fails.
  bool reports_m_double_prime() const { return !sign_holds; }
};

inline ComparisonRow table_row(const Graph& g, const EpidemicParams& prm,
                               std::size_t horizon = kDefaultSignHorizon,
                               std::string descriptor = {}, const SpectralOptions& opt = {}) {
  ComparisonRow row;
  row.graph = std::move(descriptor);
  row.n = g.node_count();
  row.edges = g.edge_count();
  row.params = prm;
  row.horizon = horizon;
  row.rho_m = spectral_radius(build_m(g, prm), opt).rho;
  const auto mp = build_m_prime(g, prm);
  row.rho_m_prime = spectral_radius(mp, opt).rho;
  const auto rep = check_sign_condition(mp, horizon);
  row.sign_holds = rep.holds_to_horizon();
  row.sign_first_failure = rep.first_failure;
  try {
    row.rho_m_double_prime = spectral_radius(build_m_double_prime(g, prm), opt).rho;
  } catch (const SizeError&) {
    row.rho_m_double_prime.reset();
  }
  return row;
}

// ---------------------------------------------------------------------------
// Mixing-time certificates
// ---------------------------------------------------------------------------

enum class CertificatePath { M, MPrime, MDoublePrime };

struct PathBound {
  CertificatePath path = CertificatePath::M;
  double rho = 0.0;
  bool applicable = false;
  double value = 0.0;  // certified bound on t_mix when applicable
  std::string reason;  // why not applicable
};

struct MixingBound {
  std::optional<double> value;  // best certified bound; nullopt = no certificate
  std::optional<CertificatePath> path;
  std::vector<PathBound> candidates;
};

struct MixingBoundOptions {
  std::size_t sign_horizon = kDefaultSignHorizon;
  SpectralOptions spectral;
};

/// Certified t_mix(eps) bounds:
///   M path   rho(M) < 1: 1^T M^t 1 <= n rho^t, so t_mix <= log(n/eps) / -log rho.
///   M' path  rho(M') < 1 and the sign condition to the horizon: the Lyapunov
///            certificate gives [1 0] M'^t (1, -1) <= C eta^t.
///   M'' path rho(M'') < 1 and 1 - d - b >= 0: [1 0] M''^t (1, 0) <= C eta^t.
/// A path with constant C and rate eta yields log(C/eps) / -log eta.
inline MixingBound mixing_bound(const Graph& g, const EpidemicParams& prm, double epsilon,
                                const MixingBoundOptions& opt = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  const auto n = Eigen::Index(g.node_count());
  MixingBound out;
  auto from_rate = [&](double c, double eta) {
    return std::max(0.0, std::log(c / epsilon) / -std::log(eta));
  };

  PathBound pm;
  pm.path = CertificatePath::M;
  pm.rho = spectral_radius(build_m(g, prm), opt.spectral).rho;
  if (pm.rho < 1.0) {
    pm.applicable = true;
    pm.value = pm.rho > 0.0 ? from_rate(double(n), pm.rho) : 1.0;
  } else {
    pm.reason = "rho(M) >= 1";
  }
  out.candidates.push_back(pm);

  PathBound pp;
  pp.path = CertificatePath::MPrime;
  const auto mp = build_m_prime(g, prm);
  pp.rho = spectral_radius(mp, opt.spectral).rho;
  if (!(pp.rho < 1.0)) {
    pp.reason = "rho(M') >= 1";
  } else if (!check_sign_condition(mp, opt.sign_horizon).holds_to_horizon()) {
    pp.reason = "sign condition fails";
  } else if (mp.dim() > kLyapunovMaxDim) {
    pp.reason = "dimension above the Lyapunov solver limit";
  } else {
    try {
      const auto cert = lyapunov_certificate(mp);
      Eigen::VectorXd u = Eigen::VectorXd::Zero(Eigen::Index(mp.dim()));
      u.head(n).setOnes();
      Eigen::VectorXd v = -Eigen::VectorXd::Ones(Eigen::Index(mp.dim()));
      v.head(n).setOnes();
      pp.applicable = true;
      pp.value = from_rate(cert.constant_for(u, v), cert.eta);
    } catch (const NoCertificate& e) {
      pp.reason = e.what();
    }
  }
  out.candidates.push_back(pp);

  PathBound pq;
  pq.path = CertificatePath::MDoublePrime;
  if (!prm.q_bound_propagates()) {
    pq.reason = "1 - delta - beta < 0";
  } else {
    try {
      const auto mpp = build_m_double_prime(g, prm);
      pq.rho = spectral_radius(mpp, opt.spectral).rho;
      if (!(pq.rho < 1.0)) {
        pq.reason = "rho(M'') >= 1";
      } else if (mpp.dim() > kLyapunovMaxDim) {
        pq.reason = "dimension above the Lyapunov solver limit";
      } else {
        const auto cert = lyapunov_certificate(mpp);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(Eigen::Index(mpp.dim()));
        u.head(n).setOnes();
        pq.applicable = true;
        pq.value = from_rate(cert.constant_for(u, u), cert.eta);
      }
    } catch (const SizeError&) {
      pq.reason = "M'' too large to assemble";
    } catch (const NoCertificate& e) {
      pq.reason = e.what();
    }
  }
  out.candidates.push_back(pq);

  for (const auto& c : out.candidates) {
    if (c.applicable && (!out.value || c.value < *out.value)) {
      out.value = c.value;
      out.path = c.path;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold scans
// ---------------------------------------------------------------------------

struct ScanRow {
  double beta = 0.0;
  double rho_m = 0.0;
  double rho_m_prime = 0.0;
  std::optional<double> rho_m_double_prime;
  bool sign_holds = false;
};

/// Grid interval where a radius goes from below 1 to at least 1, with the
/// crossing located by linear interpolation of the radius.
struct Crossing {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  double beta = 0.0;
};

struct ScanResult {
  double delta = 0.0;
  std::vector<ScanRow> rows;
  std::optional<Crossing> m;
  std::optional<Crossing> m_prime;
  std::optional<Crossing> m_double_prime;
};

inline std::optional<Crossing> find_crossing(const std::vector<double>& betas,
                                             const std::vector<double>& rho) {
  for (std::size_t k = 0; k + 1 < betas.size(); ++k) {
    if (rho[k] < 1.0 && rho[k + 1] >= 1.0) {
      const double f = (1.0 - rho[k]) / (rho[k + 1] - rho[k]);
      return Crossing{betas[k], betas[k + 1], betas[k] + f * (betas[k + 1] - betas[k])};
    }
  }
  return std::nullopt;
}

inline ScanResult threshold_scan(const Graph& g, double delta, const std::vector<double>& betas,
                                 std::size_t horizon = kDefaultSignHorizon,
                                 const SpectralOptions& opt = {}) {
  if (betas.empty()) throw ParameterError("beta grid is empty");
  if (!std::is_sorted(betas.begin(), betas.end())) throw ParameterError("beta grid must be sorted");
  ScanResult res;
  res.delta = delta;
  std::vector<double> rm, rmp, rmpp;
  bool have_mpp = true;
  for (double beta : betas) {
    const auto row = table_row(g, EpidemicParams(beta, delta), horizon, {}, opt);
    res.rows.push_back({beta, row.rho_m, row.rho_m_prime, row.rho_m_double_prime, row.sign_holds});
    rm.push_back(row.rho_m);
    rmp.push_back(row.rho_m_prime);
    if (row.rho_m_double_prime) {
      rmpp.push_back(*row.rho_m_double_prime);
    } else {
      have_mpp = false;
    }
  }
  res.m = find_crossing(betas, rm);
  res.m_prime = find_crossing(betas, rmp);
  if (have_mpp) res.m_double_prime = find_crossing(betas, rmpp);
  return res;
}

/// Bisection on beta in [lo, hi] for rho(kind) = 1, to width tol.
inline double refine_crossing(const Graph& g, double delta, BoundKind kind, double lo, double hi,
                              double tol = 1e-4, const SpectralOptions& opt = {}) {
  auto rho_at = [&](double beta) {
    return spectral_radius(build_bound(kind, g, EpidemicParams(beta, delta)), opt).rho;
  };
  if (!(rho_at(lo) < 1.0 && rho_at(hi) >= 1.0)) {
    throw ParameterError("refine_crossing: interval does not bracket rho = 1");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (rho_at(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Observed rho(M') <= rho(M) pattern
// ---------------------------------------------------------------------------

struct ConjectureRecord {
  std::string instance;
  EpidemicParams params;
  double rho_m = 0.0;
  double rho_m_prime = 0.0;
};

/// Logs every instance where rho(M') exceeds rho(M) by more than tol.
class ConjectureMonitor {
 public:
  explicit ConjectureMonitor(double tol = 1e-8) : tol_(tol) {}

  void record(std::string instance, const EpidemicParams& prm, double rho_m, double rho_m_prime) {
    ++checked_;
    if (rho_m_prime > rho_m + tol_) violations_.push_back({std::move(instance), prm, rho_m, rho_m_prime});
  }

  std::size_t checked() const { return checked_; }
  const std::vector<ConjectureRecord>& violations() const { return violations_; }
  bool holds() const { return violations_.empty(); }

 private:
  double tol_;
  std::size_t checked_ = 0;
  std::vector<ConjectureRecord> violations_;
};

}  // namespace sis
