#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sis/errors.hpp"
#include "sis/graph.hpp"
#include "sis/params.hpp"

namespace sis {

/// Bit i set means node i is infected.
using NetworkState = std::uint64_t;

inline constexpr std::size_t kDefaultStateCap = 14;
inline constexpr double kClampThreshold = 1e-15;

/// Probability vector over the 2^n network states, indexed by bitmask.
class ChainDistribution {
 public:
  ChainDistribution() = default;

  explicit ChainDistribution(std::size_t n, std::size_t cap = kDefaultStateCap) : n_(n) {
    if (n > cap || n >= 63) {
      throw SizeError("exact chain on " + std::to_string(n) + " nodes exceeds the cap of " +
                      std::to_string(cap));
    }
    prob_.assign(std::size_t{1} << n, 0.0);
  }

  static ChainDistribution point_mass(std::size_t n, NetworkState s,
                                      std::size_t cap = kDefaultStateCap) {
    ChainDistribution d(n, cap);
    if (s >= d.size()) throw ParameterError("state outside the state space");
    d.prob_[s] = 1.0;
    return d;
  }

  static ChainDistribution all_infected(std::size_t n, std::size_t cap = kDefaultStateCap) {
    ChainDistribution d(n, cap);
    d.prob_.back() = 1.0;
    return d;
  }

  static ChainDistribution uniform(std::size_t n, std::size_t cap = kDefaultStateCap) {
    ChainDistribution d(n, cap);
    for (auto& p : d.prob_) p = 1.0 / double(d.size());
    return d;
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t size() const noexcept { return prob_.size(); }
  NetworkState all_infected_state() const noexcept { return NetworkState(size() - 1); }

  double operator[](NetworkState s) const { return prob_[s]; }
  double& operator[](NetworkState s) { return prob_[s]; }

  const std::vector<double>& values() const noexcept { return prob_; }

  double total() const {
    double s = 0.0;
    for (double p : prob_) s += p;
    return s;
  }

  /// Zeroes rounding-level negatives; anything below -kClampThreshold is a bug.
  void clamp() {
    for (auto& p : prob_) {
      if (p < 0.0) {
        if (p < -kClampThreshold) {
          throw ConsistencyError("negative probability " + std::to_string(p));
        }
        p = 0.0;
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> prob_;
};

/// One step of the exact chain: returns dist * S, where from state X each
/// node moves independently. An infected node stays infected w.p. 1 - delta;
/// a healthy node with m infected neighbors becomes infected w.p.
/// 1 - (1 - beta)^m. Matrix-free: each source state expands its product
/// distribution over targets, branching only on nodes whose next-step
/// probability is strictly between 0 and 1.
inline ChainDistribution transition_apply(const Graph& g, const EpidemicParams& prm,
                                          const ChainDistribution& dist) {
  const std::size_t n = g.node_count();
  if (dist.node_count() != n) throw ParameterError("distribution and graph sizes differ");
  ChainDistribution out = dist;  // same cap, same size
  std::vector<double> next(dist.size(), 0.0);

  std::vector<NetworkState> nbr_mask(n, 0);
  for (const auto& e : g.edges()) {
    nbr_mask[e.u] |= NetworkState{1} << e.v;
    nbr_mask[e.v] |= NetworkState{1} << e.u;
  }
  std::vector<double> escape(g.max_degree() + 1);  // (1 - beta)^m
  for (std::size_t m = 0; m < escape.size(); ++m) escape[m] = std::pow(1.0 - prm.beta, double(m));

  std::vector<NetworkState> ys;
  std::vector<double> ps;
  ys.reserve(dist.size());
  ps.reserve(dist.size());
  for (NetworkState x = 0; x < dist.size(); ++x) {
    const double w = dist[x];
    if (w == 0.0) continue;
    ys.assign(1, 0);
    ps.assign(1, w);
    for (std::size_t i = 0; i < n; ++i) {
      const NetworkState bit = NetworkState{1} << i;
      double r;
      if (x & bit) {
        r = 1.0 - prm.delta;
      } else {
        const int m = std::popcount(x & nbr_mask[i]);
        r = 1.0 - escape[std::size_t(m)];
      }
      if (r == 0.0) continue;
      const std::size_t k = ys.size();
      if (r == 1.0) {
        for (std::size_t s = 0; s < k; ++s) ys[s] |= bit;
        continue;
      }
      for (std::size_t s = 0; s < k; ++s) {
        ys.push_back(ys[s] | bit);
        ps.push_back(ps[s] * r);
        ps[s] *= 1.0 - r;
      }
    }
    for (std::size_t s = 0; s < ys.size(); ++s) next[ys[s]] += ps[s];
  }
  for (NetworkState y = 0; y < next.size(); ++y) out[y] = next[y];
  out.clamp();
  return out;
}

/// Marginals p_i, pairwise p_ij per edge (canonical order) and
/// q_ij = P(X_i = 0, X_j = 1) per arc (canonical arc order).
struct ExactMoments {
  std::vector<double> p;
  std::vector<double> p_e;
  std::vector<double> q_e;
};

inline ExactMoments exact_moments(const ChainDistribution& dist, const Graph& g) {
  const std::size_t n = g.node_count();
  if (dist.node_count() != n) throw ParameterError("distribution and graph sizes differ");
  const std::size_t m = g.edge_count();
  ExactMoments mo{std::vector<double>(n, 0.0), std::vector<double>(m, 0.0),
                  std::vector<double>(2 * m, 0.0)};
  for (NetworkState x = 0; x < dist.size(); ++x) {
    const double w = dist[x];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      if (x >> i & 1) mo.p[i] += w;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = g.edges()[k];
      const bool iu = x >> e.u & 1, iv = x >> e.v & 1;
      if (iu && iv) mo.p_e[k] += w;
      if (!iu && iv) mo.q_e[k] += w;
      if (iu && !iv) mo.q_e[k + m] += w;
    }
  }
  return mo;
}

/// Moments of the point mass on all-infected: p = 1, p_E = 1, q_E = 0.
inline ExactMoments all_infected_moments(const Graph& g) {
  return {std::vector<double>(g.node_count(), 1.0), std::vector<double>(g.edge_count(), 1.0),
          std::vector<double>(g.arc_count(), 0.0)};
}

/// Total variation distance to the absorbing point mass: 1 - P(all healthy).
inline double tv_from_stationary(const ChainDistribution& dist) {
  return std::max(0.0, 1.0 - dist[0]);
}

/// First t at which the chain started from all-infected (the worst initial
/// distribution) is within epsilon of absorption in total variation;
/// nullopt if that does not happen by t_max.
inline std::optional<std::size_t> mixing_time(const Graph& g, const EpidemicParams& prm,
                                              double epsilon, std::size_t t_max,
                                              std::size_t cap = kDefaultStateCap) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  auto dist = ChainDistribution::all_infected(g.node_count(), cap);
  if (tv_from_stationary(dist) <= epsilon) return 0;
  for (std::size_t t = 1; t <= t_max; ++t) {
    dist = transition_apply(g, prm, dist);
    if (tv_from_stationary(dist) <= epsilon) return t;
  }
  return std::nullopt;
}

/// CSV snapshot: header "state_bitmask,probability".
inline void write_distribution_csv(std::ostream& out, const ChainDistribution& dist) {
  out << "state_bitmask,probability\n";
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (NetworkState x = 0; x < dist.size(); ++x) out << x << ',' << dist[x] << '\n';
  out.precision(old_prec);
}

}  // namespace sis
