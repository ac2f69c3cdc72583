#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <thread>
#include <vector>

#include "sis/errors.hpp"
#include "sis/graph.hpp"
#include "sis/params.hpp"
#include "sis/rng.hpp"

namespace sis {

/// Per-node infection flags for graphs of any size.
using StateVector = std::vector<std::uint8_t>;

enum class InfectionSampling {
  PerNode,  // one draw per exposed susceptible node against 1 - (1-beta)^m
  PerEdge,  // one draw per infected neighbor against beta
};

struct InitialCondition {
  enum class Kind { AllInfected, SingleNode, Mask };
  Kind kind = Kind::AllInfected;
  Node node = 0;
  StateVector mask;

  static InitialCondition all_infected() { return {}; }
  static InitialCondition single_node(Node i) { return {Kind::SingleNode, i, {}}; }
  static InitialCondition explicit_mask(StateVector m) { return {Kind::Mask, 0, std::move(m)}; }

  StateVector materialize(std::size_t n) const {
    switch (kind) {
      case Kind::AllInfected: return StateVector(n, 1);
      case Kind::SingleNode: {
        if (node >= n) throw ParameterError("initial node out of range");
        StateVector s(n, 0);
        s[node] = 1;
        return s;
      }
      case Kind::Mask:
        if (mask.size() != n) throw ParameterError("initial mask has the wrong length");
        return mask;
    }
    throw ParameterError("unknown initial condition");
  }
};

struct McConfig {
  std::size_t n_traj = 1000;
  std::size_t t_max = 100;
  std::uint64_t seed = kDefaultSeed;
  InitialCondition init;
  InfectionSampling sampling = InfectionSampling::PerNode;
  std::vector<std::size_t> record_times;  // per-node frequencies kept at these t
  unsigned workers = 1;                   // 0 = hardware concurrency
};

struct McEstimate {
  std::size_t n_traj = 0;
  std::vector<double> mean_fraction;  // t = 0..t_max
  std::vector<double> stderr_fraction;
  std::vector<std::size_t> alive;     // trajectories not yet absorbed at t
  std::size_t absorbed = 0;           // absorbed by t_max
  std::vector<std::size_t> record_times;
  std::vector<std::vector<double>> node_frequency;  // [record][node]
};

/// Synchronous SIS step from a fixed time-t state: every node's next state is
/// drawn from the time-t configuration only. Nodes are visited in index order;
/// infected nodes consume one uniform (recover if u < delta), susceptible
/// nodes with at least one infected neighbor consume one uniform (PerNode) or
/// one per infected neighbor until the first success (PerEdge). Susceptible
/// nodes with no infected neighbor consume nothing.
class SisStepper {
 public:
  SisStepper(const Graph& g, const EpidemicParams& prm,
             InfectionSampling sampling = InfectionSampling::PerNode)
      : g_(g), prm_(prm), sampling_(sampling), infect_(g.max_degree() + 1) {
    for (std::size_t m = 0; m < infect_.size(); ++m) {
      infect_[m] = 1.0 - std::pow(1.0 - prm.beta, double(m));
    }
  }

  /// Returns the number of infected nodes in `next`.
  std::size_t step(const StateVector& cur, StateVector& next, Rng& rng) const {
    const std::size_t n = g_.node_count();
    next.resize(n);
    std::size_t infected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cur[i]) {
        next[i] = rng.uniform() < prm_.delta ? 0 : 1;
      } else {
        std::size_t m = 0;
        for (Node j : g_.neighbors(Node(i))) m += cur[j];
        if (m == 0) {
          next[i] = 0;
        } else if (sampling_ == InfectionSampling::PerNode) {
          next[i] = rng.uniform() < infect_[m] ? 1 : 0;
        } else {
          std::uint8_t hit = 0;
          for (std::size_t k = 0; k < m && !hit; ++k) hit = rng.uniform() < prm_.beta;
          next[i] = hit;
        }
      }
      infected += next[i];
    }
    return infected;
  }

 private:
  const Graph& g_;
  EpidemicParams prm_;
  InfectionSampling sampling_;
  std::vector<double> infect_;
};

/// States at t = 0..t_max of one trajectory. The all-healthy state is
/// absorbing, so the tail after extinction is all zeros.
inline std::vector<StateVector> simulate_trajectory(const Graph& g, const EpidemicParams& prm,
                                                    const InitialCondition& init,
                                                    std::size_t t_max, std::uint64_t seed,
                                                    InfectionSampling sampling = InfectionSampling::PerNode) {
  const std::size_t n = g.node_count();
  SisStepper stepper(g, prm, sampling);
  Rng rng(seed);
  std::vector<StateVector> traj;
  traj.reserve(t_max + 1);
  traj.push_back(init.materialize(n));
  std::size_t infected = std::size_t(std::count(traj.back().begin(), traj.back().end(), 1));
  for (std::size_t t = 1; t <= t_max; ++t) {
    StateVector next;
    if (infected == 0) {
      next.assign(n, 0);
    } else {
      infected = stepper.step(traj.back(), next, rng);
    }
    traj.push_back(std::move(next));
  }
  return traj;
}

namespace detail {

// Integer accumulators: sums of counts are exact, so merging partial results
// from any number of workers in any order gives identical totals.
struct McTally {
  std::vector<std::uint64_t> sum;
  std::vector<std::uint64_t> sum_sq;
  std::vector<std::uint64_t> alive;
  std::vector<std::vector<std::uint64_t>> node_hits;

  McTally(std::size_t t_max, std::size_t records, std::size_t n)
      : sum(t_max + 1, 0), sum_sq(t_max + 1, 0), alive(t_max + 1, 0),
        node_hits(records, std::vector<std::uint64_t>(n, 0)) {}

  void merge(const McTally& o) {
    for (std::size_t t = 0; t < sum.size(); ++t) {
      sum[t] += o.sum[t];
      sum_sq[t] += o.sum_sq[t];
      alive[t] += o.alive[t];
    }
    for (std::size_t r = 0; r < node_hits.size(); ++r)
      for (std::size_t i = 0; i < node_hits[r].size(); ++i) node_hits[r][i] += o.node_hits[r][i];
  }
};

inline void run_trajectories(const Graph& g, const EpidemicParams& prm, const McConfig& cfg,
                             const StateVector& init, std::size_t first, std::size_t last,
                             McTally& tally) {
  const std::size_t n = g.node_count();
  SisStepper stepper(g, prm, cfg.sampling);
  StateVector cur, next;
  const std::size_t init_count = std::size_t(std::count(init.begin(), init.end(), 1));
  for (std::size_t j = first; j < last; ++j) {
    Rng rng(stream_seed(cfg.seed, j));
    cur = init;
    std::size_t infected = init_count;
    std::size_t rec = 0;
    for (std::size_t t = 0; t <= cfg.t_max; ++t) {
      if (t > 0) {
        if (infected == 0) break;  // absorbed: contributes zero from here on
        infected = stepper.step(cur, next, rng);
        cur.swap(next);
      }
      tally.sum[t] += infected;
      tally.sum_sq[t] += std::uint64_t(infected) * infected;
      tally.alive[t] += infected > 0;
      while (rec < cfg.record_times.size() && cfg.record_times[rec] < t) ++rec;
      if (rec < cfg.record_times.size() && cfg.record_times[rec] == t) {
        for (std::size_t i = 0; i < n; ++i) tally.node_hits[rec][i] += cur[i];
      }
    }
  }
}

}  // namespace detail

/// Runs cfg.n_traj independent trajectories; trajectory j draws from
/// Rng(stream_seed(cfg.seed, j)), so results do not depend on cfg.workers.
inline McEstimate estimate(const Graph& g, const EpidemicParams& prm, const McConfig& cfg) {
  if (cfg.n_traj < 1) throw ParameterError("n_traj must be >= 1");
  if (!std::is_sorted(cfg.record_times.begin(), cfg.record_times.end())) {
    throw ParameterError("record_times must be sorted");
  }
  for (std::size_t t : cfg.record_times) {
    if (t > cfg.t_max) throw ParameterError("record time beyond t_max");
  }
  const std::size_t n = g.node_count();
  if (n == 0) throw InvalidSize("Monte Carlo on an empty graph");
  const StateVector init = cfg.init.materialize(n);

  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = unsigned(std::min<std::size_t>(workers, cfg.n_traj));
  std::vector<detail::McTally> tallies(workers, detail::McTally(cfg.t_max, cfg.record_times.size(), n));
  const std::size_t chunk = (cfg.n_traj + workers - 1) / workers;
  if (workers == 1) {
    detail::run_trajectories(g, prm, cfg, init, 0, cfg.n_traj, tallies[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t first = std::min(cfg.n_traj, w * chunk);
      const std::size_t last = std::min(cfg.n_traj, first + chunk);
      pool.emplace_back(detail::run_trajectories, std::cref(g), std::cref(prm), std::cref(cfg),
                        std::cref(init), first, last, std::ref(tallies[w]));
    }
    for (auto& th : pool) th.join();
  }
  for (unsigned w = 1; w < workers; ++w) tallies[0].merge(tallies[w]);
  const auto& tally = tallies[0];

  McEstimate est;
  est.n_traj = cfg.n_traj;
  est.record_times = cfg.record_times;
  const double N = double(cfg.n_traj);
  const double nn = double(n);
  for (std::size_t t = 0; t <= cfg.t_max; ++t) {
    const double mean = double(tally.sum[t]) / (N * nn);
    const double mean_sq = double(tally.sum_sq[t]) / (N * nn * nn);
    double var = std::max(0.0, mean_sq - mean * mean);
    if (cfg.n_traj > 1) var *= N / (N - 1.0);
    est.mean_fraction.push_back(mean);
    est.stderr_fraction.push_back(cfg.n_traj > 1 ? std::sqrt(var / N) : 0.0);
    est.alive.push_back(std::size_t(tally.alive[t]));
  }
  est.absorbed = cfg.n_traj - est.alive.back();
  for (const auto& hits : tally.node_hits) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = double(hits[i]) / N;
    est.node_frequency.push_back(std::move(f));
  }
  return est;
}

/// CSV: t,mean_infected_fraction,stderr,n_alive_trajectories
inline void write_mc_csv(std::ostream& out, const McEstimate& est) {
  out << "t,mean_infected_fraction,stderr,n_alive_trajectories\n";
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t t = 0; t < est.mean_fraction.size(); ++t) {
    out << t << ',' << est.mean_fraction[t] << ',' << est.stderr_fraction[t] << ',' << est.alive[t]
        << '\n';
  }
  out.precision(old_prec);
}

}  // namespace sis
