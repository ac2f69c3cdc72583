#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "sis/chain.hpp"
#include "sis/montecarlo.hpp"

using namespace sis;

namespace {

// Exact mean infected fraction at t = 0..t_max from the given start state.
std::vector<double> exact_mean_fraction(const Graph& g, const EpidemicParams& prm, NetworkState start,
                                        std::size_t t_max) {
  auto d = ChainDistribution::point_mass(g.node_count(), start);
  std::vector<double> out;
  for (std::size_t t = 0; t <= t_max; ++t) {
    if (t > 0) d = transition_apply(g, prm, d);
    const auto mo = exact_moments(d, g);
    double s = 0.0;
    for (double p : mo.p) s += p;
    out.push_back(s / double(g.node_count()));
  }
  return out;
}

}  // namespace

TEST(Rng, StreamsAndRanges) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t j = 0; j < 1000; ++j) seeds.insert(stream_seed(kDefaultSeed, j));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
  static_assert(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  Rng r(42);
  for (int k = 0; k < 10000; ++k) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}

TEST(Trajectory, DeterministicAndAbsorbing) {
  const auto g = cycle(12);
  const EpidemicParams prm(0.2, 0.5);
  const auto a = simulate_trajectory(g, prm, InitialCondition::all_infected(), 200, 99);
  const auto b = simulate_trajectory(g, prm, InitialCondition::all_infected(), 200, 99);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 201u);
  EXPECT_EQ(a[0], StateVector(12, 1));
  bool dead = false;
  for (const auto& s : a) {
    const bool empty = std::count(s.begin(), s.end(), 1) == 0;
    if (dead) {
      EXPECT_TRUE(empty);
    }
    dead = dead || empty;
  }
  const auto c = simulate_trajectory(g, prm, InitialCondition::all_infected(), 200, 100);
  EXPECT_NE(a, c);
}

TEST(Trajectory, DegenerateParameters) {
  const auto g = star(8);
  const auto gone = simulate_trajectory(g, EpidemicParams(0.9, 1.0), InitialCondition::all_infected(), 3, 1);
  EXPECT_EQ(gone[1], StateVector(8, 0));
  const auto fill = simulate_trajectory(g, EpidemicParams(1.0, 0.0), InitialCondition::single_node(0), 1, 1);
  EXPECT_EQ(fill[1], StateVector(8, 1));
  const auto leaf = simulate_trajectory(g, EpidemicParams(1.0, 0.0), InitialCondition::single_node(3), 2, 1);
  EXPECT_EQ(std::count(leaf[1].begin(), leaf[1].end(), 1), 2);
  EXPECT_EQ(leaf[2], StateVector(8, 1));
  StateVector mask(8, 0);
  mask[5] = 1;
  EXPECT_EQ(simulate_trajectory(g, EpidemicParams(0.0, 0.0), InitialCondition::explicit_mask(mask), 4, 1)[4],
            mask);
}

TEST(Estimate, IndependentOfWorkerCount) {
  const auto g = erdos_renyi(30, 0.2, 5);
  McConfig cfg;
  cfg.n_traj = 301;
  cfg.t_max = 40;
  cfg.record_times = {0, 10, 40};
  cfg.workers = 1;
  const auto one = estimate(g, EpidemicParams(0.15, 0.3), cfg);
  cfg.workers = 4;
  const auto four = estimate(g, EpidemicParams(0.15, 0.3), cfg);
  EXPECT_EQ(one.mean_fraction, four.mean_fraction);
  EXPECT_EQ(one.stderr_fraction, four.stderr_fraction);
  EXPECT_EQ(one.alive, four.alive);
  EXPECT_EQ(one.node_frequency, four.node_frequency);
  EXPECT_EQ(one.mean_fraction[0], 1.0);
  EXPECT_EQ(one.node_frequency[0], std::vector<double>(30, 1.0));
}

TEST(Estimate, AgreesWithExactChain) {
  const auto g = star(6);
  const EpidemicParams prm(0.05, 0.6);
  McConfig cfg;
  cfg.n_traj = 20000;
  cfg.t_max = 10;
  const auto est = estimate(g, prm, cfg);
  const auto ref = exact_mean_fraction(g, prm, 0b111111, 10);
  for (std::size_t t = 1; t <= 10; ++t) {
    EXPECT_NEAR(est.mean_fraction[t], ref[t], 4 * est.stderr_fraction[t] + 1e-12) << "t " << t;
  }
}

TEST(Estimate, PerEdgeSamplingHasTheSameLaw) {
  const auto g = clique(5);
  const EpidemicParams prm(0.2, 0.4);
  const auto ref = exact_mean_fraction(g, prm, 0b00001, 8);
  for (auto sampling : {InfectionSampling::PerNode, InfectionSampling::PerEdge}) {
    McConfig cfg;
    cfg.n_traj = 20000;
    cfg.t_max = 8;
    cfg.init = InitialCondition::single_node(0);
    cfg.sampling = sampling;
    const auto est = estimate(g, prm, cfg);
    for (std::size_t t = 1; t <= 8; ++t) {
      EXPECT_NEAR(est.mean_fraction[t], ref[t], 4 * est.stderr_fraction[t] + 1e-12);
    }
  }
}

TEST(Estimate, RejectsBadConfig) {
  const auto g = star(4);
  const EpidemicParams prm(0.1, 0.2);
  McConfig cfg;
  cfg.t_max = 5;
  cfg.n_traj = 0;
  EXPECT_THROW(estimate(g, prm, cfg), ParameterError);
  cfg.n_traj = 10;
  cfg.record_times = {3, 1};
  EXPECT_THROW(estimate(g, prm, cfg), ParameterError);
  cfg.record_times = {6};
  EXPECT_THROW(estimate(g, prm, cfg), ParameterError);
  cfg.record_times = {};
  cfg.init = InitialCondition::single_node(9);
  EXPECT_THROW(estimate(g, prm, cfg), ParameterError);
  cfg.init = InitialCondition::explicit_mask(StateVector(3, 1));
  EXPECT_THROW(estimate(g, prm, cfg), ParameterError);
  EXPECT_THROW(estimate(Graph(0, {}), prm, McConfig{}), InvalidSize);
}

TEST(Estimate, CsvLayout) {
  McConfig cfg;
  cfg.n_traj = 5;
  cfg.t_max = 2;
  const auto est = estimate(star(3), EpidemicParams(0.0, 1.0), cfg);
  std::ostringstream out;
  write_mc_csv(out, est);
  EXPECT_EQ(out.str(), "t,mean_infected_fraction,stderr,n_alive_trajectories\n0,1,0,5\n1,0,0,0\n2,0,0,0\n");
  EXPECT_EQ(est.absorbed, 5u);
}
