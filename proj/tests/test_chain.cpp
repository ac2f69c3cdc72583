#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sis/chain.hpp"

using namespace sis;

namespace {

Eigen::RowVectorXd as_row(const ChainDistribution& d) {
  return Eigen::Map<const Eigen::RowVectorXd>(d.values().data(), Eigen::Index(d.size()));
}

}  // namespace

TEST(Transition, MatchesExplicitMatrix) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& g : {path(3), star(4), cycle(4), clique(4), Graph(3, {{0, 2}})}) {
    for (int rep = 0; rep < 5; ++rep) {
      const EpidemicParams prm(u(gen), u(gen));
      const Eigen::MatrixXd s = oracle::transition_matrix(g, prm);
      EXPECT_LE((s.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
      auto d = ChainDistribution::uniform(g.node_count());
      Eigen::RowVectorXd ref = as_row(d);
      for (int t = 0; t < 8; ++t) {
        d = transition_apply(g, prm, d);
        ref = ref * s;
        EXPECT_LE((as_row(d) - ref).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_NEAR(d.total(), 1.0, 1e-12);
      }
    }
  }
}

TEST(Transition, EdgeProbabilities) {
  const auto g = star(5);
  // beta = 1 with delta = 0: everything adjacent to an infected node is infected next step.
  auto d = ChainDistribution::point_mass(5, 0b00001);
  d = transition_apply(g, EpidemicParams(1.0, 0.0), d);
  EXPECT_DOUBLE_EQ(d[0b11111], 1.0);
  // delta = 1, beta = 0: everyone recovers at once.
  d = transition_apply(g, EpidemicParams(0.0, 1.0), ChainDistribution::all_infected(5));
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  // All-healthy is absorbing.
  d = transition_apply(g, EpidemicParams(0.7, 0.2), ChainDistribution::point_mass(5, 0));
  EXPECT_DOUBLE_EQ(d[0], 1.0);
}

TEST(Moments, IdentitiesAndAllInfected) {
  const auto g = erdos_renyi(6, 0.5, 4);
  const std::size_t m = g.edge_count();
  const auto init = exact_moments(ChainDistribution::all_infected(6), g);
  const auto ref = all_infected_moments(g);
  EXPECT_EQ(init.p, ref.p);
  EXPECT_EQ(init.p_e, ref.p_e);
  EXPECT_EQ(init.q_e, ref.q_e);

  auto d = ChainDistribution::all_infected(6);
  for (int t = 0; t < 5; ++t) d = transition_apply(g, EpidemicParams(0.3, 0.35), d);
  const auto mo = exact_moments(d, g);
  for (std::size_t k = 0; k < m; ++k) {
    const auto e = g.edges()[k];
    EXPECT_NEAR(mo.q_e[k], mo.p[e.v] - mo.p_e[k], 1e-14);
    EXPECT_NEAR(mo.q_e[k + m], mo.p[e.u] - mo.p_e[k], 1e-14);
    EXPECT_LE(mo.p_e[k], std::min(mo.p[e.u], mo.p[e.v]) + 1e-15);
  }
  // Brute force for one node and one arc.
  double p0 = 0.0;
  for (NetworkState x = 0; x < d.size(); ++x)
    if (x & 1) p0 += d[x];
  EXPECT_NEAR(mo.p[0], p0, 1e-15);
}

TEST(Moments, RejectsSizeMismatch) {
  EXPECT_THROW(exact_moments(ChainDistribution::uniform(4), star(5)), ParameterError);
  EXPECT_THROW(transition_apply(star(5), EpidemicParams(0.1, 0.1), ChainDistribution::uniform(4)),
               ParameterError);
}

TEST(TotalVariation, EndpointsAndMonotonicity) {
  EXPECT_DOUBLE_EQ(tv_from_stationary(ChainDistribution::all_infected(4)), 1.0);
  EXPECT_DOUBLE_EQ(tv_from_stationary(ChainDistribution::point_mass(4, 0)), 0.0);
  // Worst-case start, so the distance to the absorbing state never grows.
  const auto g = cycle(6);
  auto d = ChainDistribution::all_infected(6);
  double prev = 1.0;
  for (int t = 0; t < 60; ++t) {
    d = transition_apply(g, EpidemicParams(0.25, 0.3), d);
    const double tv = tv_from_stationary(d);
    EXPECT_LE(tv, prev + 1e-15);
    prev = tv;
  }
}

TEST(MixingTime, SimpleCases) {
  EXPECT_EQ(mixing_time(star(6), EpidemicParams(0.0, 1.0), 0.01, 100), 1u);
  EXPECT_FALSE(mixing_time(star(6), EpidemicParams(0.0, 0.0), 0.01, 100).has_value());
  // beta = 0: P(all healthy at t) = (1 - (1-d)^t)^n.
  const double d = 0.4;
  std::size_t want = 0;
  while (1.0 - std::pow(1.0 - std::pow(1.0 - d, double(want)), 5.0) > 0.05) ++want;
  EXPECT_EQ(mixing_time(path(5), EpidemicParams(0.0, d), 0.05, 1000), want);
  EXPECT_THROW(mixing_time(star(4), EpidemicParams(0.1, 0.5), 0.0, 10), ParameterError);
  EXPECT_THROW(mixing_time(star(4), EpidemicParams(0.1, 0.5), 1.0, 10), ParameterError);
}

TEST(MixingTime, AgreesWithMatrixPowers) {
  const auto g = star(4);
  const EpidemicParams prm(0.2, 0.5);
  const Eigen::MatrixXd s = oracle::transition_matrix(g, prm);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(16);
  row[15] = 1.0;
  std::size_t t = 0;
  while (1.0 - row[0] > 0.01) {
    row = row * s;
    ++t;
  }
  EXPECT_EQ(mixing_time(g, prm, 0.01, 10000), t);
}

TEST(Distribution, CapsAndClamp) {
  EXPECT_THROW(ChainDistribution(15), SizeError);
  EXPECT_NO_THROW(ChainDistribution(15, 15));
  EXPECT_THROW(ChainDistribution::point_mass(3, 8), ParameterError);
  auto d = ChainDistribution::uniform(2);
  d[1] = -1e-17;
  d.clamp();
  EXPECT_EQ(d[1], 0.0);
  d[2] = -1e-9;
  EXPECT_THROW(d.clamp(), ConsistencyError);
}

TEST(Distribution, CsvSnapshot) {
  std::ostringstream out;
  write_distribution_csv(out, ChainDistribution::point_mass(2, 3));
  EXPECT_EQ(out.str(), "state_bitmask,probability\n0,0\n1,0\n2,0\n3,1\n");
}
