#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "sis/bounds.hpp"

using namespace sis;

namespace {

std::vector<Graph> sample_graphs() {
  return {path(3), star(5), cycle(5), clique(4), erdos_renyi(7, 0.4, 3), spider(2, 3)};
}

std::vector<EpidemicParams> sample_params() {
  return {{0.3, 0.4}, {0.05, 0.6}, {0.7, 0.2}, {0.0, 0.5}, {0.2, 1.0}, {0.5, 0.0}};
}

}  // namespace

TEST(BuildM, MatchesDefinition) {
  for (const auto& g : sample_graphs()) {
    for (const auto& prm : sample_params()) {
      const auto m = build_m(g, prm);
      EXPECT_EQ(m.kind(), BoundKind::M);
      ASSERT_EQ(m.dim(), g.node_count());
      const Eigen::MatrixXd want =
          (1.0 - prm.delta) * Eigen::MatrixXd::Identity(m.dim(), m.dim()) +
          prm.beta * oracle::dense_adjacency(g);
      EXPECT_LE((m.dense() - want).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_TRUE(m.nonnegative());
    }
  }
}

TEST(BuildMPrime, MatchesPerInequalityInterpreter) {
  for (const auto& g : sample_graphs()) {
    for (const auto& prm : sample_params()) {
      const auto mp = build_m_prime(g, prm);
      EXPECT_EQ(mp.kind(), BoundKind::MPrime);
      ASSERT_EQ(mp.dim(), g.node_count() + g.edge_count());
      EXPECT_EQ(mp.node_count(), g.node_count());
      EXPECT_LE((mp.dense() - oracle::m_prime(g, prm)).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(BuildMPrime, BlockForm) {
  const auto g = erdos_renyi(8, 0.4, 6);
  const EpidemicParams prm(0.15, 0.35);
  const auto n = Eigen::Index(g.node_count()), m = Eigen::Index(g.edge_count());
  const Eigen::MatrixXd d = build_m_prime(g, prm).dense();
  const Eigen::MatrixXd b = Eigen::MatrixXd(incidence_matrix(g));
  EXPECT_TRUE(d.topLeftCorner(n, n).isApprox(build_m(g, prm).dense()));
  EXPECT_TRUE(d.topRightCorner(n, m).isApprox(prm.beta * b));
  EXPECT_TRUE(d.bottomLeftCorner(m, n).isApprox(-(1 - prm.delta) * prm.beta * b.transpose()));
  const double diag = (1 - prm.delta) * (1 - prm.delta - 2 * prm.beta);
  EXPECT_TRUE(d.bottomRightCorner(m, m).isApprox(diag * Eigen::MatrixXd::Identity(m, m)));
  EXPECT_FALSE(build_m_prime(g, prm).nonnegative());
}

TEST(BuildMDoublePrime, MatchesPerInequalityInterpreter) {
  for (const auto& g : sample_graphs()) {
    for (const auto& prm : sample_params()) {
      const auto mpp = build_m_double_prime(g, prm);
      EXPECT_EQ(mpp.kind(), BoundKind::MDoublePrime);
      ASSERT_EQ(mpp.dim(), g.node_count() + 2 * g.edge_count());
      EXPECT_LE((mpp.dense() - oracle::m_double_prime(g, prm)).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(BuildMDoublePrime, NonnegativeExactlyWhenQBoundPropagates) {
  const auto g = star(6);
  for (double d : {0.0, 0.2, 0.5, 0.9}) {
    for (double b : {0.0, 0.05, 0.3, 0.6, 0.95}) {
      const EpidemicParams prm(b, d);
      EXPECT_EQ(build_m_double_prime(g, prm).nonnegative(), prm.q_bound_propagates())
          << "beta " << b << " delta " << d;
    }
  }
  // At delta = 1 the only signed coefficient carries a factor (1 - delta).
  EXPECT_TRUE(build_m_double_prime(g, EpidemicParams(0.4, 1.0)).nonnegative());
  EXPECT_FALSE(EpidemicParams(0.4, 1.0).q_bound_propagates());
}

TEST(BuildMDoublePrime, StarBlockLayout) {
  // star(n): hub 0, leaves 1..n-1, then q_out = (0, j), then q_in = (j, 0).
  const std::size_t n = 7;
  const auto k = Eigen::Index(n - 1);
  const EpidemicParams prm(0.12, 0.3);
  const double b = prm.beta, d = prm.delta;
  const Eigen::MatrixXd a = build_m_double_prime(star(n), prm).dense();
  const Eigen::Index hub = 0, leaf = 1, qout = 1 + k, qin = 1 + 2 * k;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd J = Eigen::MatrixXd::Ones(k, k);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(k);

  EXPECT_DOUBLE_EQ(a(hub, hub), 1 - d);
  EXPECT_TRUE(a.block(hub, qout, 1, k).isApprox(b * one.transpose()));
  EXPECT_EQ(a.block(hub, leaf, 1, k).norm(), 0.0);
  EXPECT_EQ(a.block(hub, qin, 1, k).norm(), 0.0);

  EXPECT_TRUE(a.block(leaf, leaf, k, k).isApprox((1 - d) * I));
  EXPECT_TRUE(a.block(leaf, qin, k, k).isApprox(b * I));
  EXPECT_EQ(a.block(leaf, qout, k, k).norm(), 0.0);
  EXPECT_EQ(a.block(leaf, hub, k, 1).norm(), 0.0);

  EXPECT_TRUE(a.block(qout, leaf, k, k).isApprox(d * (1 - d) * I));
  EXPECT_TRUE(a.block(qout, qout, k, k).isApprox((1 - d) * (1 - d - b) * I));
  EXPECT_TRUE(a.block(qout, qin, k, k).isApprox(b * d * I));
  EXPECT_EQ(a.block(qout, hub, k, 1).norm(), 0.0);

  EXPECT_TRUE(a.block(qin, hub, k, 1).isApprox(d * (1 - d) * one));
  EXPECT_TRUE(a.block(qin, qin, k, k).isApprox((1 - d) * (1 - d - b) * I));
  EXPECT_TRUE(a.block(qin, qout, k, k).isApprox(b * d * I + b * (1 + d) * (J - I)));
  EXPECT_EQ(a.block(qin, leaf, k, k).norm(), 0.0);
}

TEST(BuildBound, DispatchAndZeroBeta) {
  const auto g = cycle(6);
  const EpidemicParams prm(0.0, 0.3);
  for (auto kind : {BoundKind::M, BoundKind::MPrime, BoundKind::MDoublePrime}) {
    const auto m = build_bound(kind, g, prm);
    EXPECT_EQ(m.kind(), kind);
    // With beta = 0 the marginal rows keep only the (1 - delta) diagonal.
    const Eigen::MatrixXd top = m.dense().topRows(g.node_count());
    EXPECT_TRUE(top.isApprox((0.7 * Eigen::MatrixXd::Identity(6, m.dim()))));
  }
  EXPECT_EQ(to_string(BoundKind::MPrime), "M'");
  EXPECT_EQ(to_string(BoundKind::MDoublePrime), "M''");
}

TEST(BuildMDoublePrime, FillCap) {
  EXPECT_GT(m_double_prime_fill(star(50)), m_double_prime_fill(star(10)));
  EXPECT_THROW(build_m_double_prime(star(200), EpidemicParams(0.1, 0.3), 1000), SizeError);
  EXPECT_NO_THROW(build_m_double_prime(star(20), EpidemicParams(0.1, 0.3), 100000));
}

TEST(SignCondition, HoldsOnSmallStar) {
  const auto rep = check_sign_condition(build_m_prime(star(6), EpidemicParams(0.05, 0.6)), 200);
  EXPECT_TRUE(rep.holds_to_horizon());
  EXPECT_EQ(rep.holds.size(), 200u);
  EXPECT_EQ(rep.min_entry.size(), 200u);
  EXPECT_EQ(rep.horizon, 200u);
}

TEST(SignCondition, MatchesDirectPowers) {
  const auto g = erdos_renyi(6, 0.5, 2);
  for (const auto& prm : sample_params()) {
    const auto mp = build_m_prime(g, prm);
    const auto rep = check_sign_condition(mp, 40);
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(mp.dim());
    v.head(g.node_count()).setOnes();
    const Eigen::MatrixXd d = oracle::m_prime(g, prm);
    for (std::size_t t = 1; t <= 40; ++t) {
      v = v * d;
      EXPECT_EQ(rep.holds[t - 1], v.minCoeff() >= -1e-12);
    }
  }
}

TEST(SignCondition, DetectsFailure) {
  // One marginal plus one pair slot: v1 = (0.5, 1), v2 = (-0.75, 0.5).
  SparseMatrix s(2, 2);
  s.insert(0, 0) = 0.5;
  s.insert(0, 1) = 1.0;
  s.insert(1, 0) = -1.0;
  const BoundMatrix mp(BoundKind::MPrime, s, 1);
  const auto rep = check_sign_condition(mp, 10);
  EXPECT_FALSE(rep.holds_to_horizon());
  ASSERT_TRUE(rep.first_failure.has_value());
  EXPECT_EQ(*rep.first_failure, 2u);
  EXPECT_TRUE(rep.holds[0]);
  EXPECT_FALSE(rep.holds[1]);
  EXPECT_DOUBLE_EQ(rep.min_entry[1], -0.75);
}

TEST(SignCondition, RejectsBadArguments) {
  const auto mp = build_m_prime(star(4), EpidemicParams(0.1, 0.5));
  EXPECT_THROW(check_sign_condition(mp, 0), ParameterError);
  EXPECT_THROW(check_sign_condition(mp, 5, -1.0), ParameterError);
  EXPECT_THROW(check_sign_condition(build_m(star(4), EpidemicParams(0.1, 0.5)), 5), ParameterError);
}

TEST(Triplets, RoundTripAndOrder) {
  const auto mpp = build_m_double_prime(erdos_renyi(8, 0.5, 1), EpidemicParams(0.21, 0.37));
  const auto t = mpp.triplets();
  ASSERT_EQ(t.size(), mpp.nnz());
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_TRUE(t[k - 1].row < t[k].row || (t[k - 1].row == t[k].row && t[k - 1].col < t[k].col));
  }
  std::stringstream ss;
  write_triplets(ss, mpp);
  const auto back = read_triplets(ss, BoundKind::MDoublePrime, mpp.node_count());
  EXPECT_EQ((back.dense() - mpp.dense()).cwiseAbs().maxCoeff(), 0.0);

  std::istringstream bad1("x y");
  EXPECT_THROW(read_triplets(bad1, BoundKind::M, 1), IoError);
  std::istringstream bad2("2 3\n0 0 1\n");
  EXPECT_THROW(read_triplets(bad2, BoundKind::M, 1), IoError);
  std::istringstream bad3("2 1\n0 5 1\n");
  EXPECT_THROW(read_triplets(bad3, BoundKind::M, 1), IoError);
}

TEST(Params, Validation) {
  EXPECT_THROW(EpidemicParams(-0.1, 0.5), ParameterError);
  EXPECT_THROW(EpidemicParams(0.1, 1.5), ParameterError);
  EXPECT_DOUBLE_EQ(EpidemicParams(0.1, 0.5).tau(), 0.2);
  EXPECT_THROW(EpidemicParams(0.1, 0.0).tau(), ParameterError);
}
