#include <gtest/gtest.h>

#include <sstream>

#include "sis/io.hpp"

using namespace sis;

namespace {

void expect_round_trip(const Json& j) {
  const std::string first = j.dump(kJsonIndent);
  const std::string second = Json::parse(first).dump(kJsonIndent);
  EXPECT_EQ(first, second);
}

}  // namespace

TEST(Json, ReportsRoundTripByteIdentical) {
  const auto g = star(6);
  const EpidemicParams prm(0.05, 0.6);
  expect_round_trip(to_json(table_row(g, prm, 100, "star:6")));
  expect_round_trip(to_json(dominance_check(g, prm, 10)));
  expect_round_trip(to_json(mixing_bound(g, prm, 0.01)));
  expect_round_trip(to_json(threshold_scan(g, 0.6, {0.0, 0.1, 0.3})));
  McConfig cfg;
  cfg.n_traj = 50;
  cfg.t_max = 5;
  cfg.record_times = {1, 5};
  expect_round_trip(to_json(estimate(g, prm, cfg)));
}

TEST(Json, FullPrecision) {
  const auto row = table_row(star(6), EpidemicParams(0.05, 0.6), 100);
  const auto j = Json::parse(to_json(row).dump());
  EXPECT_EQ(j["rho_m"].get<double>(), row.rho_m);
  EXPECT_EQ(j["rho_m_prime"].get<double>(), row.rho_m_prime);
  EXPECT_EQ(j["sign_condition"], "holds_to_horizon");
  EXPECT_TRUE(j["sign_first_failure"].is_null());
}

TEST(Csv, ScanAndComparisonLayout) {
  const auto res = threshold_scan(star(5), 0.5, {0.0, 0.25});
  std::ostringstream full, table;
  write_scan_csv(full, res);
  write_scan_csv(table, res, true);
  EXPECT_EQ(full.str().substr(0, 35), "beta,rho_m,rho_mp,rho_mpp,cond_hold");
  EXPECT_NE(table.str().find("\n0,0.5,0.5,0.5,1\n"), std::string::npos);

  std::ostringstream row;
  write_table_header(row);
  write_table_row(row, table_row(star(5), EpidemicParams(0.0, 0.5), 10, "star:5"));
  EXPECT_EQ(row.str(), "graph,n,delta,beta,rho_m,rho_mp,cond,rho_mpp\nstar:5,5,0.5,0,0.5,0.5,+,0.5\n");
  EXPECT_EQ(fmt6(1.0301234567), "1.03012");
}
