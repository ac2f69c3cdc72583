// sisbound: command-line front end for the SIS bound library.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sis/sis.hpp"

namespace {

struct Common {
  std::string graph;
  double beta = 0.0;
  double delta = 0.0;
  std::string out;
  std::string format = "csv";
};

void add_graph(CLI::App* app, Common& c) {
  app->add_option("--graph", c.graph, "star:N cycle:N clique:N path:N spider:A,L er:N,P[,SEED] ws:N,K,P[,SEED] file:PATH")
      ->required();
}

void add_params(CLI::App* app, Common& c) {
  app->add_option("--beta", c.beta, "infection probability per link")->required()->check(CLI::Range(0.0, 1.0));
  app->add_option("--delta", c.delta, "recovery probability")->required()->check(CLI::Range(0.0, 1.0));
}

void add_output(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

// Writes to --out when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw sis::IoError("cannot open " + path + " for writing");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_betas(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw sis::ParameterError("bad beta value '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SIS epidemic bound analysis"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a generated graph as an edge list");
  std::string family;
  std::size_t gn = 0, gk = 2, arms = 0, arm_len = 0;
  double gp = 0.0, rewire = 0.0;
  std::uint64_t gseed = sis::kDefaultSeed;
  std::string gen_out;
  gen->add_option("family", family, "star cycle clique path spider er ws")
      ->required()
      ->check(CLI::IsMember({"star", "cycle", "clique", "path", "spider", "er", "ws"}));
  gen->add_option("--n", gn, "node count");
  gen->add_option("--p", gp, "edge probability (er)");
  gen->add_option("--k", gk, "ring degree (ws)");
  gen->add_option("--rewire", rewire, "rewiring probability (ws)");
  gen->add_option("--arms", arms, "number of arms (spider)");
  gen->add_option("--len", arm_len, "arm length (spider)");
  gen->add_option("--seed", gseed, "RNG seed");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // analyze
  Common an;
  std::size_t an_horizon = sis::kDefaultSignHorizon;
  double an_eps = 0.0;
  auto* analyze = app.add_subcommand("analyze", "radii of M, M', M'' and the sign condition");
  add_graph(analyze, an);
  add_params(analyze, an);
  add_output(analyze, an);
  analyze->add_option("--horizon", an_horizon, "sign-condition horizon")->check(CLI::PositiveNumber);
  analyze->add_option("--eps", an_eps, "also report the certified mixing-time bound at this epsilon")
      ->check(CLI::Range(0.0, 1.0));

  // exact
  Common ex;
  double ex_eps = 0.01;
  std::size_t ex_tmax = 100000, ex_cap = sis::kDefaultStateCap;
  std::string ex_dist;
  auto* exact = app.add_subcommand("exact", "mixing time of the exact 2^n-state chain");
  add_graph(exact, ex);
  add_params(exact, ex);
  add_output(exact, ex);
  exact->add_option("--eps", ex_eps, "total-variation target")->check(CLI::Range(0.0, 1.0));
  exact->add_option("--tmax", ex_tmax, "give up after this many steps");
  exact->add_option("--cap", ex_cap, "largest n accepted");
  exact->add_option("--dist-out", ex_dist, "write the distribution at t_mix as CSV");

  // mc
  Common mc;
  sis::McConfig mcfg;
  std::string init = "all", sampling = "node";
  std::vector<std::size_t> rec;
  auto* mcc = app.add_subcommand("mc", "Monte Carlo estimate of the infected fraction");
  add_graph(mcc, mc);
  add_params(mcc, mc);
  add_output(mcc, mc);
  mcc->add_option("--ntraj", mcfg.n_traj, "trajectories")->check(CLI::PositiveNumber);
  mcc->add_option("--tmax", mcfg.t_max, "steps per trajectory");
  mcc->add_option("--seed", mcfg.seed, "master seed");
  mcc->add_option("--workers", mcfg.workers, "threads (0 = all cores)");
  mcc->add_option("--init", init, "all or node:I");
  mcc->add_option("--sampling", sampling, "node or edge")->check(CLI::IsMember({"node", "edge"}));
  mcc->add_option("--record", rec, "times at which per-node frequencies are kept (json only)")
      ->delimiter(',');

  // verify
  Common ve;
  std::size_t ve_T = 50, ve_cap = sis::kDefaultStateCap;
  double ve_tol = 1e-10;
  auto* verify = app.add_subcommand("verify", "check every bound against the exact chain");
  add_graph(verify, ve);
  add_params(verify, ve);
  add_output(verify, ve);
  verify->add_option("--T", ve_T, "horizon");
  verify->add_option("--tol", ve_tol, "allowed violation");
  verify->add_option("--cap", ve_cap, "largest n accepted");

  // scan
  Common sc;
  std::string betas;
  std::size_t sc_horizon = sis::kDefaultSignHorizon;
  bool refine = false;
  auto* scan = app.add_subcommand("scan", "radii over a beta grid and the crossings of 1");
  add_graph(scan, sc);
  add_output(scan, sc);
  scan->add_option("--delta", sc.delta, "recovery probability")->required()->check(CLI::Range(0.0, 1.0));
  scan->add_option("--betas", betas, "comma-separated, sorted beta grid")->required();
  scan->add_option("--horizon", sc_horizon, "sign-condition horizon")->check(CLI::PositiveNumber);
  scan->add_flag("--refine", refine, "bisect each crossing to 1e-4 in beta");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      sis::Graph g;
      if (family == "star") g = sis::star(gn);
      if (family == "cycle") g = sis::cycle(gn);
      if (family == "clique") g = sis::clique(gn);
      if (family == "path") g = sis::path(gn);
      if (family == "spider") g = sis::spider(arms, arm_len);
      if (family == "er") g = sis::erdos_renyi(gn, gp, gseed);
      if (family == "ws") g = sis::watts_strogatz(gn, gk, rewire, gseed);
      Sink sink(gen_out);
      sis::write_edge_list(sink.get(), g);
      return 0;
    }

    if (analyze->parsed()) {
      const auto g = sis::graph_from_descriptor(an.graph);
      const sis::EpidemicParams prm(an.beta, an.delta);
      const auto row = sis::table_row(g, prm, an_horizon, an.graph);
      std::optional<sis::MixingBound> mb;
      if (an_eps > 0.0) mb = sis::mixing_bound(g, prm, an_eps);
      Sink sink(an.out);
      if (an.format == "json") {
        auto j = sis::to_json(row);
        if (mb) j["mixing_bound"] = sis::to_json(*mb);
        sis::write_json(sink.get(), j);
      } else {
        sis::write_table_header(sink.get());
        sis::write_table_row(sink.get(), row);
        if (mb) {
          sink.get() << "mixing_bound," << (mb->value ? sis::fmt6(*mb->value) : "no-certificate") << ','
                     << (mb->path ? sis::to_string(*mb->path) : "") << '\n';
        }
      }
      return 0;
    }

    if (exact->parsed()) {
      const auto g = sis::graph_from_descriptor(ex.graph);
      const sis::EpidemicParams prm(ex.beta, ex.delta);
      if (!(ex_eps > 0.0 && ex_eps < 1.0)) throw sis::ParameterError("--eps must lie in (0, 1)");
      auto dist = sis::ChainDistribution::all_infected(g.node_count(), ex_cap);
      std::vector<double> tv{sis::tv_from_stationary(dist)};
      std::optional<std::size_t> tmix;
      if (tv.back() <= ex_eps) tmix = 0;
      for (std::size_t t = 1; !tmix && t <= ex_tmax; ++t) {
        dist = sis::transition_apply(g, prm, dist);
        tv.push_back(sis::tv_from_stationary(dist));
        if (tv.back() <= ex_eps) tmix = t;
      }
      Sink sink(ex.out);
      if (ex.format == "json") {
        sis::Json j;
        j["graph"] = ex.graph;
        j["params"] = sis::params_json(prm);
        j["epsilon"] = ex_eps;
        j["t_mix"] = tmix ? sis::Json(*tmix) : sis::Json("exceeded");
        j["tv"] = tv;
        sis::write_json(sink.get(), j);
      } else {
        sink.get() << "t_mix," << (tmix ? std::to_string(*tmix) : "exceeded") << "\n";
      }
      if (!ex_dist.empty()) {
        std::ofstream f(ex_dist);
        if (!f) throw sis::IoError("cannot open " + ex_dist + " for writing");
        sis::write_distribution_csv(f, dist);
      }
      return 0;
    }

    if (mcc->parsed()) {
      const auto g = sis::graph_from_descriptor(mc.graph);
      const sis::EpidemicParams prm(mc.beta, mc.delta);
      if (init == "all") {
        mcfg.init = sis::InitialCondition::all_infected();
      } else if (init.rfind("node:", 0) == 0) {
        mcfg.init = sis::InitialCondition::single_node(sis::Node(std::stoul(init.substr(5))));
      } else {
        throw sis::ParameterError("--init must be 'all' or 'node:I'");
      }
      mcfg.sampling = sampling == "edge" ? sis::InfectionSampling::PerEdge : sis::InfectionSampling::PerNode;
      mcfg.record_times = rec;
      const auto est = sis::estimate(g, prm, mcfg);
      Sink sink(mc.out);
      if (mc.format == "json") {
        sis::write_json(sink.get(), sis::to_json(est));
      } else {
        sis::write_mc_csv(sink.get(), est);
      }
      return 0;
    }

    if (verify->parsed()) {
      const auto g = sis::graph_from_descriptor(ve.graph);
      const sis::EpidemicParams prm(ve.beta, ve.delta);
      const auto rep = sis::dominance_check(g, prm, ve_T, ve_cap);
      Sink sink(ve.out);
      if (ve.format == "json") {
        sis::write_json(sink.get(), sis::to_json(rep));
      } else {
        auto line = [&](const char* name, const sis::ClauseResult& c) {
          sink.get() << name << ',' << (c.checked ? sis::fmt6(c.max_violation) : "skipped") << '\n';
        };
        sink.get() << "clause,max_violation\n";
        line("marginal", rep.marginal);
        line("pairwise_marginal", rep.pairwise_marginal);
        line("pair_lower", rep.pair_lower);
        line("q_form", rep.q_form);
        line("multi_step", rep.multi_step);
        line("union_bound", rep.union_bound);
      }
      if (!rep.passed(ve_tol)) {
        std::cerr << "verify: bound violated by " << rep.worst() << " (tolerance " << ve_tol << ")\n";
        return 1;
      }
      return 0;
    }

    if (scan->parsed()) {
      const auto g = sis::graph_from_descriptor(sc.graph);
      const auto grid = parse_betas(betas);
      const auto res = sis::threshold_scan(g, sc.delta, grid, sc_horizon);
      std::optional<double> refined;
      if (refine && res.m_prime) {
        refined = sis::refine_crossing(g, sc.delta, sis::BoundKind::MPrime, res.m_prime->beta_lo,
                                       res.m_prime->beta_hi);
      }
      Sink sink(sc.out);
      if (sc.format == "json") {
        auto j = sis::to_json(res);
        if (refine) j["refined_crossing_mp"] = sis::optional_json(refined);
        sis::write_json(sink.get(), j);
      } else {
        sis::write_scan_csv(sink.get(), res, true);
        auto cross = [&](const char* name, const std::optional<sis::Crossing>& c) {
          if (c) sink.get() << "# crossing " << name << " in [" << sis::fmt6(c->beta_lo) << ", "
                            << sis::fmt6(c->beta_hi) << "] at " << sis::fmt6(c->beta) << '\n';
        };
        cross("rho_m", res.m);
        cross("rho_mp", res.m_prime);
        cross("rho_mpp", res.m_double_prime);
        if (refined) sink.get() << "# refined crossing rho_mp at " << sis::fmt6(*refined) << '\n';
      }
      return 0;
    }
  } catch (const sis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
