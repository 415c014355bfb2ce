// Command-line front door for the lq recovery-bound toolkit.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lqcertify/lqcertify.hpp"

namespace {

using lqc::json;

json certificate_to_json(const lqc::BoundCertificate& c) {
  json j;
  j["q"] = c.q;
  j["M"] = c.M;
  j["N"] = c.N;
  j["gamma"] = c.gamma;
  j["threshold"] = c.threshold;
  j["admissible"] = c.admissible;
  if (c.c_constant) j["c_constant"] = *c.c_constant;
  if (c.bound_value) j["bound_value"] = *c.bound_value;
  j["sigma_ge_epsilon"] = c.sigma_ge_epsilon;
  return j;
}

void print_certificate_table(const lqc::BoundCertificate& c) {
  std::printf("q          = %g\n", c.q);
  std::printf("M          = %g\n", c.M);
  std::printf("N          = %d\n", c.N);
  std::printf("gamma      = %g\n", c.gamma);
  std::printf("threshold  = %g\n", c.threshold);
  std::printf("admissible = %s\n", c.admissible ? "yes" : "no");
  if (c.c_constant) std::printf("c_constant = %.12g\n", *c.c_constant);
  if (c.bound_value) std::printf("bound      = %.12g\n", *c.bound_value);
  if (!c.sigma_ge_epsilon) std::printf("warning: sigma < epsilon (outside theorem hypothesis)\n");
}

json trace_to_json(const lqc::ChainTrace& t) {
  json j;
  j["V_S"] = t.V_S;
  j["V_Sc"] = t.V_Sc;
  j["eta_S"] = t.eta_S;
  j["eta_Sc"] = t.eta_Sc;
  j["tau"] = t.tau;
  j["mu"] = t.mu;
  j["Sigma"] = t.Sigma;
  if (std::isfinite(t.gamma)) j["gamma"] = t.gamma;
  j["error_l2"] = t.error_l2;
  j["trivial"] = t.trivial;
  j["normalized_regime"] = t.normalized_regime;
  j["all_pass"] = t.all_pass();
  json links = json::array();
  for (const auto& l : t.links) {
    json jl;
    jl["name"] = l.name;
    jl["lhs"] = l.lhs;
    jl["rhs"] = l.rhs;
    jl["margin"] = l.margin;
    jl["pass"] = l.pass;
    jl["applicable"] = l.applicable;
    links.push_back(std::move(jl));
  }
  j["links"] = std::move(links);
  return j;
}

void print_trace_table(const lqc::ChainTrace& t) {
  std::printf("error_l2 = %.12g  Sigma = %g  tau = %g  mu = %g\n", t.error_l2, t.Sigma, t.tau, t.mu);
  if (std::isfinite(t.gamma)) std::printf("gamma = %.12g\n", t.gamma);
  if (!t.normalized_regime)
    std::printf("note: off-support lq mass exceeds on-support mass (tau > 1)\n");
  for (const auto& l : t.links) {
    if (!l.applicable) {
      std::printf("%-22s n/a\n", l.name.c_str());
      continue;
    }
    std::printf("%-22s lhs=%-14.8g rhs=%-14.8g margin=%-11.3e %s\n", l.name.c_str(), l.lhs, l.rhs,
                l.margin, l.pass ? "pass" : "FAIL");
  }
  std::printf("chain: %s\n", t.all_pass() ? "all links pass" : "some links FAIL");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"lq recovery-bound toolkit: solve, certify, audit"};
  app.require_subcommand(1);
  std::string format = "table";

  // coherence
  auto* cmd_coh = app.add_subcommand("coherence", "mutual coherence of a dictionary");
  std::string coh_matrix;
  cmd_coh->add_option("matrix", coh_matrix, "CSV matrix file")->required();
  cmd_coh->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // solve
  auto* cmd_solve = app.add_subcommand("solve", "solve the constrained lq model");
  std::string sv_matrix, sv_y, sv_x0;
  double sv_sigma = 0.0, sv_q = 1.0;
  std::uint64_t sv_seed = 0;
  cmd_solve->add_option("--matrix", sv_matrix)->required();
  cmd_solve->add_option("--y", sv_y)->required();
  cmd_solve->add_option("--sigma", sv_sigma)->required();
  cmd_solve->add_option("--q", sv_q)->required();
  cmd_solve->add_option("--x0", sv_x0);
  cmd_solve->add_option("--seed", sv_seed);
  cmd_solve->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // bound
  auto* cmd_bound = app.add_subcommand("bound", "recovery-bound certificate");
  double b_q = 1.0, b_M = 0.0, b_gamma = 1.0, b_eps = 0.0, b_sigma = 0.0;
  int b_N = 1;
  cmd_bound->add_option("--q", b_q)->required();
  cmd_bound->add_option("--m-coherence", b_M)->required();
  cmd_bound->add_option("--n-sparsity", b_N)->required();
  cmd_bound->add_option("--gamma", b_gamma)->required();
  cmd_bound->add_option("--epsilon", b_eps);
  cmd_bound->add_option("--sigma", b_sigma);
  cmd_bound->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // gamma
  auto* cmd_gamma = app.add_subcommand("gamma", "tight gamma of an error vector");
  std::string g_error;
  double g_q = 0.5;
  int g_N = 1;
  cmd_gamma->add_option("--error", g_error)->required();
  cmd_gamma->add_option("--q", g_q)->required();
  cmd_gamma->add_option("--n-sparsity", g_N)->required();
  cmd_gamma->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // audit
  auto* cmd_audit = app.add_subcommand("audit", "audit the relaxation chain on a solution");
  std::string a_matrix, a_x0, a_xstar;
  double a_q = 1.0, a_eps = 0.0, a_sigma = 0.0;
  cmd_audit->add_option("--matrix", a_matrix)->required();
  cmd_audit->add_option("--x0", a_x0)->required();
  cmd_audit->add_option("--xstar", a_xstar)->required();
  cmd_audit->add_option("--q", a_q)->required();
  cmd_audit->add_option("--epsilon", a_eps)->required();
  cmd_audit->add_option("--sigma", a_sigma)->required();
  cmd_audit->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // compare
  auto* cmd_cmp = app.add_subcommand("compare", "lq vs l1 bound comparison");
  double c_q = 0.5, c_M = 0.1, c_gamma = 2.0;
  int c_N = 1;
  cmd_cmp->add_option("--q", c_q)->required();
  cmd_cmp->add_option("--m-coherence", c_M)->required();
  cmd_cmp->add_option("--n-sparsity", c_N)->required();
  cmd_cmp->add_option("--gamma", c_gamma)->required();
  cmd_cmp->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // lemmas
  auto* cmd_lem = app.add_subcommand("lemmas", "randomized inequality sweeps");
  int l_trials = 10000;
  std::optional<std::uint64_t> l_seed;
  cmd_lem->add_option("--trials", l_trials);
  cmd_lem->add_option("--seed", l_seed);
  cmd_lem->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  // experiment
  auto* cmd_exp = app.add_subcommand("experiment", "Monte Carlo certification run");
  std::string e_config;
  cmd_exp->add_option("--config", e_config)->required();
  cmd_exp->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }
  const bool as_json = format == "json";

  if (*cmd_coh) {
    const lqc::Dictionary A = lqc::normalize_columns(lqc::read_matrix_csv(coh_matrix));
    const double M = lqc::mutual_coherence(A);
    if (as_json) {
      json j{{"m", A.rows()}, {"n", A.cols()}, {"mutual_coherence", M}};
      std::cout << j.dump() << '\n';
    } else {
      std::printf("m = %ld, n = %ld\nmutual_coherence = %.12g\n", static_cast<long>(A.rows()),
                  static_cast<long>(A.cols()), M);
    }
    return 0;
  }

  if (*cmd_solve) {
    const lqc::Dictionary A = lqc::normalize_columns(lqc::read_matrix_csv(sv_matrix));
    const lqc::Vector y = lqc::read_vector_file(sv_y);
    std::optional<lqc::Vector> hint;
    if (!sv_x0.empty()) hint = lqc::read_vector_file(sv_x0);
    lqc::RecoveryProblem problem(A, lqc::Observation(y), sv_sigma, sv_q);
    lqc::SolverConfig cfg;
    cfg.seed = sv_seed;
    const lqc::RecoveryResult res = lqc::solve_constrained(problem, cfg, hint);
    if (as_json) {
      json j;
      j["x_star"] = std::vector<double>(res.x_star.data(), res.x_star.data() + res.x_star.size());
      j["residual"] = res.residual;
      j["objective"] = res.objective;
      j["converged"] = res.diagnostics.converged;
      j["active_constraint"] = res.diagnostics.active_constraint;
      j["penalty_weight"] = res.diagnostics.penalty_weight;
      j["inner_iterations"] = res.diagnostics.inner_iterations;
      std::cout << j.dump() << '\n';
    } else {
      std::printf("objective (||x||_q^q) = %.12g\nresidual = %.12g\nconverged = %s\nactive = %s\n",
                  res.objective, res.residual, res.diagnostics.converged ? "yes" : "no",
                  res.diagnostics.active_constraint ? "yes" : "no");
      for (Eigen::Index i = 0; i < res.x_star.size(); ++i)
        if (res.x_star[i] != 0.0) std::printf("  x[%ld] = %.12g\n", static_cast<long>(i), res.x_star[i]);
    }
    return res.diagnostics.converged ? 0 : 1;
  }

  if (*cmd_bound) {
    const lqc::BoundCertificate c = lqc::cq_constant(b_q, b_M, b_N, b_gamma, b_eps, b_sigma);
    if (as_json)
      std::cout << certificate_to_json(c).dump() << '\n';
    else
      print_certificate_table(c);
    return 0;
  }

  if (*cmd_gamma) {
    const lqc::Vector e = lqc::read_vector_file(g_error);
    const double gamma = lqc::gamma_of_error(e, g_q, g_N);
    const double up_half = lqc::gamma_upper_bound_qhalf(e, g_N);
    if (as_json) {
      json j{{"gamma", gamma},
             {"gamma_min", 1.0 / g_N},
             {"gamma_max", static_cast<double>(e.size()) / g_N},
             {"gamma_upper_bound_qhalf", up_half},
             {"gamma_gt_2_attainable", up_half > 2.0}};
      std::cout << j.dump() << '\n';
    } else {
      std::printf("gamma = %.12g (range [%g, %g])\n", gamma, 1.0 / g_N,
                  static_cast<double>(e.size()) / g_N);
      std::printf("q=1/2 gamma upper bound = %.12g (%s)\n", up_half,
                  up_half > 2.0 ? "gamma > 2 attainable" : "gamma > 2 not attainable");
    }
    return 0;
  }

  if (*cmd_audit) {
    const lqc::Dictionary A = lqc::normalize_columns(lqc::read_matrix_csv(a_matrix));
    const lqc::Vector x0 = lqc::read_vector_file(a_x0);
    const lqc::Vector xstar = lqc::read_vector_file(a_xstar);
    lqc::RecoveryResult res;
    res.x_star = xstar;
    res.residual = 0.0;
    res.objective = lqc::lq_power(xstar, a_q);
    const lqc::SparseSignal sig = lqc::SparseSignal::from_vector(x0);
    const lqc::ChainTrace t = lqc::audit_solution_chain(A, sig, res, a_q, a_eps, a_sigma);
    if (as_json)
      std::cout << trace_to_json(t).dump() << '\n';
    else
      print_trace_table(t);
    return 0;
  }

  if (*cmd_cmp) {
    const lqc::ModelComparison c = lqc::compare_models(c_q, c_M, c_N, c_gamma);
    const char* regime = c.regime == lqc::GammaRegime::EqualTwo
                             ? "gamma = 2"
                             : (c.regime == lqc::GammaRegime::AboveTwo ? "gamma > 2" : "gamma < 2");
    if (as_json) {
      json j;
      j["regime"] = regime;
      j["threshold_q"] = c.threshold_q;
      j["threshold_1"] = c.threshold_1;
      if (c.c_q) j["c_q"] = *c.c_q;
      if (c.c_1) j["c_1"] = *c.c_1;
      j["smaller_bound"] = c.smaller_bound;
      j["larger_threshold"] = c.larger_threshold;
      std::cout << j.dump() << '\n';
    } else {
      std::printf("regime: %s\n", regime);
      std::printf("threshold lq = %g, threshold l1 = %g (larger: %s)\n", c.threshold_q,
                  c.threshold_1, c.larger_threshold.c_str());
      if (c.c_q) std::printf("C_q = %.12g\n", *c.c_q);
      if (c.c_1) std::printf("C_1 = %.12g\n", *c.c_1);
      std::printf("smaller bound: %s\n", c.smaller_bound.c_str());
    }
    return 0;
  }

  if (*cmd_lem) {
    if (as_json && !l_seed) {
      std::cerr << "lemmas: --seed is required with --format json\n";
      return 2;
    }
    const auto reports = lqc::run_lemma_suites(l_trials, l_seed.value_or(0));
    bool all = true;
    json arr = json::array();
    for (const auto& r : reports) {
      all = all && r.pass();
      if (as_json) {
        arr.push_back(json{{"name", r.name},
                           {"trials", r.trials},
                           {"failures", r.failures},
                           {"worst_margin", r.worst_margin}});
      } else {
        std::printf("%-32s %d trials, %d failures, worst margin %.3e  %s\n", r.name.c_str(),
                    r.trials, r.failures, r.worst_margin, r.pass() ? "pass" : "FAIL");
      }
    }
    if (as_json) std::cout << json{{"all_pass", all}, {"suites", arr}}.dump() << '\n';
    return all ? 0 : 1;
  }

  if (*cmd_exp) {
    std::ifstream in(e_config);
    if (!in) throw lqc::FileError("cannot open " + e_config);
    json jc = json::parse(in);
    const lqc::ExperimentConfig cfg = lqc::experiment_config_from_json(jc);
    const lqc::ExperimentOutcome out = lqc::run_experiment(cfg);
    if (as_json)
      std::cout << out.summary.dump() << '\n';
    else
      std::cout << out.summary.dump(2) << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const lqc::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
