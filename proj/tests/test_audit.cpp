#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lqcertify/audit.hpp"
#include "lqcertify/bounds.hpp"
#include "lqcertify/harness.hpp"
#include "lqcertify/rng.hpp"

using namespace lqc;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

const LinkCheck* find_link(const ChainTrace& t, const std::string& name) {
  for (const auto& l : t.links)
    if (l.name == name) return &l;
  return nullptr;
}
}  // namespace

TEST_CASE("lemma 2 scalar check") {
  CHECK(check_lemma2(1.0, -1.0, 0.5).pass);  // cancellation: 0 + 1 >= 1
  CHECK(check_lemma2(2.0, 0.0, 0.7).pass);   // b = 0: equality
  std::mt19937_64 gen(derive_seed(13, 0));
  std::uniform_real_distribution<double> U(-10.0, 10.0), Q(0.02, 1.0);
  int failures = 0;
  for (int t = 0; t < 100000; ++t)
    if (!check_lemma2(U(gen), U(gen), Q(gen)).pass) ++failures;
  CHECK(failures == 0);
}

TEST_CASE("active-constraint check") {
  const Dictionary A = normalize_columns(Matrix::Identity(2, 2));
  RecoveryProblem p(A, Observation(vec({1, 0})), 0.5, 1.0);
  SolverConfig cfg;
  const RecoveryResult res = solve_constrained(p, cfg);
  CHECK(check_active_constraint(res, 0.5, 1e-6) == ActiveCheck::Pass);

  RecoveryProblem p2(A, Observation(vec({1, 0})), 2.0, 1.0);
  const RecoveryResult res2 = solve_constrained(p2, cfg);
  CHECK(check_active_constraint(res2, 2.0, 1e-6) == ActiveCheck::NotApplicable);

  RecoveryResult bad = res;
  bad.residual = 0.4;
  bad.diagnostics.active_constraint = true;
  CHECK(check_active_constraint(bad, 0.5, 1e-6) == ActiveCheck::Fail);

  RecoveryResult unconverged = res;
  unconverged.diagnostics.converged = false;
  CHECK_THROWS_AS(check_active_constraint(unconverged, 0.5, 1e-6), InputError);
}

TEST_CASE("chain audit: zero error passes trivially") {
  const Dictionary A = normalize_columns(Matrix::Identity(3, 3));
  const SparseSignal x0 = SparseSignal::from_vector(vec({1, 0, 0}));
  RecoveryResult res;
  res.x_star = x0.values;
  const ChainTrace t = audit_solution_chain(A, x0, res, 0.5, 0.01, 0.02);
  CHECK(t.trivial);
  CHECK(t.all_pass());
}

TEST_CASE("chain audit on converged solves") {
  ExperimentConfig ecfg;
  ecfg.seed = 99;
  ecfg.m = 16;
  ecfg.n = 32;
  ecfg.N = 2;
  ecfg.epsilon = 0.01;
  ecfg.sigma = 0.02;
  ecfg.dictionary_kind = DictionaryKind::TwoOrthoSpikesHadamard;
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = generate_instance(ecfg, trial);
    for (double q : {0.5, 1.0}) {
      RecoveryProblem p(inst.dictionary, inst.observation, ecfg.sigma, q);
      SolverConfig cfg;
      cfg.seed = derive_seed(1, static_cast<std::uint64_t>(trial));
      const RecoveryResult res = solve_constrained(p, cfg, inst.ground_truth.values);
      REQUIRE(res.diagnostics.converged);
      const ChainTrace t =
          audit_solution_chain(inst.dictionary, inst.ground_truth, res, q, ecfg.epsilon, ecfg.sigma);
      // descent and residual relaxation must hold for genuine minimizer candidates
      CHECK(find_link(t, "objective_descent")->pass);
      CHECK(find_link(t, "residual_relaxation")->pass);
      CHECK(find_link(t, "coherence_lower")->pass);
      CHECK(find_link(t, "l1_to_lq")->pass);
      if (t.normalized_regime) {
        const int N = inst.ground_truth.sparsity;
        CHECK(t.mu >= 1.0 - 1e-10);
        CHECK(t.mu <= std::pow(4.0, 1.0 / q) * std::pow(static_cast<double>(N), 2.0 / q - 1.0) + 1e-10);
      }
    }
  }
}

TEST_CASE("coherence chain holds for arbitrary error vectors") {
  std::mt19937_64 gen(derive_seed(13, 1));
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> Q(0.1, 0.95);
  for (int t = 0; t < 10000; ++t) {
    Matrix raw(4, 7);
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
      for (Eigen::Index i = 0; i < raw.rows(); ++i) raw(i, j) = g(gen);
    const Dictionary A = normalize_columns(raw);
    const double M = mutual_coherence(A);
    Vector e(7);
    for (Eigen::Index i = 0; i < 7; ++i) e[i] = g(gen);
    if (e.cwiseAbs().maxCoeff() == 0.0) e[0] = 1.0;
    const double q = Q(gen);
    const int N = 2;
    const double gamma = gamma_of_error(e, q, N);
    const double Ae2 = (A.entries() * e).squaredNorm();
    const double l1 = e.cwiseAbs().sum();
    const double lq = lq_quasinorm(e, q);
    const double lower1 = (1.0 + M) * e.squaredNorm() - M * l1 * l1;
    const double lower2 =
        (1.0 + M) * e.squaredNorm() - M / std::pow(gamma * N, 2.0 / q - 2.0) * lq * lq;
    CHECK(Ae2 >= lower1 - 1e-9 * std::max(1.0, std::abs(lower1)));
    CHECK(lower1 >= lower2 - 1e-9 * std::max(1.0, std::abs(lower2)));
  }
}

TEST_CASE("mu and eta ranges for split errors") {
  std::mt19937_64 gen(derive_seed(13, 2));
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> Q(0.1, 1.0);
  const Dictionary A = normalize_columns(Matrix::Identity(8, 8));
  int checked = 0;
  for (int t = 0; t < 5000; ++t) {
    Vector x0v = Vector::Zero(8);
    x0v[0] = 1.0;
    x0v[3] = -1.0;
    const SparseSignal x0 = SparseSignal::from_vector(x0v);
    Vector e(8);
    for (Eigen::Index i = 0; i < 8; ++i) e[i] = g(gen);
    const double q = Q(gen);
    RecoveryResult res;
    res.x_star = x0v + e;
    const ChainTrace tr = audit_solution_chain(A, x0, res, q, 0.0, 0.0);
    CHECK(tr.eta_S >= std::pow(2.0, 1.0 - 2.0 / q) - 1e-10);
    CHECK(tr.eta_S <= 1.0 + 1e-10);
    CHECK(tr.eta_Sc > 0.0);
    CHECK(tr.eta_Sc <= 1.0 + 1e-10);
    if (tr.normalized_regime) {
      ++checked;
      CHECK(tr.mu >= 1.0 - 1e-10);
      CHECK(tr.mu <= std::pow(4.0, 1.0 / q) * std::pow(2.0, 2.0 / q - 1.0) + 1e-10);
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("constructed support-split violation is flagged") {
  const Dictionary A = normalize_columns(Matrix::Identity(4, 4));
  const SparseSignal x0 = SparseSignal::from_vector(vec({1, 0, 0, 0}));
  RecoveryResult res;
  res.x_star = vec({1, 2, 2, 2});  // all error mass off-support
  const ChainTrace t = audit_solution_chain(A, x0, res, 0.5, 0.01, 0.02);
  const LinkCheck* split = find_link(t, "support_split");
  REQUIRE(split != nullptr);
  CHECK_FALSE(split->pass);
  CHECK_FALSE(t.normalized_regime);
  CHECK_FALSE(t.all_pass());
}

TEST_CASE("chain audit rejects dimension mismatch") {
  const Dictionary A = normalize_columns(Matrix::Identity(3, 3));
  const SparseSignal x0 = SparseSignal::from_vector(vec({1, 0, 0}));
  RecoveryResult res;
  res.x_star = vec({1, 0});
  CHECK_THROWS_AS(audit_solution_chain(A, x0, res, 0.5, 0.0, 0.0), InputError);
}
