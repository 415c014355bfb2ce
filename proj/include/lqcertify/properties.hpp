#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lqcertify/audit.hpp"
#include "lqcertify/bounds.hpp"
#include "lqcertify/core.hpp"
#include "lqcertify/rng.hpp"

namespace lqc {

struct PropertyReport {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();

  bool pass() const { return failures == 0; }
};

/// Randomized sweeps over the scalar and norm inequalities used by the
/// recovery bound's proof. All inequalities must hold on every draw.
inline std::vector<PropertyReport> run_lemma_suites(int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("run_lemma_suites: trials must be >= 1");
  std::vector<PropertyReport> reports;

  auto record = [](PropertyReport& r, bool ok, double margin) {
    ++r.trials;
    if (!ok) ++r.failures;
    r.worst_margin = std::min(r.worst_margin, margin);
  };

  {
    PropertyReport r{"scalar_power_triangle"};
    std::mt19937_64 gen(derive_seed(seed, 1));
    std::uniform_real_distribution<double> U(-10.0, 10.0), Q(0.05, 1.0);
    for (int t = 0; t < trials; ++t) {
      const LinkCheck c = check_lemma2(U(gen), U(gen), Q(gen));
      record(r, c.pass, c.margin);
    }
    reports.push_back(r);
  }

  auto random_vec = [](std::mt19937_64& gen, int max_n) {
    std::uniform_int_distribution<int> dim(1, max_n);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector x(dim(gen));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = g(gen);
    return x;
  };

  {
    PropertyReport r{"quasinorm_monotone_in_exponent"};
    std::mt19937_64 gen(derive_seed(seed, 2));
    std::uniform_real_distribution<double> Q(0.05, 1.0);
    for (int t = 0; t < trials; ++t) {
      const Vector x = random_vec(gen, 20);
      double q1 = Q(gen), q2 = Q(gen);
      if (q1 > q2) std::swap(q1, q2);
      const double hi = lq_quasinorm(x, q1), lo = lq_quasinorm(x, q2);
      const double margin = (hi - lo) / std::max(1.0, hi);
      record(r, lo <= hi + 1e-12 * std::max(1.0, hi), margin);
    }
    reports.push_back(r);
  }

  {
    PropertyReport r{"l1_lq_sandwich_gamma"};
    std::mt19937_64 gen(derive_seed(seed, 3));
    std::uniform_real_distribution<double> Q(0.05, 0.95);
    for (int t = 0; t < trials; ++t) {
      Vector e = random_vec(gen, 20);
      if (e.cwiseAbs().maxCoeff() == 0.0) e[0] = 1.0;
      const int n = static_cast<int>(e.size());
      std::uniform_int_distribution<int> Nd(1, n);
      const int N = Nd(gen);
      const double q = Q(gen);
      const double gamma = gamma_of_error(e, q, N);
      const double l1 = e.cwiseAbs().sum();
      const double lq = lq_quasinorm(e, q);
      const bool in_range = gamma >= 1.0 / N - 1e-12 && gamma <= static_cast<double>(n) / N + 1e-12;
      const double lower = std::pow(gamma * N, 1.0 / q - 1.0) * l1;
      const bool tight = std::abs(lower - lq) <= 1e-10 * std::max(1.0, lq);
      const double upper = std::pow(static_cast<double>(n), 1.0 / q - 1.0) * l1;
      const bool holder = lq <= upper + 1e-12 * std::max(1.0, upper);
      record(r, in_range && tight && holder, (upper - lq) / std::max(1.0, upper));
    }
    reports.push_back(r);
  }

  {
    PropertyReport r{"l1_l2_sandwich"};
    std::mt19937_64 gen(derive_seed(seed, 4));
    for (int t = 0; t < trials; ++t) {
      const Vector x = random_vec(gen, 20);
      const double l1 = x.cwiseAbs().sum(), l2 = x.norm();
      const double root_n = std::sqrt(static_cast<double>(x.size()));
      const bool ok = l2 <= l1 + 1e-12 * std::max(1.0, l1) &&
                      l1 <= root_n * l2 + 1e-12 * std::max(1.0, root_n * l2);
      record(r, ok, (root_n * l2 - l1) / std::max(1.0, root_n * l2));
    }
    reports.push_back(r);
  }

  return reports;
}

}  // namespace lqc
