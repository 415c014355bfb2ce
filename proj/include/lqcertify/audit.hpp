#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lqcertify/bounds.hpp"
#include "lqcertify/core.hpp"
#include "lqcertify/solvers.hpp"

namespace lqc {

struct LinkCheck {
  std::string name;
  double lhs = 0.0;   // inequality is lhs <= rhs
  double rhs = 0.0;
  double margin = 0.0;  // (rhs - lhs) / max(1, |rhs|)
  bool pass = false;
  bool applicable = true;

  static LinkCheck make(std::string name, double lhs, double rhs, double slack = 1e-10) {
    LinkCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = (rhs - lhs) / std::max(1.0, std::abs(rhs));
    c.pass = lhs <= rhs + slack * std::max(1.0, std::abs(rhs));
    return c;
  }
};

inline LinkCheck check_lemma2(double a, double b, double q) {
  detail::require_q(q);
  const double lhs = std::pow(std::abs(a), q);
  const double rhs = std::pow(std::abs(a + b), q) + std::pow(std::abs(b), q);
  LinkCheck c = LinkCheck::make("scalar_power_triangle", lhs, rhs, 1e-12);
  return c;
}

enum class ActiveCheck { Pass, Fail, NotApplicable };

/// Verify the boundary property |residual - sigma| <= tol * max(sigma, 1e-12).
inline ActiveCheck check_active_constraint(const RecoveryResult& result, double sigma, double tol) {
  if (!result.diagnostics.converged)
    throw InputError("check_active_constraint: result did not converge");
  if (!result.diagnostics.active_constraint && result.residual < sigma)
    return ActiveCheck::NotApplicable;  // zero-solution regime, ||y|| <= sigma
  return std::abs(result.residual - sigma) <= tol * std::max(sigma, 1e-12) ? ActiveCheck::Pass
                                                                           : ActiveCheck::Fail;
}

/// Intermediates of the relaxation chain plus per-link outcomes.
struct ChainTrace {
  double V_S = 0.0;
  double V_Sc = 0.0;
  double eta_S = 1.0;
  double eta_Sc = 1.0;
  double tau = 0.0;
  double mu = 1.0;
  double Sigma = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // NaN at q = 1 (cancels)
  double error_l2 = 0.0;
  bool trivial = false;           // e = 0
  bool normalized_regime = true;  // tau <= 1, i.e. the support split held
  std::vector<LinkCheck> links;

  bool all_pass() const {
    for (const auto& l : links)
      if (l.applicable && !l.pass) return false;
    return true;
  }
};

/// Evaluate every inequality of the relaxation argument on a concrete
/// (dictionary, ground truth, solver output) triple. Tightness margins show
/// where the looseness of the final bound accumulates.
inline ChainTrace audit_solution_chain(const Dictionary& A, const SparseSignal& x0,
                                       const RecoveryResult& result, double q, double epsilon,
                                       double sigma) {
  detail::require_q(q);
  if (result.x_star.size() != A.cols() || x0.values.size() != A.cols())
    throw InputError("audit_solution_chain: dimension mismatch");

  ChainTrace t;
  t.Sigma = epsilon + sigma;
  const Vector e = result.x_star - x0.values;
  t.error_l2 = e.norm();
  const int N = std::max(x0.sparsity, 1);

  if (t.error_l2 <= 1e-14) {
    t.trivial = true;
    t.links.push_back(LinkCheck::make("objective_descent", lq_power(result.x_star, q),
                                      lq_power(x0.values, q)));
    for (const char* name : {"support_split", "residual_relaxation", "coherence_lower",
                             "l1_to_lq", "mu_range_lower", "mu_range_upper", "final_bound"}) {
      LinkCheck c = LinkCheck::make(name, 0.0, 0.0);
      c.pass = true;
      t.links.push_back(std::move(c));
    }
    return t;
  }

  // split e by the ground-truth support
  Vector e_S = Vector::Zero(e.size());
  Vector e_Sc = e;
  for (int i : x0.support) {
    e_S[i] = e[i];
    e_Sc[i] = 0.0;
  }
  t.V_S = lq_power(e_S, q);
  t.V_Sc = lq_power(e_Sc, q);
  const double eS2 = e_S.squaredNorm();
  const double eSc2 = e_Sc.squaredNorm();
  t.eta_S = t.V_S > 0.0 ? eS2 / std::pow(t.V_S, 2.0 / q) : 1.0;
  t.eta_Sc = t.V_Sc > 0.0 ? eSc2 / std::pow(t.V_Sc, 2.0 / q) : 1.0;
  t.tau = t.V_S > 0.0 ? t.V_Sc / t.V_S : std::numeric_limits<double>::infinity();
  t.normalized_regime = t.V_S > 0.0 && t.tau <= 1.0 + 1e-12;

  const double M = mutual_coherence(A);
  const double l1 = e.cwiseAbs().sum();
  const double lqn = lq_quasinorm(e, q);
  const double Ae2 = (A.entries() * e).squaredNorm();
  const bool sub_unit = q < 1.0;
  t.gamma = sub_unit ? gamma_of_error(e, q, N) : std::numeric_limits<double>::quiet_NaN();
  // (gamma N)^(2/q-2); identically 1 at q = 1
  const double gn_pow = sub_unit ? std::pow(t.gamma * N, 2.0 / q - 2.0) : 1.0;

  // relaxed feasibility of x0: ||x0 + e||_q^q <= ||x0||_q^q
  t.links.push_back(
      LinkCheck::make("objective_descent", lq_power(result.x_star, q), lq_power(x0.values, q)));

  // support split: ||e||_q^q <= 2 sum_{i in S} |e_i|^q (optimality consequence)
  t.links.push_back(LinkCheck::make("support_split", t.V_S + t.V_Sc, 2.0 * t.V_S));

  // ||Ae||_2 <= Sigma
  t.links.push_back(LinkCheck::make("residual_relaxation", std::sqrt(Ae2), t.Sigma));

  // (1+M)||e||_2^2 - M||e||_1^2 <= ||Ae||_2^2 (holds for any e)
  t.links.push_back(LinkCheck::make("coherence_lower",
                                    (1.0 + M) * t.error_l2 * t.error_l2 - M * l1 * l1, Ae2));

  // ||e||_1^2 <= ||e||_q^2 / (gamma N)^(2/q-2)
  t.links.push_back(LinkCheck::make("l1_to_lq", l1 * l1, lqn * lqn / gn_pow));

  // mu = (1+tau)^(2/q) / (eta_S + eta_Sc tau^(2/q)) in [1, 4^(1/q) N^(2/q-1)];
  // only meaningful inside the proof's normalized regime.
  if (t.V_S > 0.0 && std::isfinite(t.tau)) {
    t.mu = std::pow(1.0 + t.tau, 2.0 / q) /
           (t.eta_S + t.eta_Sc * std::pow(t.tau, 2.0 / q));
    LinkCheck lo = LinkCheck::make("mu_range_lower", 1.0, t.mu);
    LinkCheck hi = LinkCheck::make("mu_range_upper", t.mu,
                                   std::pow(4.0, 1.0 / q) * std::pow(static_cast<double>(N), 2.0 / q - 1.0));
    lo.applicable = hi.applicable = t.normalized_regime;
    t.links.push_back(std::move(lo));
    t.links.push_back(std::move(hi));
  } else {
    LinkCheck na = LinkCheck::make("mu_range_lower", 0.0, 0.0);
    na.applicable = false;
    t.links.push_back(na);
    na.name = "mu_range_upper";
    t.links.push_back(na);
  }

  // end to end: ||e||_2^2 <= Sigma^2 / (1 - M(4^(1/q) N / gamma^(2/q-2) - 1))
  {
    const double gamma_eff = sub_unit ? t.gamma : 1.0;
    const BoundCertificate cert = cq_constant(q, M, N, gamma_eff, epsilon, sigma);
    LinkCheck fin;
    if (cert.admissible) {
      fin = LinkCheck::make("final_bound", t.error_l2 * t.error_l2,
                            (t.Sigma * t.Sigma) / (1.0 / (*cert.c_constant * *cert.c_constant)),
                            1e-9);
    } else {
      fin = LinkCheck::make("final_bound", 0.0, 0.0);
      fin.applicable = false;  // inadmissible certificate: theorem is silent
    }
    t.links.push_back(std::move(fin));
  }

  return t;
}

}  // namespace lqc
