#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lqcertify/core.hpp"

namespace lqc {

/// Admissibility certificate for the recovery bound at (q, M, N, gamma).
struct BoundCertificate {
  double q = 1.0;
  double M = 0.0;
  int N = 1;
  double gamma = 1.0;
  double threshold = 0.0;  // sparsity bound; +inf when M = 0
  bool admissible = false;
  std::optional<double> c_constant;   // present iff admissible
  std::optional<double> bound_value;  // c_constant * (epsilon + sigma)
  bool sigma_ge_epsilon = true;       // theorem hypothesis flag
};

namespace detail {

// 4^(1/q) / gamma^(2/q - 2); identically 4 at q = 1 and at gamma = 2.
inline double relaxation_factor(double q, double gamma) {
  return std::pow(4.0, 1.0 / q) / std::pow(gamma, 2.0 / q - 2.0);
}

}  // namespace detail

/// Tight gamma making ||e||_q = (gamma*N)^(1/q-1) ||e||_1 an equality;
/// lies in [1/N, n/N].
inline double gamma_of_error(const Vector& e, double q, int N) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("gamma_of_error: q must lie in (0,1)");
  if (N < 1) throw DomainError("gamma_of_error: N must be >= 1");
  detail::require_finite(e, "gamma_of_error");
  const double l1 = e.cwiseAbs().sum();
  if (l1 == 0.0) throw DomainError("gamma_of_error: e = 0 (perfect recovery, gamma undefined)");
  const double lq = lq_quasinorm(e, q);
  return std::pow(lq / l1, q / (1.0 - q)) / static_cast<double>(N);
}

/// Sparsity threshold gamma^(2/q-2) (M+1) / (4^(1/q) M); +inf when M = 0.
inline double sparsity_threshold(double q, double M, double gamma) {
  detail::require_q(q);
  if (M < 0.0 || M > 1.0) throw DomainError("sparsity_threshold: M must lie in [0,1]");
  if (!(gamma > 0.0)) throw DomainError("sparsity_threshold: gamma must be > 0");
  if (M == 0.0) return std::numeric_limits<double>::infinity();
  return (M + 1.0) / (detail::relaxation_factor(q, gamma) * M);
}

/// Full certificate for the bound ||x* - x0||_2 <= C_q(M,N,gamma) * (eps + sigma).
inline BoundCertificate cq_constant(double q, double M, int N, double gamma, double epsilon = 0.0,
                                    double sigma = 0.0) {
  detail::require_q(q);
  if (M < 0.0 || M > 1.0) throw DomainError("cq_constant: M must lie in [0,1]");
  if (N < 1) throw DomainError("cq_constant: N must be >= 1");
  if (!(gamma > 0.0)) throw DomainError("cq_constant: gamma must be > 0");
  if (epsilon < 0.0 || sigma < 0.0) throw DomainError("cq_constant: epsilon, sigma must be >= 0");

  BoundCertificate cert;
  cert.q = q;
  cert.M = M;
  cert.N = N;
  cert.gamma = gamma;
  cert.threshold = sparsity_threshold(q, M, gamma);
  cert.sigma_ge_epsilon = sigma >= epsilon;
  const double denom = 1.0 - M * (detail::relaxation_factor(q, gamma) * N - 1.0);
  cert.admissible = denom > 0.0;
  if (cert.admissible) {
    cert.c_constant = std::sqrt(1.0 / denom);
    cert.bound_value = *cert.c_constant * (epsilon + sigma);
  }
  return cert;
}

/// Reference constant C_0(M,N) = sqrt(1/(1 - M(2N-1))); nullopt when inadmissible.
inline std::optional<double> donoho_c0(double M, int N) {
  if (M < 0.0 || M > 1.0) throw DomainError("donoho_c0: M must lie in [0,1]");
  if (N < 1) throw DomainError("donoho_c0: N must be >= 1");
  const double denom = 1.0 - M * (2.0 * N - 1.0);
  if (denom <= 0.0) return std::nullopt;
  return std::sqrt(1.0 / denom);
}

/// Reference constant C_1(M,N) = sqrt(1/(1 - M(4N-1))); nullopt when inadmissible.
inline std::optional<double> donoho_c1(double M, int N) {
  if (M < 0.0 || M > 1.0) throw DomainError("donoho_c1: M must lie in [0,1]");
  if (N < 1) throw DomainError("donoho_c1: N must be >= 1");
  const double denom = 1.0 - M * (4.0 * N - 1.0);
  if (denom <= 0.0) return std::nullopt;
  return std::sqrt(1.0 / denom);
}

enum class GammaRegime { BelowTwo, EqualTwo, AboveTwo };

/// Side-by-side comparison of the lq and l1 bound constants and thresholds.
struct ModelComparison {
  GammaRegime regime = GammaRegime::EqualTwo;
  double threshold_q = 0.0;
  double threshold_1 = 0.0;
  std::optional<double> c_q;
  std::optional<double> c_1;
  std::string smaller_bound;     // "lq", "l1", "equal", or "n/a"
  std::string larger_threshold;  // "lq", "l1", or "equal"
};

inline ModelComparison compare_models(double q, double M, int N, double gamma) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("compare_models: q must lie in (0,1)");
  ModelComparison cmp;
  const double d = gamma - 2.0;
  cmp.regime = std::abs(d) <= 1e-12 ? GammaRegime::EqualTwo
                                    : (d > 0.0 ? GammaRegime::AboveTwo : GammaRegime::BelowTwo);
  cmp.threshold_q = sparsity_threshold(q, M, gamma);
  cmp.threshold_1 = sparsity_threshold(1.0, M, 1.0);
  const BoundCertificate cq = cq_constant(q, M, N, gamma);
  cmp.c_q = cq.c_constant;
  cmp.c_1 = donoho_c1(M, N);

  if (cmp.regime == GammaRegime::EqualTwo) {
    cmp.smaller_bound = "equal";
    cmp.larger_threshold = "equal";
  } else {
    cmp.larger_threshold = cmp.threshold_q > cmp.threshold_1 ? "lq"
                           : cmp.threshold_q < cmp.threshold_1 ? "l1"
                                                               : "equal";
    if (cmp.c_q && cmp.c_1)
      cmp.smaller_bound = *cmp.c_q < *cmp.c_1 ? "lq" : (*cmp.c_q > *cmp.c_1 ? "l1" : "equal");
    else if (cmp.c_q)
      cmp.smaller_bound = "lq";
    else if (cmp.c_1)
      cmp.smaller_bound = "l1";
    else
      cmp.smaller_bound = "n/a";
  }
  return cmp;
}

/// Largest gamma compatible with the q = 1/2 admissibility analysis:
/// sum_j |e_j|^(1/2) / (N * max_i |e_i|^(1/2)). Values > 2 mean the
/// gamma > 2 regime is attainable for this error vector.
inline double gamma_upper_bound_qhalf(const Vector& e, int N) {
  if (N < 1) throw DomainError("gamma_upper_bound_qhalf: N must be >= 1");
  detail::require_finite(e, "gamma_upper_bound_qhalf");
  const double amax = e.size() ? e.cwiseAbs().maxCoeff() : 0.0;
  if (amax == 0.0)
    throw DomainError("gamma_upper_bound_qhalf: e = 0 (not applicable)");
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) s += std::sqrt(std::abs(e[i]));
  return s / (static_cast<double>(N) * std::sqrt(amax));
}

}  // namespace lqc
