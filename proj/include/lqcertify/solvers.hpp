#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lqcertify/core.hpp"

namespace lqc {

/// No x with ||Ax - y||_2 <= sigma exists (within the searched supports).
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int max_outer_iters = 80;       // penalty bisection steps
  int max_inner_iters = 2000;     // thresholding iterations per penalty value
  double residual_tol = 1e-8;     // relative, on |residual - sigma|
  double objective_tol = 1e-12;   // inner-loop stationarity
  int multistart_count = 8;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_outer_iters < 1 || max_inner_iters < 1) throw DomainError("SolverConfig: iteration budgets must be >= 1");
    if (residual_tol <= 0.0 || objective_tol <= 0.0) throw DomainError("SolverConfig: tolerances must be > 0");
    if (multistart_count < 1) throw DomainError("SolverConfig: multistart_count must be >= 1");
  }
};

struct SolverDiagnostics {
  double penalty_weight = 0.0;  // final lambda of the penalized subproblem
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  bool active_constraint = false;
};

struct RecoveryResult {
  Vector x_star;
  double residual = 0.0;   // ||A x* - y||_2
  double objective = 0.0;  // ||x*||_q^q
  SolverDiagnostics diagnostics;
  std::optional<Vector> error;  // x* - x_0 when ground truth known
};

/// Global minimizer of t -> weight*|t|^q + (t - v)^2 / 2.
inline double scalar_lq_prox(double v, double weight, double q) {
  detail::require_q(q);
  if (!(weight > 0.0)) throw DomainError("scalar_lq_prox: weight must be > 0");
  if (v == 0.0) return 0.0;
  const double av = std::abs(v);
  const double sgn = v > 0.0 ? 1.0 : -1.0;

  if (q == 1.0) return sgn * std::max(av - weight, 0.0);

  double t = 0.0;
  if (q == 0.5) {
    // Stationarity in s = sqrt(t): s^3 - av*s + weight/2 = 0; largest root is
    // the candidate minimizer (half-thresholding closed form).
    const double p = -av, r = weight / 2.0;
    const double disc = -4.0 * p * p * p - 27.0 * r * r;
    if (disc <= 0.0) return 0.0;
    const double arg = std::clamp(3.0 * r / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double s = 2.0 * std::sqrt(-p / 3.0) * std::cos(std::acos(arg) / 3.0);
    if (s <= 0.0) return 0.0;
    t = s * s;
  } else {
    // g(t) = t + weight*q*t^(q-1) - av is increasing past its minimum at t_inf;
    // bracket the outer root of g and bisect.
    const double t_inf = std::pow(weight * q * (1.0 - q), 1.0 / (2.0 - q));
    auto g = [&](double tt) { return tt + weight * q * std::pow(tt, q - 1.0) - av; };
    if (g(t_inf) > 0.0) return 0.0;
    double lo = t_inf, hi = std::max(av, t_inf * 2.0);
    while (g(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-17 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    t = 0.5 * (lo + hi);
  }

  const double f_t = weight * std::pow(t, q) + 0.5 * (t - av) * (t - av);
  const double f_0 = 0.5 * av * av;
  return f_t < f_0 ? sgn * t : 0.0;
}

namespace detail {

inline double largest_eigenvalue_gram(const Matrix& AtA) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(AtA, Eigen::EigenvaluesOnly);
  const double lambda = es.eigenvalues().maxCoeff();
  return std::max(lambda, 1e-12);
}

struct PenalizedWork {
  const Matrix& A;
  const Vector& y;
  Matrix AtA;
  Vector Aty;
  double step;  // 1/L

  PenalizedWork(const Matrix& A_in, const Vector& y_in)
      : A(A_in), y(y_in), AtA(A_in.transpose() * A_in), Aty(A_in.transpose() * y_in) {
    step = 1.0 / (largest_eigenvalue_gram(AtA) * (1.0 + 1e-9));
  }

  double residual(const Vector& x) const { return (A * x - y).norm(); }

  double penalized_value(const Vector& x, double w, double q) const {
    const double r = residual(x);
    return w * lq_power(x, q) + 0.5 * r * r;
  }

  // Proximal-gradient descent on w*||x||_q^q + 0.5*||Ax-y||^2.
  int descend(Vector& x, double w, double q, int max_iters, double obj_tol) const {
    double prev = penalized_value(x, w, q);
    int iters = 0;
    for (; iters < max_iters; ++iters) {
      const Vector u = x - step * (AtA * x - Aty);
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = scalar_lq_prox(u[i], w * step, q);
      const double cur = penalized_value(x, w, q);
      assert(cur <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
      if (std::abs(prev - cur) <= obj_tol * std::max(1.0, std::abs(cur))) {
        ++iters;
        break;
      }
      prev = cur;
    }
    return iters;
  }
};

inline std::vector<int> support_of(const Vector& x) {
  const double tol = default_zero_tol(x);
  std::vector<int> s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > tol) s.push_back(static_cast<int>(i));
  return s;
}

// Move x onto the residual sphere ||Ax - y|| = sigma, staying on its support
// (direction: toward the least-squares point of the support); falls back to
// rescaling the whole vector. Returns false when no real adjustment exists.
inline bool polish_to_boundary(Vector& x, const Matrix& A, const Vector& y, double sigma) {
  const std::vector<int> S = support_of(x);
  if (!S.empty()) {
    Matrix As(A.rows(), static_cast<Eigen::Index>(S.size()));
    Vector xs(static_cast<Eigen::Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) {
      As.col(static_cast<Eigen::Index>(k)) = A.col(S[k]);
      xs[static_cast<Eigen::Index>(k)] = x[S[k]];
    }
    const Vector xls = As.colPivHouseholderQr().solve(y);
    const Vector d = xls - xs;
    const Vector Ad = As * d;
    const Vector r = As * xs - y;
    const double a = Ad.squaredNorm();
    const double b = 2.0 * r.dot(Ad);
    const double c = r.squaredNorm() - sigma * sigma;
    if (a > 0.0) {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double t1 = (-b - sq) / (2.0 * a);
        const double t2 = (-b + sq) / (2.0 * a);
        const double t = std::abs(t1) <= std::abs(t2) ? t1 : t2;
        for (std::size_t k = 0; k < S.size(); ++k) x[S[k]] = xs[static_cast<Eigen::Index>(k)] + t * d[static_cast<Eigen::Index>(k)];
        return true;
      }
    }
  }
  // rescale alpha*x
  const Vector Ax = A * x;
  const double a = Ax.squaredNorm();
  if (a == 0.0) return false;
  const double b = -2.0 * y.dot(Ax);
  const double c = y.squaredNorm() - sigma * sigma;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  const double a1 = (-b - sq) / (2.0 * a);
  const double a2 = (-b + sq) / (2.0 * a);
  const double alpha = std::abs(a1 - 1.0) <= std::abs(a2 - 1.0) ? a1 : a2;
  x *= alpha;
  return true;
}

struct StartCandidate {
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  double penalty = 0.0;
  int outer = 0;
  int inner = 0;
  bool boundary_ok = false;
};

// One full penalty-bisection run from a given start point.
inline StartCandidate bisection_run(const PenalizedWork& work, Vector x0, double sigma, double q,
                                    const SolverConfig& cfg) {
  StartCandidate cand;
  const double w_scale = std::max(work.Aty.cwiseAbs().maxCoeff(), 1e-300);
  // sigma = 0 is the noiseless limit: absolute feasibility tolerance 1e-10
  const double target_abs = sigma > 0.0 ? cfg.residual_tol * sigma : 1e-10;

  Vector x = std::move(x0);
  double w_hi = w_scale;
  double r_hi;
  int inner = 0, outer = 0;
  // upper bracket: residual(w_hi) >= sigma
  for (;;) {
    inner += work.descend(x, w_hi, q, cfg.max_inner_iters, cfg.objective_tol);
    ++outer;
    r_hi = work.residual(x);
    if (r_hi >= sigma || w_hi > w_scale * 1e8) break;
    w_hi *= 4.0;
  }
  Vector x_hi = x;
  // lower bracket: residual(w_lo) <= sigma
  double w_lo = w_hi * 1e-6;
  double r_lo;
  for (;;) {
    inner += work.descend(x, w_lo, q, cfg.max_inner_iters, cfg.objective_tol);
    ++outer;
    r_lo = work.residual(x);
    if (r_lo <= sigma || w_lo < w_scale * 1e-30) break;
    w_lo /= 16.0;
  }
  Vector x_lo = x;
  if (r_lo > sigma) {
    // even the near-least-squares solution misses the ball
    cand.x = x_lo;
    cand.residual = r_lo;
    cand.objective = lq_power(x_lo, q);
    cand.penalty = w_lo;
    cand.outer = outer;
    cand.inner = inner;
    cand.boundary_ok = false;
    return cand;
  }

  Vector best = (std::abs(r_lo - sigma) < std::abs(r_hi - sigma)) ? x_lo : x_hi;
  double best_gap = std::min(std::abs(r_lo - sigma), std::abs(r_hi - sigma));
  double best_w = (std::abs(r_lo - sigma) < std::abs(r_hi - sigma)) ? w_lo : w_hi;
  x = x_lo;
  for (int it = 0; it < cfg.max_outer_iters && best_gap > 0.05 * target_abs; ++it) {
    const double w_mid = std::sqrt(w_lo * w_hi);
    inner += work.descend(x, w_mid, q, cfg.max_inner_iters, cfg.objective_tol);
    ++outer;
    const double r_mid = work.residual(x);
    if (std::abs(r_mid - sigma) < best_gap) {
      best_gap = std::abs(r_mid - sigma);
      best = x;
      best_w = w_mid;
    }
    if (r_mid <= sigma)
      w_lo = w_mid;
    else
      w_hi = w_mid;
  }

  polish_to_boundary(best, work.A, work.y, sigma);
  cand.x = best;
  cand.residual = work.residual(best);
  cand.objective = lq_power(best, q);
  cand.penalty = best_w;
  cand.outer = outer;
  cand.inner = inner;
  cand.boundary_ok = std::abs(cand.residual - sigma) <= target_abs;
  return cand;
}

}  // namespace detail

/// Solve P_{q,sigma}: min ||x||_q s.t. ||y - Ax||_2 <= sigma, by proximal
/// thresholding on the penalized form with a bisection on the penalty weight
/// driving the residual onto the constraint boundary. Multistart for q < 1.
inline RecoveryResult solve_constrained(const RecoveryProblem& problem, const SolverConfig& config,
                                        const std::optional<Vector>& hint = {}) {
  config.validate();
  const Matrix& A = problem.dictionary.entries();
  const Vector& y = problem.observation.y;
  const double sigma = problem.sigma;
  const double q = problem.q;
  const Eigen::Index n = A.cols();

  RecoveryResult res;
  if (y.norm() <= sigma + 1e-15) {
    // zero vector is feasible and has minimal quasi-norm
    res.x_star = Vector::Zero(n);
    res.residual = y.norm();
    res.objective = 0.0;
    res.diagnostics.converged = true;
    res.diagnostics.active_constraint = false;
    if (hint) res.error = res.x_star - *hint;
    return res;
  }

  detail::PenalizedWork work(A, y);
  const double target_abs = sigma > 0.0 ? config.residual_tol * sigma : 1e-10;

  std::vector<Vector> starts;
  if (hint) starts.push_back(*hint);
  starts.push_back(Vector::Zero(n));
  const Vector x_ls = A.colPivHouseholderQr().solve(y);
  starts.push_back(x_ls);
  std::mt19937_64 gen(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = std::max(x_ls.norm() / std::sqrt(static_cast<double>(n)), 1e-3);
  while (static_cast<int>(starts.size()) < config.multistart_count) {
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = scale * gauss(gen);
    starts.push_back(std::move(r));
  }
  if (static_cast<int>(starts.size()) > config.multistart_count)
    starts.resize(static_cast<std::size_t>(config.multistart_count));

  detail::StartCandidate best;
  bool have_boundary = false;
  int total_inner = 0, total_outer = 0;
  for (auto& s : starts) {
    detail::StartCandidate c = detail::bisection_run(work, s, sigma, q, config);
    total_inner += c.inner;
    total_outer += c.outer;
    const bool better = c.boundary_ok
                            ? (!have_boundary || c.objective < best.objective)
                            : (!have_boundary && c.objective < best.objective);
    if (better) {
      have_boundary = have_boundary || c.boundary_ok;
      best = std::move(c);
    }
  }

  // a feasible hint is itself a candidate; keeps the descent guarantee exact
  if (hint) {
    const double r_hint = work.residual(*hint);
    if (r_hint <= sigma + target_abs) {
      const double obj_hint = lq_power(*hint, q);
      if (!have_boundary || obj_hint < best.objective) {
        Vector xh = *hint;
        if (r_hint < sigma - target_abs) detail::polish_to_boundary(xh, A, y, sigma);
        const double r2 = work.residual(xh);
        const double o2 = lq_power(xh, q);
        if (std::abs(r2 - sigma) <= target_abs && o2 < best.objective) {
          best.x = std::move(xh);
          best.residual = r2;
          best.objective = o2;
          best.boundary_ok = true;
          have_boundary = true;
        }
      }
    }
  }

  res.x_star = best.x;
  res.residual = best.residual;
  res.objective = best.objective;
  res.diagnostics.penalty_weight = best.penalty;
  res.diagnostics.outer_iterations = total_outer;
  res.diagnostics.inner_iterations = total_inner;
  res.diagnostics.converged = best.boundary_ok;
  res.diagnostics.active_constraint = std::abs(best.residual - sigma) <= target_abs;
  if (hint) res.error = res.x_star - *hint;
  return res;
}

enum class OracleMode { L0, Lq };

namespace detail {

template <typename Fn>
void for_each_support(int n, int size, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (size == 0) {
    fn(idx);
    return;
  }
  for (;;) {
    fn(idx);
    int k = size - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - size + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

/// Exhaustive support enumeration on tiny instances: global reference for
/// P_{0,sigma} (L0 mode) and P_{q,sigma} (Lq mode).
inline RecoveryResult oracle_global(const RecoveryProblem& problem, int max_support,
                                    OracleMode mode = OracleMode::Lq,
                                    SolverConfig config = {}) {
  const Matrix& A = problem.dictionary.entries();
  const Vector& y = problem.observation.y;
  const double sigma = problem.sigma;
  const int n = static_cast<int>(A.cols());
  if (n > 14 || max_support > 6 || max_support < 1)
    throw DomainError("oracle_global: guarded to n <= 14, max_support in [1,6]");
  config.validate();

  const double feas_tol = 1e-10;

  auto ls_on = [&](const std::vector<int>& S, Vector& x_out) {
    Matrix As(A.rows(), static_cast<Eigen::Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(S[k]);
    const Vector z = As.colPivHouseholderQr().solve(y);
    x_out = Vector::Zero(n);
    for (std::size_t k = 0; k < S.size(); ++k) x_out[S[k]] = z[static_cast<Eigen::Index>(k)];
    return (As * z - y).norm();
  };

  RecoveryResult res;
  if (mode == OracleMode::L0) {
    for (int s = 0; s <= max_support; ++s) {
      std::optional<RecoveryResult> found;
      detail::for_each_support(n, s, [&](const std::vector<int>& S) {
        if (found) return;
        Vector x;
        const double r = s == 0 ? (x = Vector::Zero(n), y.norm()) : ls_on(S, x);
        if (r <= sigma + feas_tol) {
          RecoveryResult out;
          out.x_star = std::move(x);
          out.residual = r;
          out.objective = static_cast<double>(s);
          out.diagnostics.converged = true;
          found = std::move(out);
        }
      });
      if (found) return *found;
    }
    throw InfeasibleError("oracle_global: no support of size <= " + std::to_string(max_support) +
                          " attains residual <= sigma");
  }

  // Lq mode
  const double q = problem.q;
  bool any = false;
  double best_obj = std::numeric_limits<double>::infinity();
  if (y.norm() <= sigma + feas_tol) {
    res.x_star = Vector::Zero(n);
    res.residual = y.norm();
    res.objective = 0.0;
    res.diagnostics.converged = true;
    best_obj = 0.0;
    any = true;
  }
  for (int s = 1; s <= max_support; ++s) {
    detail::for_each_support(n, s, [&](const std::vector<int>& S) {
      Vector x_ls;
      const double r_ls = ls_on(S, x_ls);
      if (r_ls > sigma + feas_tol) return;  // support cannot reach the ball
      Matrix As(A.rows(), static_cast<Eigen::Index>(S.size()));
      for (std::size_t k = 0; k < S.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(S[k]);
      RecoveryProblem sub(Dictionary(As), Observation(y), sigma, q);
      RecoveryResult sub_res = solve_constrained(sub, config);
      Vector x_full = Vector::Zero(n);
      for (std::size_t k = 0; k < S.size(); ++k) x_full[S[k]] = sub_res.x_star[static_cast<Eigen::Index>(k)];
      const double obj = lq_power(x_full, q);
      if (obj < best_obj - 1e-12) {  // lexicographically earlier support wins ties
        best_obj = obj;
        res.x_star = std::move(x_full);
        res.residual = sub_res.residual;
        res.objective = obj;
        res.diagnostics = sub_res.diagnostics;
        any = true;
      }
    });
  }
  if (!any)
    throw InfeasibleError("oracle_global: no support of size <= " + std::to_string(max_support) +
                          " attains residual <= sigma");
  return res;
}

}  // namespace lqc
