#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid parameter values (exponents, coherence out of range, ...).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed data (non-finite entries, dimension mismatches, bad files).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kColumnNormTol = 1e-10;
inline constexpr double kDefaultZeroTolRel = 1e-8;

namespace detail {

// Pairwise reduction of |x_i|^q; stable for large n.
inline double pairwise_abs_pow_sum(const double* data, std::ptrdiff_t count, double q) {
  if (count <= 8) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < count; ++i) s += std::pow(std::abs(data[i]), q);
    return s;
  }
  const std::ptrdiff_t half = count / 2;
  return pairwise_abs_pow_sum(data, half, q) + pairwise_abs_pow_sum(data + half, count - half, q);
}

inline void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

inline void require_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0,1]");
}

}  // namespace detail

/// (sum_i |x_i|^q)^(1/q) for 0 < q <= 1.
inline double lq_quasinorm(const Vector& x, double q) {
  detail::require_q(q);
  detail::require_finite(x, "lq_quasinorm");
  if (x.size() == 0) return 0.0;
  const double s = detail::pairwise_abs_pow_sum(x.data(), x.size(), q);
  return std::pow(s, 1.0 / q);
}

/// Raised variant sum_i |x_i|^q, i.e. ||x||_q^q.
inline double lq_power(const Vector& x, double q) {
  detail::require_q(q);
  detail::require_finite(x, "lq_power");
  if (x.size() == 0) return 0.0;
  return detail::pairwise_abs_pow_sum(x.data(), x.size(), q);
}

/// Number of entries with |x_i| > zero_tol.
inline int l0_count(const Vector& x, double zero_tol) {
  if (zero_tol < 0.0) throw DomainError("zero_tol must be >= 0");
  detail::require_finite(x, "l0_count");
  int c = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > zero_tol) ++c;
  return c;
}

/// Support-detection tolerance: 1e-8 relative to ||x||_inf (absolute when x = 0).
inline double default_zero_tol(const Vector& x) {
  const double amax = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  return amax > 0.0 ? kDefaultZeroTolRel * amax : kDefaultZeroTolRel;
}

/// Column-normalized dictionary with cached Gram matrix.
class Dictionary {
public:
  explicit Dictionary(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
      throw InputError("Dictionary: empty matrix");
    if (!entries_.allFinite()) throw InputError("Dictionary: non-finite entry");
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double nrm = entries_.col(j).norm();
      if (std::abs(nrm - 1.0) > kColumnNormTol)
        throw InputError("Dictionary: column " + std::to_string(j) +
                         " is not unit-norm (||.||_2 = " + std::to_string(nrm) + ")");
    }
    gram_ = entries_.transpose() * entries_;
  }

  const Matrix& entries() const { return entries_; }
  const Matrix& gram() const { return gram_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }

private:
  Matrix entries_;
  Matrix gram_;
};

/// Divide each column by its l2 norm. Zero columns are rejected.
inline Dictionary normalize_columns(const Matrix& raw) {
  if (!raw.allFinite()) throw InputError("normalize_columns: non-finite entry");
  Matrix out = raw;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double nrm = out.col(j).norm();
    if (nrm == 0.0)
      throw InputError("normalize_columns: column " + std::to_string(j) + " has zero norm");
    out.col(j) /= nrm;
  }
  return Dictionary(std::move(out));
}

/// max_{i != j} |G(i,j)| with G the Gram matrix; lies in [0,1].
inline double mutual_coherence(const Dictionary& A) {
  if (A.cols() < 2) throw DomainError("mutual_coherence: need at least two columns");
  const Matrix& G = A.gram();
  double m = 0.0;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(G(i, j)));
  return std::min(m, 1.0);
}

/// Sparse signal with explicit support bookkeeping.
struct SparseSignal {
  Vector values;
  std::vector<int> support;  // sorted indices of entries above tolerance
  int sparsity = 0;          // N = |support|

  static SparseSignal from_vector(const Vector& x, std::optional<double> zero_tol = {}) {
    detail::require_finite(x, "SparseSignal");
    const double tol = zero_tol.value_or(default_zero_tol(x));
    SparseSignal s;
    s.values = x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) > tol) s.support.push_back(static_cast<int>(i));
    s.sparsity = static_cast<int>(s.support.size());
    return s;
  }
};

/// Observation y = y_clean + w with ||w||_2 <= epsilon (when noise is known).
struct Observation {
  Vector y;
  std::optional<Vector> y_clean;
  std::optional<Vector> noise;
  double epsilon = 0.0;

  Observation() = default;
  explicit Observation(Vector y_in, double eps = 0.0) : y(std::move(y_in)), epsilon(eps) {
    validate();
  }
  Observation(Vector clean, Vector w, double eps)
      : y(clean + w), y_clean(std::move(clean)), noise(std::move(w)), epsilon(eps) {
    validate();
  }

  void validate() const {
    detail::require_finite(y, "Observation.y");
    if (epsilon < 0.0) throw DomainError("Observation: epsilon must be >= 0");
    if (noise) {
      if (noise->norm() > epsilon + 1e-10)
        throw InputError("Observation: ||w||_2 exceeds epsilon");
      if (y_clean && ((*y_clean + *noise) - y).norm() > 1e-10)
        throw InputError("Observation: y != y_clean + w");
    }
  }
};

/// One instance of the noise-aware model: min ||x||_q s.t. ||y - Ax||_2 <= sigma.
struct RecoveryProblem {
  Dictionary dictionary;
  Observation observation;
  double sigma = 0.0;
  double q = 1.0;

  RecoveryProblem(Dictionary dict, Observation obs, double sigma_in, double q_in)
      : dictionary(std::move(dict)), observation(std::move(obs)), sigma(sigma_in), q(q_in) {
    if (sigma < 0.0) throw DomainError("RecoveryProblem: sigma must be >= 0");
    detail::require_q(q);
    if (observation.y.size() != dictionary.rows())
      throw InputError("RecoveryProblem: y length does not match dictionary rows");
  }
};

}  // namespace lqc
