#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lqcertify/bounds.hpp"
#include "lqcertify/rng.hpp"

using namespace lqc;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
}  // namespace

TEST_CASE("gamma_of_error: extreme and hand-computed values") {
  // single nonzero entry: gamma = 1/N
  CHECK(gamma_of_error(vec({5, 0, 0, 0}), 0.5, 2) == Catch::Approx(0.5).epsilon(1e-12));
  // all equal nonzero entries: gamma = n/N
  CHECK(gamma_of_error(vec({1, 1, 1, 1}), 0.5, 2) == Catch::Approx(2.0).epsilon(1e-12));
  // ||e||_{1/2} = (2+1)^2 = 9, ||e||_1 = 5, gamma = 9/5
  CHECK(gamma_of_error(vec({4, 1, 0, 0}), 0.5, 1) == Catch::Approx(1.8).epsilon(1e-12));

  CHECK_THROWS_AS(gamma_of_error(Vector::Zero(3), 0.5, 1), DomainError);
  CHECK_THROWS_AS(gamma_of_error(vec({1, 2}), 1.0, 1), DomainError);
}

TEST_CASE("gamma range and sandwich tightness on random vectors") {
  std::mt19937_64 gen(derive_seed(3, 0));
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> Q(0.05, 0.95);
  for (int t = 0; t < 2000; ++t) {
    std::uniform_int_distribution<int> dim(1, 12);
    Vector e(dim(gen));
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = g(gen);
    if (e.cwiseAbs().maxCoeff() == 0.0) e[0] = 1.0;
    const int n = static_cast<int>(e.size());
    std::uniform_int_distribution<int> Nd(1, n);
    const int N = Nd(gen);
    const double q = Q(gen);
    const double gamma = gamma_of_error(e, q, N);
    CHECK(gamma >= 1.0 / N - 1e-12);
    CHECK(gamma <= static_cast<double>(n) / N + 1e-12);
    const double lhs = std::pow(gamma * N, 1.0 / q - 1.0) * e.cwiseAbs().sum();
    const double rhs = lq_quasinorm(e, q);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("sparsity_threshold examples") {
  CHECK(sparsity_threshold(1.0, 0.2, 7.0) == Catch::Approx(1.5).epsilon(1e-12));
  CHECK(sparsity_threshold(0.5, 0.2, 2.0) == Catch::Approx(1.5).epsilon(1e-12));
  CHECK(sparsity_threshold(0.5, 0.2, 4.0) == Catch::Approx(6.0).epsilon(1e-12));
  CHECK(std::isinf(sparsity_threshold(0.5, 0.0, 2.0)));
}

TEST_CASE("cq_constant examples") {
  const BoundCertificate a = cq_constant(1.0, 0.1, 2, 3.7);
  REQUIRE(a.admissible);
  CHECK(*a.c_constant == Catch::Approx(std::sqrt(1.0 / 0.3)).epsilon(1e-12));

  const BoundCertificate b = cq_constant(0.5, 0.1, 2, 2.0);
  REQUIRE(b.admissible);
  CHECK(*b.c_constant == Catch::Approx(*a.c_constant).epsilon(1e-12));

  const BoundCertificate c = cq_constant(1.0, 0.2, 2, 1.0);
  CHECK_FALSE(c.admissible);
  CHECK_FALSE(c.c_constant.has_value());
  CHECK_FALSE(c.bound_value.has_value());

  const BoundCertificate d = cq_constant(0.5, 0.1, 2, 2.0, 0.01, 0.02);
  CHECK(*d.bound_value == Catch::Approx(*d.c_constant * 0.03).epsilon(1e-14));

  CHECK_THROWS_AS(cq_constant(0.5, 1.5, 2, 2.0), DomainError);
}

TEST_CASE("donoho constants") {
  CHECK(*donoho_c0(0.1, 2) == Catch::Approx(std::sqrt(1.0 / 0.7)).epsilon(1e-12));
  CHECK(*donoho_c0(0.0, 5) == Catch::Approx(1.0));
  CHECK_FALSE(donoho_c0(0.5, 2).has_value());
  CHECK(*donoho_c1(0.1, 2) == Catch::Approx(std::sqrt(1.0 / 0.3)).epsilon(1e-12));
}

TEST_CASE("q = 1 reduction and gamma = 2 collapse on grids") {
  for (int mi = 1; mi <= 10; ++mi) {
    const double M = 0.01 * mi;
    for (int N = 1; N <= 10; ++N) {
      const auto c1 = donoho_c1(M, N);
      for (double gamma : {0.5, 1.0, 2.0, 3.7, 9.0}) {
        const BoundCertificate cert = cq_constant(1.0, M, N, gamma);
        CHECK(cert.admissible == c1.has_value());
        if (c1) CHECK(std::abs(*cert.c_constant - *c1) <= 1e-12);
      }
      for (double q : {0.2, 0.4, 0.5, 0.6, 0.8}) {
        const BoundCertificate cert = cq_constant(q, M, N, 2.0);
        CHECK(cert.admissible == c1.has_value());
        if (c1) CHECK(std::abs(*cert.c_constant - *c1) <= 1e-12);
      }
    }
  }
}

TEST_CASE("monotonicity in gamma") {
  for (double q : {0.3, 0.5, 0.7}) {
    double prev_c = std::numeric_limits<double>::infinity();
    double prev_t = 0.0;
    for (double gamma = 2.0; gamma <= 6.0; gamma += 0.5) {
      const double t = sparsity_threshold(q, 0.1, gamma);
      CHECK(t > prev_t);
      prev_t = t;
      const BoundCertificate c = cq_constant(q, 0.1, 2, gamma);
      if (c.admissible) {
        CHECK(*c.c_constant < prev_c);
        prev_c = *c.c_constant;
      }
    }
  }
}

TEST_CASE("admissibility consistent with threshold") {
  std::mt19937_64 gen(derive_seed(3, 1));
  std::uniform_real_distribution<double> Q(0.05, 1.0), Md(0.01, 0.9), G(0.2, 8.0);
  std::uniform_int_distribution<int> Nd(1, 12);
  for (int t = 0; t < 2000; ++t) {
    const double q = Q(gen), M = Md(gen), gamma = G(gen);
    const int N = Nd(gen);
    const BoundCertificate c = cq_constant(q, M, N, gamma);
    CHECK(c.admissible == (static_cast<double>(N) < c.threshold));
  }
}

TEST_CASE("compare_models three-way classification") {
  const ModelComparison eq = compare_models(0.5, 0.1, 2, 2.0);
  CHECK(eq.regime == GammaRegime::EqualTwo);
  CHECK(eq.smaller_bound == "equal");
  CHECK(eq.larger_threshold == "equal");

  const ModelComparison above = compare_models(0.5, 0.1, 2, 3.0);
  CHECK(above.regime == GammaRegime::AboveTwo);
  CHECK(above.smaller_bound == "lq");
  CHECK(above.larger_threshold == "lq");

  const ModelComparison below = compare_models(0.5, 0.1, 2, 1.5);
  CHECK(below.regime == GammaRegime::BelowTwo);
  CHECK(below.smaller_bound == "l1");
}

TEST_CASE("gamma_upper_bound_qhalf") {
  CHECK(gamma_upper_bound_qhalf(vec({4, 1, 0, 0}), 1) == Catch::Approx(1.5).epsilon(1e-12));
  CHECK(gamma_upper_bound_qhalf(vec({1, 1, 1, 1}), 1) == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(gamma_upper_bound_qhalf(vec({9, 0}), 1) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_upper_bound_qhalf(Vector::Zero(2), 1), DomainError);
}
