// Spectral-gap estimation: exact Gaussian gaps, Ritz monotonicity, a
// closed-form monomial pencil oracle, the Kelvin change of variables, and the
// Rayleigh-quotient consistency of poincare_check.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "ckn/closedform.hpp"
#include "ckn/poincare.hpp"
#include "support.hpp"

using namespace ckn;
using testsupport::rel_err;

namespace {

// Moment of the radial measure: int r^{p + power} e^{-delta r^alpha} dr.
double moment(double p, double power, double delta, double alpha) {
  return gamma_moment(p + power + 1.0, alpha, delta * alpha);
}

// Independent gap oracle in the raw monomial basis, exact moments throughout.
// Only trustworthy at small n where the monomial Gram matrix is well enough
// conditioned, which is exactly what makes it a useful cross-check.
double monomial_gap(const RadialMeasure& m, int ell, int n) {
  const double nu = m.variance_power();
  const double lam = angular_eigenvalue(ell, m.n_dim);
  const double dpow = m.n_dim - 1.0 - m.mu;
  const double vpow = m.n_dim - 1.0 - nu;
  std::vector<double> a(n * n), b(n * n);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) {
      double ajk, bjk;
      if (ell == 0) {
        ajk = j * k * moment(j + k - 2.0, dpow, m.delta, m.alpha);
        bjk = moment(j + k, vpow, m.delta, m.alpha) -
              moment(j, vpow, m.delta, m.alpha) * moment(k, vpow, m.delta, m.alpha) /
                  moment(0.0, vpow, m.delta, m.alpha);
      } else {
        ajk = (j * k + lam) * moment(j + k - 2.0, dpow, m.delta, m.alpha);
        bjk = moment(j + k, vpow, m.delta, m.alpha);
      }
      a[(j - 1) * n + (k - 1)] = ajk;
      b[(j - 1) * n + (k - 1)] = bjk;
    }
  }
  return smallest_eigenvalue(SymmetricPencil(n, std::move(a), std::move(b)));
}

ModeFunction random_radial(std::uint64_t seed, int n_dim) {
  return random_profile(seed, ProfileClass::Radial, n_dim, 2.0);
}

}  // namespace

TEST_CASE("gaussian measures have gap two over lambda squared") {
  for (int n_dim : {3, 5}) {
    for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
      const RadialMeasure m(1.0 / (lambda * lambda), 2.0, 0.0, n_dim);
      const double expected = 2.0 / (lambda * lambda);
      CHECK(rel_err(gap_estimate(m, 12), expected) < 1e-8);
      CHECK(rel_err(gap_estimate(m, 1, 1), expected) < 1e-8);
      CHECK(rel_err(gap_estimate(m, 0, 8), 2.0 * expected) < 1e-8);
    }
  }
}

TEST_CASE("the quadratic sector cannot carry the gaussian gap") {
  const RadialMeasure m(0.5, 2.0, 0.0, 4);
  const double full = gap_estimate(m, 10);
  const double ell2 = gap_estimate(m, 2, 8);
  CHECK(rel_err(ell2, 2.0) < 1e-8);  // 4 delta for the degree-two harmonics
  CHECK(ell2 > full * 1.5);
}

TEST_CASE("ritz estimates are monotone in the basis size") {
  const RadialMeasure m(1.5, 1.0, 0.0, 4);
  for (int ell : {0, 1}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 2; n <= 10; ++n) {
      const double g = gap_estimate(m, ell, n);
      CHECK(g > 0.0);
      CHECK(std::isfinite(g));
      CHECK(g <= prev + 1e-10 * (1.0 + std::abs(prev)));
      prev = g;
    }
  }
}

TEST_CASE("stieltjes assembly agrees with the exact-moment monomial pencil") {
  const RadialMeasure plain(0.7, 2.0, 0.0, 4);
  for (int n : {2, 3, 4}) {
    CHECK(rel_err(gap_estimate(plain, 0, n), monomial_gap(plain, 0, n)) < 1e-9);
    CHECK(rel_err(gap_estimate(plain, 1, n), monomial_gap(plain, 1, n)) < 1e-9);
  }
  const RadialMeasure weighted(1.1, 1.2, 1.0, 5);
  for (int n : {3, 4}) {
    const double oracle =
        std::min(monomial_gap(weighted, 0, std::max(n, 2)), monomial_gap(weighted, 1, n));
    CHECK(rel_err(weighted_gap_estimate(weighted, n), oracle) < 1e-9);
  }
}

TEST_CASE("weighted estimate reduces to the plain one and stays positive") {
  const RadialMeasure plain(0.8, 2.0, 0.0, 4);
  CHECK(weighted_gap_estimate(plain, 10) == gap_estimate(plain, 10));

  const RadialMeasure w1(2.0, 1.0, 1.0, 4);
  const double g = weighted_gap_estimate(w1, 10);
  CHECK(std::isfinite(g));
  CHECK(g > 0.0);
  CHECK(w1.gap_hypothesis());

  const RadialMeasure outside(2.0, 0.45, 1.0, 4);
  CHECK_FALSE(outside.gap_hypothesis());
  const double go = weighted_gap_estimate(outside, 6);
  CHECK(std::isfinite(go));
  CHECK(go > 0.0);
}

TEST_CASE("weighted gap dominates the kelvin-transported bound") {
  const RadialMeasure m(0.5, 2.0, 1.0, 4);
  const double lambda = m.kelvin_lambda();
  CHECK(lambda == 2.0);
  const RadialMeasure transported(m.delta, lambda * m.alpha, 0.0, m.n_dim);
  const double bound = gap_estimate(transported, 12) / (lambda * lambda);
  CHECK(weighted_gap_estimate(m, 12) >= bound * (1.0 - 1e-4));
}

TEST_CASE("kelvin transport is an identity for radial profiles") {
  struct Pair {
    int n_dim;
    double mu;
  };
  std::uint64_t seed = 41000;
  Rng rng(40999);
  for (Pair pm : {Pair{4, 1.0}, Pair{5, 2.0}, Pair{6, 0.5}}) {
    for (int trial = 0; trial < 10; ++trial) {
      const double alpha = rng.uniform(0.8, 2.5);
      const double delta = rng.uniform(0.3, 3.0);
      const RadialMeasure m(delta, alpha, pm.mu, pm.n_dim);
      const ModeFunction v = random_radial(seed++, pm.n_dim);

      const IdentityReport dir = kelvin_transform_check(v, m, 1e-9);
      CHECK(dir.pass);
      CHECK(dir.residual <= 1e-9);

      for (double c : {0.0, 1.0, -0.7}) {
        const IdentityReport var = kelvin_variance_check(v, m, c, 1e-9);
        CHECK(var.pass);
        CHECK(var.residual <= 1e-9);
      }
    }
  }
  // mu = 0 makes the transport the identity map.
  const RadialMeasure trivial(1.0, 2.0, 0.0, 4);
  const ModeFunction v = random_radial(seed, 4);
  CHECK(kelvin_transform_check(v, trivial).residual <= 1e-15);
  CHECK(kelvin_variance_check(v, trivial, 1.0).residual <= 1e-15);
}

TEST_CASE("coordinate function attains the gaussian gap exactly") {
  for (int n_dim : {3, 4, 5}) {
    const RadialMeasure m(1.0, 2.0, 0.0, n_dim);
    const PoincareReport rep = poincare_check(PolyMode(1, {0.0, 1.0}), m);
    CHECK(rel_err(rep.ratio, 2.0) < 1e-10);
  }
}

TEST_CASE("constants have zero variance and an infinite ratio") {
  const RadialMeasure m(1.0, 2.0, 0.0, 4);
  const PoincareReport rep = poincare_check(PolyMode(0, {3.0}), m);
  CHECK(rep.variance == 0.0);
  CHECK(std::isinf(rep.ratio));
}

TEST_CASE("variance centering is exact and shift invariant") {
  const RadialMeasure m(0.9, 2.0, 0.0, 5);
  const PoincareReport base = poincare_check(PolyMode(0, {0.0, 1.0, 0.4}), m);
  const PoincareReport shifted = poincare_check(PolyMode(0, {7.5, 1.0, 0.4}), m);
  CHECK(rel_err(base.variance, shifted.variance) < 1e-11);
  CHECK(rel_err(base.dirichlet, shifted.dirichlet) < 1e-12);
  CHECK(base.ratio >= 2.0 * 0.9 * (1.0 - 1e-10));
}

TEST_CASE("every rayleigh quotient dominates the ritz estimate") {
  const RadialMeasure gauss(0.5, 2.0, 0.0, 4);
  const double gap = gap_estimate(gauss, 14);
  std::uint64_t seed = 42000;
  for (int trial = 0; trial < 8; ++trial) {
    const ModeFunction v = random_profile(
        seed++, trial % 2 ? ProfileClass::Mode1 : ProfileClass::Radial, 4, 2.0);
    const PoincareReport rep = poincare_check(v, gauss);
    CHECK(rep.ratio >= gap * (1.0 - 1e-6));
  }
  for (const PolyMode& v : {PolyMode(0, {0.0, 1.0, 0.3, 0.0, 0.02}),
                            PolyMode(1, {0.0, 2.0, 0.0, 0.1}), PolyMode(0, {0.0, 0.0, 1.0})}) {
    CHECK(poincare_check(v, gauss).ratio >= gap * (1.0 - 1e-6));
  }

  const RadialMeasure expo(1.5, 1.0, 0.0, 4);
  const double gap1 = gap_estimate(expo, 14);
  for (const PolyMode& v : {PolyMode(0, {0.0, 1.0}), PolyMode(0, {0.0, 1.0, -0.2}),
                            PolyMode(1, {0.0, 1.0, 0.5}), PolyMode(1, {0.0, 3.0, 0.0, 0.1})}) {
    CHECK(poincare_check(v, expo).ratio >= gap1 * (1.0 - 1e-6));
  }
}

TEST_CASE("measure and input validation") {
  CHECK_THROWS_AS(RadialMeasure(0.0, 2.0, 0.0, 4), InvalidParams);
  CHECK_THROWS_AS(RadialMeasure(1.0, 0.0, 0.0, 4), InvalidParams);
  CHECK_THROWS_AS(RadialMeasure(1.0, 2.0, -0.1, 4), InvalidParams);
  CHECK_THROWS_AS(RadialMeasure(1.0, 2.0, 2.0, 4), InvalidParams);
  CHECK_THROWS_AS(RadialMeasure(1.0, 2.0, 0.0, 2), InvalidParams);

  const RadialMeasure weighted(1.0, 2.0, 1.0, 4);
  CHECK_THROWS_AS(gap_estimate(weighted, 8), InvalidParams);
  const RadialMeasure m(1.0, 2.0, 0.0, 4);
  CHECK_THROWS_AS(gap_estimate(m, 3, 4), InvalidParams);
  CHECK_THROWS_AS(gap_estimate(m, 0, 1), InvalidParams);
  CHECK_THROWS_AS(gap_estimate(m, 1, 17), InvalidParams);

  const ModeFunction mode1(1, RadialProfile({GaussPowerTerm(1.0, 1.0, 1.0, 2.0)}));
  CHECK_THROWS_AS(kelvin_transform_check(mode1, weighted), InvalidParams);
  CHECK_THROWS_AS(kelvin_variance_check(mode1, weighted, 0.0), InvalidParams);

  CHECK_THROWS_AS(PolyMode(0, {}), InvalidParams);
  CHECK_THROWS_AS(PolyMode(1, {1.0, 2.0}), InvalidParams);
  CHECK_THROWS_AS(PolyMode(2, {0.0, 1.0}), InvalidParams);
}
