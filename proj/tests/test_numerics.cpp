// Quadrature, gamma, scalar minimization, and pencil eigensolver checks.
// Closed-form values used here are classical integrals and eigenproblems
// solvable by hand; the 6x6 pencil case is checked against an independent
// determinant-bisection root finder implemented in this file.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ckn/eigen.hpp"
#include "ckn/gamma.hpp"
#include "ckn/minimize.hpp"
#include "ckn/quadrature.hpp"
#include "ckn/rng.hpp"

using namespace ckn;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-300});
}

// Gauss-power integrand r^k exp(-beta r^s / s) with a stable log-axis form.
Integrand gauss_power_integrand(double coeff, double k, double beta, double s) {
  Integrand f;
  f.zero_exponent = k;
  f.tail = TailClass::exp_power(s);
  f.evaluator = [=](double r) {
    return coeff * std::exp(k * std::log(r) - beta * std::pow(r, s) / s);
  };
  f.log_evaluator = [=](double t) {
    const double st = s * t;
    const double decay = (st > 709.0) ? -std::numeric_limits<double>::infinity()
                                      : beta * std::exp(st) / s;
    return coeff * std::exp((k + 1.0) * t - decay);
  };
  return f;
}

// Closed form for the integrand above: (s/beta)^((k+1)/s) Gamma((k+1)/s) / s.
double gauss_power_closed_form(double coeff, double k, double beta, double s) {
  const double x = (k + 1.0) / s;
  return coeff * std::exp(x * (std::log(s) - std::log(beta)) + log_gamma(x)) / s;
}

double det_lu(std::vector<double> m, int n) {
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(m[i * n + col]) > std::abs(m[piv * n + col])) piv = i;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(m[col * n + j], m[piv * n + j]);
      det = -det;
    }
    const double d = m[col * n + col];
    if (d == 0.0) return 0.0;
    det *= d;
    for (int i = col + 1; i < n; ++i) {
      const double f = m[i * n + col] / d;
      for (int j = col; j < n; ++j) m[i * n + j] -= f * m[col * n + j];
    }
  }
  return det;
}

// Smallest root of det(A - lambda B) by scan plus bisection.
double smallest_pencil_root(const std::vector<double>& a, const std::vector<double>& b,
                            int n, double hi) {
  auto det_at = [&](double lam) {
    std::vector<double> m(n * n);
    for (int i = 0; i < n * n; ++i) m[i] = a[i] - lam * b[i];
    return det_lu(std::move(m), n);
  };
  const int steps = 4000;
  double lo = 0.0;
  double f_lo = det_at(lo);
  for (int i = 1; i <= steps; ++i) {
    const double lam = hi * double(i) / steps;
    const double f = det_at(lam);
    if ((f_lo > 0.0) != (f > 0.0)) {
      double x0 = hi * double(i - 1) / steps, x1 = lam;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (x0 + x1);
        if ((det_at(x0) > 0.0) != (det_at(mid) > 0.0)) x1 = mid; else x0 = mid;
      }
      return 0.5 * (x0 + x1);
    }
    f_lo = f;
  }
  return hi;
}

}  // namespace

TEST_CASE("gamma function reproduces classical values") {
  CHECK(rel_err(gamma_fn(1.0), 1.0) < 1e-14);
  CHECK(rel_err(gamma_fn(0.5), std::sqrt(std::numbers::pi)) < 1e-14);
  CHECK(rel_err(gamma_fn(5.0), 24.0) < 1e-14);
  CHECK(rel_err(gamma_fn(1.5), 0.5 * std::sqrt(std::numbers::pi)) < 1e-14);
  CHECK(rel_err(gamma_fn(2.5), 0.75 * std::sqrt(std::numbers::pi)) < 1e-14);
  CHECK(rel_err(gamma_fn(3.5), 15.0 / 8.0 * std::sqrt(std::numbers::pi)) < 1e-14);
}

TEST_CASE("gamma recurrence Gamma(x+1) = x Gamma(x)") {
  for (double x : {0.1, 0.5, 1.7, 9.3}) {
    CHECK(rel_err(gamma_fn(x + 1.0), x * gamma_fn(x)) < 1e-13);
  }
}

TEST_CASE("gamma domain and overflow errors") {
  CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(gamma_fn(-2.5), DomainError);
  CHECK_THROWS_AS(gamma_fn(172.0), Overflow);
  CHECK(std::isfinite(gamma_fn(170.0)));
  CHECK(gamma_fn(170.0) > 1e300);
}

TEST_CASE("gamma agrees with its own integral representation") {
  for (double x : {0.3, 1.0, 2.2, 4.5, 7.0}) {
    Integrand f = gauss_power_integrand(1.0, x - 1.0, 1.0, 1.0);
    const QuadratureResult q = integrate_radial(f, 1e-12);
    CHECK(rel_err(q.value, gamma_fn(x)) < 1e-11);
  }
}

TEST_CASE("surface areas of unit spheres") {
  CHECK(rel_err(surface_area(2), 2.0 * std::numbers::pi) < 1e-13);
  CHECK(rel_err(surface_area(3), 4.0 * std::numbers::pi) < 1e-13);
  CHECK(rel_err(surface_area(4), 2.0 * std::numbers::pi * std::numbers::pi) < 1e-13);
  CHECK_THROWS_AS(surface_area(1), DomainError);
}

TEST_CASE("radial quadrature reproduces closed forms") {
  const double sqrt_pi = std::sqrt(std::numbers::pi);

  Integrand a = gauss_power_integrand(1.0, 2.0, 2.0, 2.0);  // r^2 e^{-r^2}
  CHECK(rel_err(integrate_radial(a, 1e-12).value, 0.25 * sqrt_pi) < 1e-11);

  Integrand b = gauss_power_integrand(1.0, 1.0, 2.0, 2.0);  // r e^{-r^2}
  CHECK(rel_err(integrate_radial(b, 1e-12).value, 0.5) < 1e-11);

  Integrand c = gauss_power_integrand(1.0, -0.5, 1.0, 1.0);  // r^{-1/2} e^{-r}
  CHECK(rel_err(integrate_radial(c, 1e-12).value, sqrt_pi) < 1e-11);

  // Power tail: r^2 / (1+r^2)^3 integrates to pi/16.
  Integrand d;
  d.zero_exponent = 2.0;
  d.tail = TailClass::power(-4.0);
  d.evaluator = [](double r) { return r * r / std::pow(1.0 + r * r, 3.0); };
  CHECK(rel_err(integrate_radial(d, 1e-12).value, std::numbers::pi / 16.0) < 1e-10);
}

TEST_CASE("quadrature result metadata is sane") {
  Integrand f = gauss_power_integrand(3.0, 0.0, 1.0, 2.0);
  const QuadratureResult q = integrate_radial(f, 1e-12);
  CHECK(q.abs_error_estimate >= 0.0);
  CHECK(q.evaluations >= 1);
  CHECK(q.abs_error_estimate <= 1e-10 * std::abs(q.value));
}

TEST_CASE("quadrature rejects non-integrable declarations") {
  Integrand f = gauss_power_integrand(1.0, 0.0, 1.0, 1.0);
  f.zero_exponent = -1.0;
  CHECK_THROWS_AS(integrate_radial(f, 1e-10), NonIntegrable);

  Integrand g;
  g.zero_exponent = 0.0;
  g.tail = TailClass::power(-1.0);
  g.evaluator = [](double r) { return 1.0 / (1.0 + r * r); };
  CHECK_THROWS_AS(integrate_radial(g, 1e-10), NonIntegrable);

  CHECK_THROWS_AS(integrate_radial(gauss_power_integrand(1.0, 0.0, 1.0, 1.0), 0.0),
                  InvalidParams);
}

TEST_CASE("quadrature reports failures instead of wrong numbers") {
  // Interior pole: the node at r = 1 evaluates non-finite.
  Integrand f;
  f.zero_exponent = 0.0;
  f.tail = TailClass::exp_power(1.0);
  f.evaluator = [](double r) { return std::exp(-r) / (r - 1.0); };
  CHECK_THROWS_AS(integrate_radial(f, 1e-10), NoConvergence);

  // Kink at r = 1 degrades convergence below the refinement budget.
  Integrand g;
  g.zero_exponent = 0.0;
  g.tail = TailClass::exp_power(1.0);
  g.evaluator = [](double r) { return std::max(0.0, 1.0 - r); };
  CHECK_THROWS_AS(integrate_radial(g, 1e-12), NoConvergence);
}

TEST_CASE("refinement stability: tolerance 1e-12 and 1e-10 agree") {
  Rng rng(20240811);
  for (int trial = 0; trial < 30; ++trial) {
    const double k = rng.uniform(-0.9, 3.0);
    const double beta = rng.uniform(0.3, 4.0);
    const double s = rng.uniform(0.8, 2.4);
    const double coeff = rng.uniform(0.1, 2.0);
    Integrand f = gauss_power_integrand(coeff, k, beta, s);
    const double tight = integrate_radial(f, 1e-12).value;
    const double loose = integrate_radial(f, 1e-10).value;
    CHECK(rel_err(tight, loose) < 1e-9);
    CHECK(rel_err(tight, gauss_power_closed_form(coeff, k, beta, s)) < 1e-10);
  }
}

TEST_CASE("quadrature is linear in the integrand") {
  Rng rng(77001);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 50; ++trial) {
    const double k1 = rng.uniform(-0.5, 2.5), k2 = rng.uniform(-0.5, 2.5);
    const double b1 = rng.uniform(0.3, 4.0), b2 = rng.uniform(0.3, 4.0);
    const double s1 = rng.uniform(0.8, 2.4), s2 = rng.uniform(0.8, 2.4);
    const double al = rng.uniform(-2.0, 2.0), be = rng.uniform(-2.0, 2.0);
    Integrand f = gauss_power_integrand(1.0, k1, b1, s1);
    Integrand g = gauss_power_integrand(1.0, k2, b2, s2);
    Integrand mix;
    mix.zero_exponent = std::min(k1, k2);
    mix.tail = TailClass::exp_power(std::min(s1, s2));
    mix.evaluator = [=](double r) { return al * f.evaluator(r) + be * g.evaluator(r); };
    mix.log_evaluator = [=](double t) {
      return al * f.log_evaluator(t) + be * g.log_evaluator(t);
    };
    const double if_ = integrate_radial(f, 1e-12).value;
    const double ig = integrate_radial(g, 1e-12).value;
    const double imix = integrate_radial(mix, 1e-12).value;
    const double combined = al * if_ + be * ig;
    if (std::abs(combined) < 0.05 * (std::abs(al * if_) + std::abs(be * ig)))
      continue;  // heavy cancellation says nothing about quadrature linearity
    ++checked;
    CHECK(rel_err(imix, combined) < 1e-11);
  }
  CHECK(checked == 50);
}

TEST_CASE("scalar minimizer finds interior minima") {
  auto quad = [](double x) { return (x - 2.0) * (x - 2.0) + 3.0; };
  MinimizeResult r = minimize_scalar(quad, 0.0, 10.0, 1e-10);
  CHECK(std::abs(r.argmin - 2.0) < 1e-8);
  CHECK(std::abs(r.value - 3.0) < 1e-14);

  MinimizeResult c = minimize_scalar([](double x) { return std::cos(x); }, 2.0, 4.0, 1e-10);
  CHECK(std::abs(c.argmin - std::numbers::pi) < 1e-8);

  CHECK_THROWS_AS(minimize_scalar(quad, 3.0, 1.0, 1e-10), InvalidParams);
}

TEST_CASE("log-axis minimizer localizes scale parameters") {
  MinimizeResult r = minimize_log_axis([](double b) {
    const double d = std::log(b) - std::log(7.0);
    return d * d;
  });
  CHECK(std::abs(r.argmin - 7.0) < 1e-6);

  MinimizeResult s = minimize_log_axis([](double b) { return b + 1.0 / b; });
  CHECK(std::abs(s.argmin - 1.0) < 1e-7);
  CHECK(std::abs(s.value - 2.0) < 1e-12);
}

TEST_CASE("pencil eigensolver on hand-solvable problems") {
  SymmetricPencil diag(2, {2.0, 0.0, 0.0, 5.0}, {1.0, 0.0, 0.0, 1.0});
  CHECK(rel_err(smallest_eigenvalue(diag), 2.0) < 1e-12);

  SymmetricPencil coupled(2, {2.0, 1.0, 1.0, 2.0}, {1.0, 0.0, 0.0, 1.0});
  CHECK(rel_err(smallest_eigenvalue(coupled), 1.0) < 1e-12);

  SymmetricPencil gen(2, {1.0, 0.0, 0.0, 10.0}, {4.0, 0.0, 0.0, 1.0});
  CHECK(rel_err(smallest_eigenvalue(gen), 0.25) < 1e-12);
}

TEST_CASE("pencil eigensolver matches determinant bisection on a 6x6 case") {
  const int n = 6;
  Rng rng(5150);
  std::vector<double> r(n * n), s(n * n);
  for (auto& x : r) x = rng.uniform(-1.0, 1.0);
  for (auto& x : s) x = rng.uniform(-1.0, 1.0);
  std::vector<double> a(n * n, 0.0), b(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        a[i * n + j] += r[k * n + i] * r[k * n + j];
        b[i * n + j] += s[k * n + i] * s[k * n + j];
      }
      if (i == j) {
        a[i * n + j] += 0.5;
        b[i * n + j] += 1.0;
      }
    }
  const double got = smallest_eigenvalue(SymmetricPencil(n, a, b));
  const double oracle = smallest_pencil_root(a, b, n, 50.0);
  CHECK(rel_err(got, oracle) < 1e-9);
}

TEST_CASE("pencil eigenvalues are congruence invariant") {
  const int n = 4;
  std::vector<double> a = {4, 1, 0, 0, 1, 3, 1, 0, 0, 1, 2, 1, 0, 0, 1, 5};
  std::vector<double> b = {2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 3, 0, 0, 0, 0, 1};
  std::vector<double> r = {1, 0.2, 0, 0, 0, 1, -0.3, 0, 0, 0, 1, 0.1, 0.2, 0, 0, 1};
  auto congruent = [&](const std::vector<double>& m) {
    std::vector<double> tmp(n * n, 0.0), out(n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) tmp[i * n + j] += m[i * n + k] * r[k * n + j];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out[i * n + j] += r[k * n + i] * tmp[k * n + j];
    return out;
  };
  const double lam = smallest_eigenvalue(SymmetricPencil(n, a, b));
  const double lam_c = smallest_eigenvalue(SymmetricPencil(n, congruent(a), congruent(b)));
  CHECK(rel_err(lam, lam_c) < 1e-8);
}

TEST_CASE("pencil validation errors") {
  CHECK_THROWS_AS(SymmetricPencil(2, {1, 2, 3, 4}, {1, 0, 0, 1}), InvalidParams);
  CHECK_THROWS_AS(SymmetricPencil(0, {}, {}), InvalidParams);
  SymmetricPencil bad_b(2, {1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, -1.0});
  CHECK_THROWS_AS(smallest_eigenvalue(bad_b), NotPositiveDefinite);
}
