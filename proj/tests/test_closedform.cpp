// Closed-form moment formulas checked against the quadrature engine, and the
// product-equality of the extremal family verified both through the Gamma
// recurrence and through independently integrated norms.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ckn/closedform.hpp"
#include "ckn/reduction.hpp"
#include "ckn/rng.hpp"
#include "support.hpp"

using namespace ckn;
using testsupport::rel_err;

TEST_CASE("gamma_moment reproduces classical integrals") {
  CHECK(rel_err(gamma_moment(1.0, 1.0, 1.0), 1.0) < 1e-14);
  CHECK(rel_err(gamma_moment(4.0, 1.0, 1.0), 6.0) < 1e-14);
  CHECK(rel_err(gamma_moment(1.0, 2.0, 2.0), 0.5 * std::sqrt(std::numbers::pi)) < 1e-14);
  CHECK(rel_err(gamma_moment(2.0, 2.0, 1.0), 1.0) < 1e-14);
  CHECK(rel_err(gamma_moment(3.0, 2.0, 1.0), std::sqrt(0.5 * std::numbers::pi)) < 1e-14);
  CHECK_THROWS_AS(gamma_moment(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(gamma_moment(1.0, -2.0, 1.0), DomainError);
  CHECK_THROWS_AS(gamma_moment(1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(gamma_moment(1e6, 0.01, 1e-8), Overflow);
}

TEST_CASE("gamma_moment matches quadrature on random parameters") {
  Rng rng{240815};
  for (int trial = 0; trial < 30; ++trial) {
    const double x = rng.uniform(0.2, 8.0);
    const double y = rng.uniform(0.3, 3.0);
    const double beta = rng.uniform(0.2, 4.0);
    const QuadratureResult q =
        integrate_radial(make_integrand(WeightExpr::gauss(1.0, x - 1.0, beta, y)));
    CHECK(rel_err(gamma_moment(x, y, beta), q.value) < 1e-10);
  }
}

TEST_CASE("parameter flags and sharp constant") {
  // a + b + 1 = 2bN/(N-2) at N = 3, b = 0.3 gives a = 0.5.
  CknParams p(3, 0.5, 0.3);
  CHECK(p.scale_aligned());
  CHECK(p.sharpness_regime());
  CHECK(rel_err(p.y(), 0.8) < 1e-14);
  CHECK(rel_err(ckn_sharp_constant(p), 0.6) < 1e-13);

  CknParams inside(5, 0.1, 0.4);
  CHECK(inside.sharpness_regime());
  CknParams outside_b(5, 0.1, 1.6);  // b beyond (N-2)/2
  CHECK_FALSE(outside_b.sharpness_regime());
  CknParams outside_a(5, 1.0, 0.4);  // a beyond Nb/(N-2)
  CHECK_FALSE(outside_a.sharpness_regime());
  CHECK_FALSE(inside.scale_aligned());

  CHECK_THROWS_AS(CknParams(2, 0.0, 0.0), InvalidParams);
}

TEST_CASE("extremal norm preconditions") {
  CknParams bad_y(5, 1.3, 0.1);  // b + 1 - a < 0
  CHECK_THROWS_AS(extremal_norms(bad_y, 1.0), InvalidParams);
  CknParams bad_mid(3, -3.0, 5.5);  // N - a - b - 1 < 0 with y > 0
  CHECK_THROWS_AS(extremal_norms(bad_mid, 1.0), NonIntegrable);
  CknParams ok(5, 0.1, 0.4);
  CHECK_THROWS_AS(extremal_norms(ok, -1.0), InvalidParams);
  CHECK_THROWS_AS(extremal_profile(ok, 1.0, 0.0), InvalidParams);
}

namespace {

struct Draw {
  CknParams params;
  double beta;
  double amp;
};

Draw random_draw(Rng& rng) {
  const int n = 3 + static_cast<int>(rng.uniform_int(5));
  const double b = rng.uniform(0.0, 0.45 * (n - 2.0));
  const double a = n * b / (n - 2.0) - rng.uniform(0.0, 1.0);
  return {CknParams(n, a, b), rng.uniform(0.3, 4.0), rng.uniform(0.1, 2.0)};
}

}  // namespace

TEST_CASE("extremal norms match independent quadrature") {
  Rng rng{990031};
  for (int trial = 0; trial < 30; ++trial) {
    const Draw d = random_draw(rng);
    const CknParams& p = d.params;
    const ExtremalNorms closed = extremal_norms(p, d.beta, d.amp);
    const ModeFunction v = extremal_profile(p, d.beta, d.amp);
    const double mid_q =
        value_norm_sq(v, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), p.n_dim);
    const double a_q = value_norm_sq(v, WeightExpr::power(1.0, -2.0 * p.a), p.n_dim);
    const double grad_q = gradient_seminorm_sq(v, WeightExpr::power(1.0, -2.0 * p.b), p.n_dim);
    CHECK(rel_err(closed.mid, mid_q) < 1e-10);
    CHECK(rel_err(closed.a_norm, a_q) < 1e-10);
    CHECK(rel_err(closed.grad, grad_q) < 1e-10);
    CHECK(rel_err(closed.grad, d.beta * d.beta * closed.a_norm) < 1e-15);
  }
}

TEST_CASE("extremal family attains the sharp product constant") {
  Rng rng{551177};
  for (int trial = 0; trial < 30; ++trial) {
    const Draw d = random_draw(rng);
    const CknParams& p = d.params;
    const ExtremalNorms n = extremal_norms(p, d.beta, d.amp);
    const double lhs = std::sqrt(n.grad * n.a_norm);
    const double rhs = ckn_sharp_constant(p) * n.mid;
    CHECK(rel_err(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("quadrature route certifies equality, not just the closed forms") {
  Rng rng{730099};
  for (int trial = 0; trial < 8; ++trial) {
    const Draw d = random_draw(rng);
    const CknParams& p = d.params;
    const ModeFunction v = extremal_profile(p, d.beta, d.amp);
    const double mid_q =
        value_norm_sq(v, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), p.n_dim);
    const double a_q = value_norm_sq(v, WeightExpr::power(1.0, -2.0 * p.a), p.n_dim);
    const double grad_q = gradient_seminorm_sq(v, WeightExpr::power(1.0, -2.0 * p.b), p.n_dim);
    const double deficit = std::sqrt(grad_q * a_q) - ckn_sharp_constant(p) * mid_q;
    CHECK(std::abs(deficit) <= 1e-9 * mid_q);
  }
}
