#pragma once

// Adaptive quadrature for radial integrals on (0, infinity).
//
// The axis is mapped by r = exp(sinh(u)), which turns an integrand with
// r^p behavior at 0 (p > -1) and an integrable declared tail into a
// doubly-exponentially decaying function of u. A trapezoid rule in u is
// then refined by halving the step, reusing previous nodes, until two
// successive levels agree to the requested relative tolerance.
//
// Integrands built from Gauss-power expressions should supply log_evaluator
// (t -> f(e^t) e^t computed in log space); that keeps nodes meaningful far
// beyond the representable range of r itself, which matters when the
// exponent at zero is close to -1.

#include <cmath>
#include <functional>
#include <string>

#include "ckn/errors.hpp"

namespace ckn {

struct TailClass {
  enum class Kind { ExpPower, Power };
  Kind kind;
  double param;  // s > 0 for ExpPower (decay exp(-c r^s)), q < -1 for Power

  static TailClass exp_power(double s) { return {Kind::ExpPower, s}; }
  static TailClass power(double q) { return {Kind::Power, q}; }
};

struct Integrand {
  std::function<double(double)> evaluator;  // f(r), r > 0
  double zero_exponent = 0.0;               // f ~ r^zero_exponent as r -> 0, must be > -1
  TailClass tail = TailClass::exp_power(1.0);
  // Optional stable form: t -> f(e^t) * e^t. Used instead of evaluator when set.
  std::function<double(double)> log_evaluator;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
};

namespace detail {

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

inline constexpr double kTruncation = 1e-320;
inline constexpr double kAbsFloor = 1e-300;
inline constexpr double kHardUMax = 40.0;
inline constexpr int kMaxDepth = 12;

}  // namespace detail

inline QuadratureResult integrate_radial(const Integrand& f, double rel_tol = 1e-12) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw InvalidParams("integrate_radial: rel_tol must lie in (0,1)");
  if (!(f.zero_exponent > -1.0))
    throw NonIntegrable("integrate_radial: zero_exponent must exceed -1");
  if (f.tail.kind == TailClass::Kind::ExpPower) {
    if (!(f.tail.param > 0.0))
      throw NonIntegrable("integrate_radial: exp_power tail requires s > 0");
  } else {
    if (!(f.tail.param < -1.0))
      throw NonIntegrable("integrate_radial: power tail requires q < -1");
  }
  if (!f.evaluator && !f.log_evaluator)
    throw InvalidParams("integrate_radial: no evaluator supplied");

  long evals = 0;
  // Transformed integrand g(u) = f(r) r cosh(u) with r = exp(sinh(u)).
  auto g = [&](double u) -> double {
    const double t = std::sinh(u);
    const double ch = std::cosh(u);
    double v;
    if (f.log_evaluator) {
      ++evals;
      v = f.log_evaluator(t);
    } else {
      // Black-box path: r must be representable; beyond that the node
      // contribution is below the truncation threshold for the declared
      // exponents this path is used with.
      if (t > 709.0 || t < -709.0) return 0.0;
      const double r = std::exp(t);
      ++evals;
      v = f.evaluator(r) * r;
    }
    if (!std::isfinite(v)) {
      if (std::abs(t) > 350.0) return 0.0;  // spurious overflow far in a decaying tail
      throw NoConvergence("integrate_radial: non-finite integrand value near r = e^" +
                          std::to_string(t));
    }
    return v * ch;
  };

  // Sums g over u = j*h for j in side*{first, first+stride, ...}, stopping
  // after two consecutive nodes below the truncation threshold. The window
  // |u| < 2 is always surveyed so a bump away from u = 0 cannot be missed.
  auto sweep = [&](double h, double side, int stride, int first, detail::KahanSum& acc) {
    int small_run = 0;
    for (int j = first;; j += stride) {
      const double u = side * j * h;
      if (std::abs(u) > detail::kHardUMax) break;
      const double v = g(u);
      acc.add(v);
      if (std::abs(v) < detail::kTruncation) {
        if (++small_run >= 2 && std::abs(u) >= 2.0) break;
      } else {
        small_run = 0;
      }
    }
  };

  const double h0 = 0.5;
  detail::KahanSum base;
  base.add(g(0.0));
  sweep(h0, +1.0, 1, 1, base);
  sweep(h0, -1.0, 1, 1, base);
  double prev = h0 * base.s;

  for (int depth = 1; depth <= detail::kMaxDepth; ++depth) {
    const double h = h0 / double(1 << depth);
    detail::KahanSum odd;
    sweep(h, +1.0, 2, 1, odd);
    sweep(h, -1.0, 2, 1, odd);
    const double cur = 0.5 * prev + h * odd.s;
    const double diff = std::abs(cur - prev);
    if (diff <= std::max(rel_tol * std::abs(cur), detail::kAbsFloor)) {
      return {cur, diff, evals};
    }
    prev = cur;
  }
  throw NoConvergence("integrate_radial: no convergence at maximum refinement depth");
}

}  // namespace ckn
