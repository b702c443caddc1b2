#pragma once

// Scalar minimization: Brent's method on a bracket, plus a log-axis
// pre-scan helper for minimizing over a scale parameter beta.

#include <cmath>
#include <functional>

#include "ckn/errors.hpp"

namespace ckn {

struct MinimizeResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
};

// Minimizes f on [lo, hi]. Golden-section steps with parabolic acceleration;
// stops when the bracket width falls below rel_tol * (1 + |argmin|).
template <class F>
MinimizeResult minimize_scalar(F&& f, double lo, double hi, double rel_tol = 1e-10) {
  if (!(lo < hi)) throw InvalidParams("minimize_scalar: requires lo < hi");
  if (!(rel_tol > 0.0)) throw InvalidParams("minimize_scalar: rel_tol must be positive");
  const double gold = 0.3819660112501051;  // 2 - golden ratio
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 1; it <= 200; ++it) {
    const double tol = rel_tol * (1.0 + std::abs(x));
    if (b - a <= tol) return {x, fx, it};
    const double m = 0.5 * (a + b);
    bool golden = true;
    if (std::abs(e) > 0.5 * tol) {
      // Parabola through (x,fx), (w,fw), (v,fv).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        golden = false;
      }
    }
    if (golden) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    double u = (std::abs(d) >= 0.25 * tol)
                   ? x + d
                   : x + (d > 0.0 ? 0.25 * tol : -0.25 * tol);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  throw NoConvergence("minimize_scalar: iteration limit reached");
}

// Minimizes f(beta) for beta > 0. A coarse log-uniform scan over
// [lo, hi] (64 points) localizes a pocket, then Brent refines on the
// log axis inside the bracketing pair of scan points.
template <class F>
MinimizeResult minimize_log_axis(F&& f, double lo = 1e-6, double hi = 1e6,
                                 double rel_tol = 1e-10, int scan_points = 64) {
  if (!(lo > 0.0 && hi > lo)) throw InvalidParams("minimize_log_axis: bad bracket");
  if (scan_points < 3) throw InvalidParams("minimize_log_axis: need at least 3 scan points");
  const double t0 = std::log(lo), t1 = std::log(hi);
  const double dt = (t1 - t0) / (scan_points - 1);
  int best = 0;
  double best_val = f(lo);
  for (int i = 1; i < scan_points; ++i) {
    const double val = f(std::exp(t0 + i * dt));
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  const double ta = t0 + std::max(0, best - 1) * dt;
  const double tb = t0 + std::min(scan_points - 1, best + 1) * dt;
  auto on_log = [&](double t) { return f(std::exp(t)); };
  MinimizeResult r = minimize_scalar(on_log, ta, tb, rel_tol);
  return {std::exp(r.argmin), r.value, r.iterations};
}

}  // namespace ckn
