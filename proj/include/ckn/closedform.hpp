#pragma once

// Closed-form norms of the extremal profiles v(r) = amp * exp(-(beta/y) r^y),
// y = b + 1 - a, against the power weights r^{-2b}, r^{-2a}, r^{-(a+b+1)}.
// Everything reduces to one Gamma-function moment.

#include <cmath>
#include <cstdint>

#include "ckn/errors.hpp"
#include "ckn/gamma.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

// int_0^inf r^{x-1} exp(-(beta/y) r^y) dr = (y/beta)^{x/y} Gamma(x/y) / y.
inline double gamma_moment(double x, double y, double beta) {
  if (!(x > 0.0)) throw DomainError("gamma_moment: requires x > 0");
  if (!(y > 0.0)) throw DomainError("gamma_moment: requires y > 0");
  if (!(beta > 0.0)) throw DomainError("gamma_moment: requires beta > 0");
  const double t = x / y;
  const double log_value = t * (std::log(y) - std::log(beta)) + log_gamma(t) - std::log(y);
  if (log_value > 709.782712893384) throw Overflow("gamma_moment: result overflows");
  return std::exp(log_value);
}

struct CknParams {
  int n_dim;
  double a;
  double b;

  CknParams(int n, double a_, double b_) : n_dim(n), a(a_), b(b_) {
    if (n < 3) throw InvalidParams("CknParams: requires dimension >= 3");
    if (!std::isfinite(a_) || !std::isfinite(b_))
      throw InvalidParams("CknParams: exponents must be finite");
  }

  double y() const { return b + 1.0 - a; }
  double sigma() const { return n_dim - 1.0 - a - b; }

  bool sharpness_regime() const {
    return b >= 0.0 && b < 0.5 * (n_dim - 2.0) && a <= n_dim * b / (n_dim - 2.0);
  }

  bool scale_aligned() const {
    const double target = 2.0 * b * n_dim / (n_dim - 2.0);
    return std::abs(a + b + 1.0 - target) <= 1e-12 * (1.0 + std::abs(target));
  }
};

// |N - 1 - a - b| / 2, the constant attained by the extremal family.
inline double ckn_sharp_constant(const CknParams& p) { return 0.5 * std::abs(p.sigma()); }

struct ExtremalNorms {
  double mid;     // int r^{-(a+b+1)} v^2 dx
  double a_norm;  // int r^{-2a} v^2 dx
  double grad;    // int r^{-2b} |del v|^2 dx
};

namespace detail {
inline void require_extremal_domain(const CknParams& p, double beta) {
  if (!(p.y() > 0.0)) throw InvalidParams("extremal profile: requires b + 1 - a > 0");
  if (!(beta > 0.0)) throw InvalidParams("extremal profile: requires beta > 0");
  if (!(p.sigma() > 0.0))
    throw NonIntegrable("extremal norms: mid moment needs N - a - b - 1 > 0");
  if (!(p.n_dim - 2.0 * p.a > 0.0))
    throw NonIntegrable("extremal norms: weight moment needs N - 2a > 0");
}
}  // namespace detail

inline ModeFunction extremal_profile(const CknParams& p, double beta, double amplitude = 1.0) {
  detail::require_extremal_domain(p, beta);
  if (amplitude == 0.0) throw InvalidParams("extremal profile: amplitude must be nonzero");
  return ModeFunction(0, RadialProfile({GaussPowerTerm(amplitude, 0.0, beta, p.y())}));
}

inline ExtremalNorms extremal_norms(const CknParams& p, double beta, double amplitude = 1.0) {
  detail::require_extremal_domain(p, beta);
  const double y = p.y();
  const double omega = surface_area(p.n_dim);
  const double amp2 = amplitude * amplitude;
  ExtremalNorms out{};
  out.mid = amp2 * omega * gamma_moment(p.n_dim - p.a - p.b - 1.0, y, 2.0 * beta);
  out.a_norm = amp2 * omega * gamma_moment(p.n_dim - 2.0 * p.a, y, 2.0 * beta);
  // del v = -amp beta r^{y-1} e^{-(beta/y) r^y} x/r, and -2b + 2(y-1) = -2a.
  out.grad = beta * beta * amp2 * omega * gamma_moment(p.n_dim - 2.0 * p.a, y, 2.0 * beta);
  return out;
}

}  // namespace ckn
