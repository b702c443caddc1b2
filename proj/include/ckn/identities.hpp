#pragma once

// The one-parameter family of weighted identities.
//
// For weights A, B define C = (AB)' + (N-1) AB / r - B^2. Then for decaying u
// and any alpha > 0,
//   alpha^2 int A^2 |del u|^2 + alpha^{-2} int B^2 u^2
//     = int (C + B^2) u^2 + int |alpha A del u + alpha^{-1} B u x/|x||^2,
// with a radial-derivative variant using Ru and a scalar remainder. At
// alpha = 1 (after cancelling int B^2 u^2) this is the Hardy form
//   int A^2 |del u|^2 = int C u^2 + remainder,
// and minimizing the left side over alpha gives the product form
//   ||A del u|| ||B u|| = 1/2 int (C + B^2) u^2 + 1/2 remainder(alpha*),
// at alpha*^2 = ||B u|| / ||A del u||.
//
// Presets c1..c8 are particular (A, B) choices; c5/c8 derive them from a
// Sturm-Liouville pair (V, W, phi) with (r^{N-1} V phi')' + r^{N-1} W phi = 0.

#include <cmath>
#include <string>
#include <vector>

#include "ckn/reduction.hpp"

namespace ckn {

struct ABPair {
  WeightExpr a;
  WeightExpr b;
  WeightExpr c;  // derived
  int n_dim = 0;
};

// Derives C symbolically and spot-checks it against finite differences of AB.
inline ABPair make_ab_pair(const WeightExpr& a, const WeightExpr& b, int n_dim) {
  if (n_dim < 3) throw InvalidParams("make_ab_pair: requires N >= 3");
  const WeightExpr ab = mul(a, b);
  WeightExpr c = derivative(ab);
  c = add(c, scale(mul(ab, WeightExpr::power(1.0, -1.0)), double(n_dim - 1)));
  c = add(c, scale(mul(b, b), -1.0));
  for (double r : {0.5, 1.0, 2.0}) {
    const double h = 1e-6 * (1.0 + r);
    const double fd = (eval(ab, r + h) - eval(ab, r - h)) / (2.0 * h);
    const double sym = eval(c, r) + eval(b, r) * eval(b, r) -
                       (n_dim - 1.0) * eval(ab, r) / r;
    const double scale_ = std::max({std::abs(fd), std::abs(sym), 1.0});
    if (std::abs(fd - sym) > 1e-6 * scale_)
      throw NoConvergence("make_ab_pair: symbolic C fails the finite-difference check");
  }
  return {a, b, std::move(c), n_dim};
}

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double remainder = 0.0;
  double residual = 0.0;
  bool pass = false;
};

enum class RemainderForm { Gradient, Radial };

namespace detail {

inline double seminorm_for_form(const ModeFunction& u, const WeightExpr& a2, int n_dim,
                                RemainderForm form, double rel_tol) {
  return form == RemainderForm::Gradient ? gradient_seminorm_sq(u, a2, n_dim, rel_tol)
                                         : radial_seminorm_sq(u, a2, n_dim, rel_tol);
}

inline double remainder_for_form(const ModeFunction& u, const ABPair& pair, double alpha,
                                 RemainderForm form, double rel_tol) {
  return form == RemainderForm::Gradient
             ? remainder_gradient(u, pair.a, pair.b, alpha, pair.n_dim, rel_tol)
             : remainder_radial(u, pair.a, pair.b, alpha, pair.n_dim, rel_tol);
}

inline IdentityReport finish_report(double lhs, double rhs, double remainder, double tol) {
  IdentityReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.remainder = remainder;
  rep.residual = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rep.pass = rep.residual <= tol;
  return rep;
}

}  // namespace detail

// alpha^2 int A^2 |del u|^2 + alpha^{-2} int B^2 u^2
//   vs int (C + B^2) u^2 + remainder(alpha).
inline IdentityReport general_identity_check(const ModeFunction& u, const ABPair& pair,
                                             double alpha, RemainderForm form,
                                             double tol = 1e-8,
                                             double rel_tol = kReductionTol) {
  if (!(alpha > 0.0)) throw InvalidParams("general_identity_check: requires alpha > 0");
  const double sem = detail::seminorm_for_form(u, mul(pair.a, pair.a), pair.n_dim, form, rel_tol);
  const double val = value_norm_sq(u, mul(pair.b, pair.b), pair.n_dim, rel_tol);
  const double lhs = alpha * alpha * sem + val / (alpha * alpha);
  const double mass =
      value_norm_sq(u, add(pair.c, mul(pair.b, pair.b)), pair.n_dim, rel_tol);
  const double remainder = detail::remainder_for_form(u, pair, alpha, form, rel_tol);
  return detail::finish_report(lhs, mass + remainder, remainder, tol);
}

// int A^2 |del u|^2 vs int C u^2 + remainder(1).
inline IdentityReport hardy_identity_check(const ModeFunction& u, const ABPair& pair,
                                           RemainderForm form, double tol = 1e-8,
                                           double rel_tol = kReductionTol) {
  const double lhs = detail::seminorm_for_form(u, mul(pair.a, pair.a), pair.n_dim, form, rel_tol);
  const double mass = value_norm_sq(u, pair.c, pair.n_dim, rel_tol);
  const double remainder = detail::remainder_for_form(u, pair, 1.0, form, rel_tol);
  return detail::finish_report(lhs, mass + remainder, remainder, tol);
}

// The alpha minimizing the general left side: alpha*^2 = ||Bu|| / ||A del u||.
inline double optimal_alpha(const ModeFunction& u, const ABPair& pair, RemainderForm form,
                            double rel_tol = kReductionTol) {
  const double sem = detail::seminorm_for_form(u, mul(pair.a, pair.a), pair.n_dim, form, rel_tol);
  const double val = value_norm_sq(u, mul(pair.b, pair.b), pair.n_dim, rel_tol);
  if (!(sem > 1e-280) || !(val > 1e-280))
    throw DegenerateNorm("optimal_alpha: a norm vanishes");
  return std::pow(val / sem, 0.25);
}

// ||A del u|| ||B u|| vs 1/2 int (C + B^2) u^2 + 1/2 remainder(alpha*).
inline IdentityReport ckn_identity_check(const ModeFunction& u, const ABPair& pair,
                                         RemainderForm form, double tol = 1e-8,
                                         double rel_tol = kReductionTol) {
  const double sem = detail::seminorm_for_form(u, mul(pair.a, pair.a), pair.n_dim, form, rel_tol);
  const double val = value_norm_sq(u, mul(pair.b, pair.b), pair.n_dim, rel_tol);
  if (!(sem > 1e-280) || !(val > 1e-280))
    throw DegenerateNorm("ckn_identity_check: a norm vanishes");
  const double alpha_star = std::pow(val / sem, 0.25);
  const double lhs = std::sqrt(sem) * std::sqrt(val);
  const double mass =
      value_norm_sq(u, add(pair.c, mul(pair.b, pair.b)), pair.n_dim, rel_tol);
  const double remainder = detail::remainder_for_form(u, pair, alpha_star, form, rel_tol);
  return detail::finish_report(lhs, 0.5 * mass + 0.5 * remainder, remainder, tol);
}

// ---------------------------------------------------------------------------
// Sturm-Liouville pairs for c5 / c8

struct BesselPair {
  WeightExpr v;    // single positive term
  WeightExpr w;
  WeightExpr phi;  // single positive term
};

// max over a log grid of the normalized ODE defect
// |(r^{N-1} V phi')' + r^{N-1} W phi| / (|...'| + |r^{N-1} W phi| + floor).
inline double bessel_residual(const BesselPair& pair, int n_dim, int grid_points = 81,
                              double r_lo = 1e-3, double r_hi = 1e3) {
  const WeightExpr rpow = WeightExpr::power(1.0, double(n_dim - 1));
  const WeightExpr flux = derivative(mul(rpow, mul(pair.v, derivative(pair.phi))));
  const WeightExpr mass = mul(rpow, mul(pair.w, pair.phi));
  const WeightExpr defect = add(flux, mass);
  double worst = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double r =
        std::exp(std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * i / (grid_points - 1));
    const double e = std::abs(eval(defect, r));
    const double denom = std::abs(eval(flux, r)) + std::abs(eval(mass, r)) + 1e-300;
    worst = std::max(worst, e / denom);
  }
  return worst;
}

// V = 1, W = ((N-2)/2)^2 r^{-2}, phi = r^{-(N-2)/2}.
inline BesselPair bessel_pair_inverse_square(int n_dim) {
  const double m = 0.5 * (n_dim - 2.0);
  return {WeightExpr::one(), WeightExpr::power(m * m, -2.0), WeightExpr::power(1.0, -m)};
}

// V = 1, W = N - r^2, phi = e^{-r^2/2}.
inline BesselPair bessel_pair_gaussian(int n_dim) {
  return {WeightExpr::one(),
          add(WeightExpr::power(double(n_dim), 0.0), WeightExpr::power(-1.0, 2.0)),
          WeightExpr::gauss(1.0, 0.0, 1.0, 2.0)};
}

// ---------------------------------------------------------------------------
// Presets

// c1: A = 1, B = (N-2)/(2r); C = B^2.
inline ABPair preset_c1(int n_dim) {
  return make_ab_pair(WeightExpr::one(), WeightExpr::power(0.5 * (n_dim - 2.0), -1.0),
                      n_dim);
}

// c2: A = r^{-lambda/2}, B = ((N-lambda-2)/2) r^{-lambda/2-1}; C = B^2.
inline ABPair preset_c2(int n_dim, double lambda) {
  return make_ab_pair(WeightExpr::power(1.0, -0.5 * lambda),
                      WeightExpr::power(0.5 * (n_dim - lambda - 2.0), -0.5 * lambda - 1.0),
                      n_dim);
}

// c3: A = 1, B = r; C = N - r^2.
inline ABPair preset_c3(int n_dim) {
  return make_ab_pair(WeightExpr::one(), WeightExpr::power(1.0, 1.0), n_dim);
}

// c4: A = sgn(N-1-a-b) r^{-b}, B = r^{-a};
// C = |N-1-a-b| r^{-a-b-1} - r^{-2a}. Needs a + b != N - 1.
inline ABPair preset_c4(int n_dim, double a, double b) {
  const double sigma = n_dim - 1.0 - a - b;
  if (sigma == 0.0) throw InvalidParams("preset_c4: requires a + b != N - 1");
  const double sign = sigma > 0.0 ? 1.0 : -1.0;
  return make_ab_pair(WeightExpr::power(sign, -b), WeightExpr::power(1.0, -a), n_dim);
}

// c5: A = sqrt(V), B = -(phi'/phi) sqrt(V); C then equals W by the ODE.
// The pair must certify against the ODE defect before use.
inline ABPair preset_c5(int n_dim, const BesselPair& pair, double certify_tol = 1e-10) {
  if (pair.v.terms.size() != 1 || !(pair.v.terms[0].coeff > 0.0))
    throw InvalidParams("preset_c5: V must be a single positive term");
  if (pair.phi.terms.size() != 1 || !(pair.phi.terms[0].coeff > 0.0))
    throw InvalidParams("preset_c5: phi must be a single positive term");
  const double defect = bessel_residual(pair, n_dim);
  if (!(defect <= certify_tol))
    throw InvalidParams("preset_c5: pair fails ODE certification, defect = " +
                        std::to_string(defect));
  const WeightExpr a = sqrt_single(pair.v);
  const WeightExpr b = scale(mul(log_derivative_single(pair.phi), a), -1.0);
  ABPair out = make_ab_pair(a, b, n_dim);
  // C must agree with the declared W wherever either is meaningfully sized.
  for (double r : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double c_val = eval(out.c, r);
    const double w_val = eval(pair.w, r);
    if (std::abs(c_val - w_val) > 1e-6 * std::max({std::abs(c_val), std::abs(w_val), 1.0}))
      throw InvalidParams("preset_c5: derived C does not match W");
  }
  return out;
}

// c6/c7/c8 share the weight pairs of c3/c4/c5; the distinction is which
// check (Hardy at alpha = 1, or the product form at alpha*) the caller runs.
inline ABPair preset_c6(int n_dim) { return preset_c3(n_dim); }

inline ABPair preset_c7(int n_dim, double a, double b) {
  if (!(b + 1.0 - a > 0.0)) throw InvalidParams("preset_c7: requires b + 1 - a > 0");
  return preset_c4(n_dim, a, b);
}

inline ABPair preset_c8(int n_dim, const BesselPair& pair, double certify_tol = 1e-10) {
  return preset_c5(n_dim, pair, certify_tol);
}

struct PresetParams {
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  BesselPair bessel;  // used by c5/c8; defaults are replaced by the caller
};

// String-keyed dispatcher used by the command-line surface.
inline ABPair preset(const std::string& name, int n_dim, const PresetParams& params) {
  if (name == "c1") return preset_c1(n_dim);
  if (name == "c2") return preset_c2(n_dim, params.lambda);
  if (name == "c3") return preset_c3(n_dim);
  if (name == "c4") return preset_c4(n_dim, params.a, params.b);
  if (name == "c5") return preset_c5(n_dim, params.bessel);
  if (name == "c6") return preset_c6(n_dim);
  if (name == "c7") return preset_c7(n_dim, params.a, params.b);
  if (name == "c8") return preset_c8(n_dim, params.bessel);
  throw UnknownPreset("preset: unknown name '" + name + "'");
}

// Whether a preset's natural check is the product (CKN) form.
inline bool preset_uses_product_form(const std::string& name) {
  return name == "c6" || name == "c7" || name == "c8";
}

}  // namespace ckn
