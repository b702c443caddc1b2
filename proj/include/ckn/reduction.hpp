#pragma once

// Reduction of N-dimensional integrals of mode functions u = f(|x|) sigma(x)
// (sigma = 1 or x_1/|x|) to one-dimensional radial quadratures.
//
// For mode ell the angular factor integrates to omega_ell (full sphere area
// for ell = 0, area/N for ell = 1), and
//   int w |u|^2 dx        = omega_ell int w f^2 r^{N-1} dr
//   int w |del u|^2 dx    = omega_ell int w (f'^2 + ell(ell+N-2) f^2/r^2) r^{N-1} dr
// Cross-mode inner products vanish identically, and are returned as exact
// zeros rather than integrated.

#include <cmath>
#include <optional>

#include "ckn/gamma.hpp"
#include "ckn/profiles.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

inline constexpr double kReductionTol = 1e-12;

struct WeightSpec {
  double p = 0.0;                      // weight |x|^{-p}
  std::optional<RadialProfile> extra;  // optional positive radial multiplier

  WeightExpr to_expr() const {
    WeightExpr w = WeightExpr::power(1.0, -p);
    if (extra) w = mul(w, to_weight_expr(*extra));
    return w;
  }
};

inline double mode_weight(int ell, int n_dim) {
  const double omega0 = surface_area(n_dim);
  return (ell == 0) ? omega0 : omega0 / n_dim;
}

inline double angular_eigenvalue(int ell, int n_dim) {
  return double(ell) * (double(ell) + n_dim - 2.0);
}

// int w u^2 dx
inline double value_norm_sq(const ModeFunction& u, const WeightExpr& w, int n_dim,
                            double rel_tol = kReductionTol) {
  const WeightExpr f = to_weight_expr(u.radial_part);
  const WeightExpr integrand = mul(mul(f, f), mul(w, WeightExpr::power(1.0, n_dim - 1.0)));
  return mode_weight(u.ell, n_dim) * integrate_radial(make_integrand(integrand), rel_tol).value;
}

inline double value_norm_sq(const ModeFunction& u, const WeightSpec& w, int n_dim,
                            double rel_tol = kReductionTol) {
  return value_norm_sq(u, w.to_expr(), n_dim, rel_tol);
}

// int w |Ru|^2 dx with Ru the radial derivative
inline double radial_seminorm_sq(const ModeFunction& u, const WeightExpr& w, int n_dim,
                                 double rel_tol = kReductionTol) {
  const WeightExpr fp = derivative(to_weight_expr(u.radial_part));
  const WeightExpr integrand = mul(mul(fp, fp), mul(w, WeightExpr::power(1.0, n_dim - 1.0)));
  return mode_weight(u.ell, n_dim) * integrate_radial(make_integrand(integrand), rel_tol).value;
}

inline double radial_seminorm_sq(const ModeFunction& u, const WeightSpec& w, int n_dim,
                                 double rel_tol = kReductionTol) {
  return radial_seminorm_sq(u, w.to_expr(), n_dim, rel_tol);
}

// The angular part of the gradient seminorm, integrated on its own:
// ell(ell+N-2) int w f^2 r^{N-3} dr (zero for radial modes).
inline double angular_gap(const ModeFunction& u, const WeightExpr& w, int n_dim,
                          double rel_tol = kReductionTol) {
  const double lam = angular_eigenvalue(u.ell, n_dim);
  if (lam == 0.0) return 0.0;
  const WeightExpr f = to_weight_expr(u.radial_part);
  const WeightExpr integrand = mul(mul(f, f), mul(w, WeightExpr::power(1.0, n_dim - 3.0)));
  return lam * mode_weight(u.ell, n_dim) *
         integrate_radial(make_integrand(integrand), rel_tol).value;
}

// int w |del u|^2 dx
inline double gradient_seminorm_sq(const ModeFunction& u, const WeightExpr& w, int n_dim,
                                   double rel_tol = kReductionTol) {
  const WeightExpr f = to_weight_expr(u.radial_part);
  const WeightExpr fp = derivative(f);
  WeightExpr density = mul(fp, fp);
  const double lam = angular_eigenvalue(u.ell, n_dim);
  if (lam != 0.0) density = add(density, scale(mul(mul(f, f), WeightExpr::power(1.0, -2.0)), lam));
  const WeightExpr integrand = mul(density, mul(w, WeightExpr::power(1.0, n_dim - 1.0)));
  return mode_weight(u.ell, n_dim) * integrate_radial(make_integrand(integrand), rel_tol).value;
}

inline double gradient_seminorm_sq(const ModeFunction& u, const WeightSpec& w, int n_dim,
                                   double rel_tol = kReductionTol) {
  return gradient_seminorm_sq(u, w.to_expr(), n_dim, rel_tol);
}

// 2 int A B u Ru dx: the alpha-independent cross term of the remainders.
inline double cross_term(const ModeFunction& u, const WeightExpr& a, const WeightExpr& b,
                         int n_dim, double rel_tol = kReductionTol) {
  const WeightExpr f = to_weight_expr(u.radial_part);
  const WeightExpr fp = derivative(f);
  const WeightExpr integrand =
      mul(mul(mul(a, b), mul(f, fp)), WeightExpr::power(1.0, n_dim - 1.0));
  return 2.0 * mode_weight(u.ell, n_dim) *
         integrate_radial(make_integrand(integrand), rel_tol).value;
}

// int |alpha A del u + alpha^{-1} B u x/|x||^2 dx, assembled from the three
// scalar integrals of its pointwise expansion.
inline double remainder_gradient(const ModeFunction& u, const WeightExpr& a,
                                 const WeightExpr& b, double alpha, int n_dim,
                                 double rel_tol = kReductionTol) {
  if (!(alpha > 0.0)) throw InvalidParams("remainder_gradient: requires alpha > 0");
  return alpha * alpha * gradient_seminorm_sq(u, mul(a, a), n_dim, rel_tol) +
         cross_term(u, a, b, n_dim, rel_tol) +
         value_norm_sq(u, mul(b, b), n_dim, rel_tol) / (alpha * alpha);
}

// int (alpha A Ru + alpha^{-1} B u)^2 dx, same three-integral assembly with
// the radial seminorm in place of the gradient one.
inline double remainder_radial(const ModeFunction& u, const WeightExpr& a,
                               const WeightExpr& b, double alpha, int n_dim,
                               double rel_tol = kReductionTol) {
  if (!(alpha > 0.0)) throw InvalidParams("remainder_radial: requires alpha > 0");
  return alpha * alpha * radial_seminorm_sq(u, mul(a, a), n_dim, rel_tol) +
         cross_term(u, a, b, n_dim, rel_tol) +
         value_norm_sq(u, mul(b, b), n_dim, rel_tol) / (alpha * alpha);
}

// int w u v dx; exact zero across modes by angular orthogonality. A product
// that cancels to near zero starves the relative stopping test, so on
// non-convergence the polarization identity trades it for two nonnegative
// squares.
inline double value_inner(const ModeFunction& u, const ModeFunction& v, const WeightExpr& w,
                          int n_dim, double rel_tol = kReductionTol) {
  if (u.ell != v.ell) return 0.0;
  const WeightExpr fu = to_weight_expr(u.radial_part);
  const WeightExpr fv = to_weight_expr(v.radial_part);
  const WeightExpr base = mul(w, WeightExpr::power(1.0, n_dim - 1.0));
  try {
    const WeightExpr integrand = mul(mul(fu, fv), base);
    return mode_weight(u.ell, n_dim) *
           integrate_radial(make_integrand(integrand), rel_tol).value;
  } catch (const NoConvergence&) {
    const WeightExpr plus = add(fu, fv);
    const WeightExpr minus = add(fu, scale(fv, -1.0));
    const double qp =
        integrate_radial(make_integrand(mul(mul(plus, plus), base)), rel_tol).value;
    const double qm =
        integrate_radial(make_integrand(mul(mul(minus, minus), base)), rel_tol).value;
    return mode_weight(u.ell, n_dim) * 0.25 * (qp - qm);
  }
}

// int w del u . del v dx; exact zero across modes. Same polarization fallback
// as value_inner, applied to the full Dirichlet density.
inline double gradient_inner(const ModeFunction& u, const ModeFunction& v,
                             const WeightExpr& w, int n_dim,
                             double rel_tol = kReductionTol) {
  if (u.ell != v.ell) return 0.0;
  const WeightExpr fu = to_weight_expr(u.radial_part);
  const WeightExpr fv = to_weight_expr(v.radial_part);
  const double lam = angular_eigenvalue(u.ell, n_dim);
  const WeightExpr base = mul(w, WeightExpr::power(1.0, n_dim - 1.0));
  const auto dirichlet_density = [&](const WeightExpr& f, const WeightExpr& g) {
    WeightExpr density = mul(derivative(f), derivative(g));
    if (lam != 0.0)
      density = add(density, scale(mul(mul(f, g), WeightExpr::power(1.0, -2.0)), lam));
    return density;
  };
  try {
    const WeightExpr integrand = mul(dirichlet_density(fu, fv), base);
    return mode_weight(u.ell, n_dim) *
           integrate_radial(make_integrand(integrand), rel_tol).value;
  } catch (const NoConvergence&) {
    const WeightExpr plus = add(fu, fv);
    const WeightExpr minus = add(fu, scale(fv, -1.0));
    const double qp =
        integrate_radial(make_integrand(mul(dirichlet_density(plus, plus), base)), rel_tol)
            .value;
    const double qm =
        integrate_radial(make_integrand(mul(dirichlet_density(minus, minus), base)),
                         rel_tol)
            .value;
    return mode_weight(u.ell, n_dim) * 0.25 * (qp - qm);
  }
}

// ---------------------------------------------------------------------------
// Factorized (ground-state substitution) remainder forms.
//
// Each identity's remainder can also be written as a single weighted
// Dirichlet integral of v = u * m with a ground-state multiplier m. These
// serve as independent squared-form counterparts to the assembled
// remainders above; exponential factors merge symbolically, so the growing
// multiplier never overflows.

enum class FactorizedPreset { C2Grad, C2Radial, C6, Hup1, Ckn1 };

struct FactorizedParams {
  double lambda = 0.0;  // c2 family exponent
  double a = 0.0;       // ckn1 value-weight exponent
  double b = 0.0;       // ckn1 gradient-weight exponent
};

namespace detail {

// omega_ell int w (v'^2 [+ ell(ell+N-2) v^2/r^2]) r^{N-1} dr for v given as
// a weight expression; radial_only drops the angular block.
inline double factorized_dirichlet(const WeightExpr& v, const WeightExpr& w, int ell,
                                   int n_dim, bool radial_only, double rel_tol) {
  const WeightExpr vp = derivative(v);
  WeightExpr density = mul(vp, vp);
  const double lam = angular_eigenvalue(ell, n_dim);
  if (!radial_only && lam != 0.0)
    density = add(density, scale(mul(mul(v, v), WeightExpr::power(1.0, -2.0)), lam));
  const WeightExpr integrand = mul(density, mul(w, WeightExpr::power(1.0, n_dim - 1.0)));
  return mode_weight(ell, n_dim) * integrate_radial(make_integrand(integrand), rel_tol).value;
}

}  // namespace detail

inline double factorized_remainder(const ModeFunction& u, FactorizedPreset preset,
                                   const FactorizedParams& params, int n_dim,
                                   double rel_tol = kReductionTol) {
  const WeightExpr f = to_weight_expr(u.radial_part);
  switch (preset) {
    case FactorizedPreset::C2Grad:
    case FactorizedPreset::C2Radial: {
      // int |x|^{-(N-2)} |del (|x|^m u)|^2 dx with m = (N - lambda - 2)/2.
      const double m = 0.5 * (n_dim - params.lambda - 2.0);
      const WeightExpr v = mul(f, WeightExpr::power(1.0, m));
      const WeightExpr w = WeightExpr::power(1.0, -(n_dim - 2.0));
      return detail::factorized_dirichlet(v, w, u.ell, n_dim,
                                          preset == FactorizedPreset::C2Radial, rel_tol);
    }
    case FactorizedPreset::C6: {
      // (lambda^2/2) int |del (u e^{|x|^2/(2 lambda^2)})|^2 e^{-|x|^2/lambda^2} dx
      // with lambda^4 = int |x|^2 u^2 / int |del u|^2.
      const double xnorm = value_norm_sq(u, WeightExpr::power(1.0, 2.0), n_dim, rel_tol);
      const double grad = gradient_seminorm_sq(u, WeightExpr::one(), n_dim, rel_tol);
      if (!(grad > 0.0) || !(xnorm > 0.0))
        throw DegenerateNorm("factorized_remainder: c6 needs nonvanishing norms");
      const double lam2 = std::sqrt(xnorm / grad);
      const WeightExpr v = mul(f, WeightExpr::gauss(1.0, 0.0, -1.0 / lam2, 2.0));
      const WeightExpr w = WeightExpr::gauss(1.0, 0.0, 2.0 / lam2, 2.0);
      return 0.5 * lam2 * detail::factorized_dirichlet(v, w, u.ell, n_dim, false, rel_tol);
    }
    case FactorizedPreset::Hup1: {
      // int |del (u e^{|x|^2/2})|^2 e^{-|x|^2} dx
      const WeightExpr v = mul(f, WeightExpr::gauss(1.0, 0.0, -1.0, 2.0));
      const WeightExpr w = WeightExpr::gauss(1.0, 0.0, 2.0, 2.0);
      return detail::factorized_dirichlet(v, w, u.ell, n_dim, false, rel_tol);
    }
    case FactorizedPreset::Ckn1: {
      // int |x|^{-2b} |del (u e^{|x|^y/y})|^2 e^{-2|x|^y/y} dx, y = b+1-a.
      const double y = params.b + 1.0 - params.a;
      if (!(y > 0.0)) throw InvalidParams("factorized_remainder: ckn1 needs b+1-a > 0");
      const WeightExpr v = mul(f, WeightExpr::gauss(1.0, 0.0, -1.0, y));
      const WeightExpr w =
          mul(WeightExpr::power(1.0, -2.0 * params.b), WeightExpr::gauss(1.0, 0.0, 2.0, y));
      return detail::factorized_dirichlet(v, w, u.ell, n_dim, false, rel_tol);
    }
  }
  throw UnknownPreset("factorized_remainder: unhandled preset");
}

}  // namespace ckn
