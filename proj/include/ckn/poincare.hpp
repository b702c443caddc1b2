#pragma once

// Spectral-gap estimation for radial measures e^{-delta r^alpha}, with the
// optional power weights that appear in the weighted Poincare inequality, plus
// the Kelvin-type change of variables that trades the Dirichlet weight for a
// rescaled measure exponent.
//
// Rayleigh-Ritz per angular sector: the trial space is span{r^j * mode}. The
// polynomial factors are orthonormalized against the variance measure by the
// Stieltjes three-term recurrence before the pencil is assembled, because raw
// monomial Gram matrices lose positive definiteness in double precision long
// before n = 16.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ckn/eigen.hpp"
#include "ckn/errors.hpp"
#include "ckn/identities.hpp"
#include "ckn/profiles.hpp"
#include "ckn/quadrature.hpp"
#include "ckn/reduction.hpp"

namespace ckn {

struct RadialMeasure {
  double delta;  // decay rate of e^{-delta r^alpha}
  double alpha;  // decay exponent
  double mu;     // Dirichlet weight r^{-mu}; variance weight r^{-N mu/(N-2)}
  int n_dim;

  RadialMeasure(double delta_, double alpha_, double mu_, int n_dim_)
      : delta(delta_), alpha(alpha_), mu(mu_), n_dim(n_dim_) {
    if (!(std::isfinite(delta) && delta > 0.0))
      throw InvalidParams("RadialMeasure: decay rate must be positive");
    if (!(std::isfinite(alpha) && alpha > 0.0))
      throw InvalidParams("RadialMeasure: decay exponent must be positive");
    if (n_dim < 3) throw InvalidParams("RadialMeasure: dimension must be at least 3");
    if (!(std::isfinite(mu) && mu >= 0.0 && mu < n_dim - 2.0))
      throw InvalidParams("RadialMeasure: power weight must lie in [0, N-2)");
  }

  double variance_power() const { return n_dim * mu / (n_dim - 2.0); }
  double kelvin_lambda() const { return (n_dim - 2.0) / (n_dim - 2.0 - mu); }
  bool log_concave() const { return alpha >= 1.0; }
  // Hypothesis under which the weighted inequality is proved; the Rayleigh
  // quotients below stay well-defined outside it.
  bool gap_hypothesis() const { return alpha >= (n_dim - 2.0 - mu) / (n_dim - 2.0); }

  WeightExpr density() const { return WeightExpr::gauss(1.0, 0.0, delta * alpha, alpha); }
  WeightExpr dirichlet_weight() const {
    return WeightExpr::gauss(1.0, -mu, delta * alpha, alpha);
  }
  WeightExpr variance_weight() const {
    return WeightExpr::gauss(1.0, -variance_power(), delta * alpha, alpha);
  }
};

namespace detail {

// integral of g(r) r^power e^{-delta r^alpha} dr for polynomial-bounded g.
// growth_deg bounds the degree of g so the far tail can be truncated before
// the recurrence that evaluates g overflows.
inline double measure_integral(double power, double delta, double alpha,
                               const std::function<double(double)>& g, double growth_deg,
                               double rel_tol) {
  Integrand f;
  f.zero_exponent = power;
  f.tail = TailClass::exp_power(alpha);
  f.evaluator = [=](double r) -> double {
    if (!(r > 1e-290) || r > 1e290) return 0.0;
    const double lr = std::log(r);
    const double lm = power * lr - delta * std::pow(r, alpha);
    if (lm + growth_deg * std::max(lr, 0.0) + 800.0 < -745.0) return 0.0;
    const double gv = g(r);
    if (gv == 0.0 || !std::isfinite(gv)) return 0.0;
    const double lv = lm + std::log(std::abs(gv));
    if (lv < -745.0) return 0.0;
    return std::copysign(std::exp(lv), gv);
  };
  return integrate_radial(f, rel_tol).value;
}

// Orthonormal polynomials for the measure r^power e^{-delta r^alpha} dr on
// (0, inf), built by the Stieltjes procedure. Values and derivatives are
// produced by the recurrence itself.
struct OrthoPolyBasis {
  double power = 0.0;
  double delta = 1.0;
  double alpha = 2.0;
  std::vector<double> rec_a;  // diagonal coefficients a_0..a_{m-1}
  std::vector<double> rec_b;  // b_0 = sqrt(m_0), then off-diagonals b_1..b_m

  int top_degree() const { return static_cast<int>(rec_b.size()) - 1; }

  void eval(double r, std::vector<double>& p, std::vector<double>& dp) const {
    const int m = top_degree();
    p.assign(m + 1, 0.0);
    dp.assign(m + 1, 0.0);
    p[0] = 1.0 / rec_b[0];
    for (int k = 0; k < m; ++k) {
      const double prev = (k > 0) ? p[k - 1] : 0.0;
      const double dprev = (k > 0) ? dp[k - 1] : 0.0;
      p[k + 1] = ((r - rec_a[k]) * p[k] - rec_b[k] * prev) / rec_b[k + 1];
      dp[k + 1] = (p[k] + (r - rec_a[k]) * dp[k] - rec_b[k] * dprev) / rec_b[k + 1];
    }
  }
};

inline OrthoPolyBasis build_ortho_basis(double power, double delta, double alpha,
                                        int top_degree, double rel_tol) {
  OrthoPolyBasis basis;
  basis.power = power;
  basis.delta = delta;
  basis.alpha = alpha;
  const double m0 =
      measure_integral(power, delta, alpha, [](double) { return 1.0; }, 0.0, rel_tol);
  if (!(m0 > 0.0) || !std::isfinite(m0))
    throw NotPositiveDefinite("ortho basis: measure has no mass");
  basis.rec_b.push_back(std::sqrt(m0));
  std::vector<double> p, dp;
  for (int k = 0; k < top_degree; ++k) {
    const double ak = measure_integral(
        power, delta, alpha,
        [&](double r) {
          basis.eval(r, p, dp);
          return r * p[k] * p[k];
        },
        2.0 * k + 1.0, rel_tol);
    basis.rec_a.push_back(ak);
    const double bk = (k > 0) ? basis.rec_b[k] : 0.0;
    const double norm_sq = measure_integral(
        power, delta, alpha,
        [&](double r) {
          basis.eval(r, p, dp);
          const double prev = (k > 0) ? p[k - 1] : 0.0;
          const double t = (r - ak) * p[k] - bk * prev;
          return t * t;
        },
        2.0 * k + 2.0, rel_tol);
    if (!(norm_sq > 1e-280) || !std::isfinite(norm_sq))
      throw NotPositiveDefinite("ortho basis: degenerate at degree " +
                                std::to_string(k + 1) + ", reduce the basis size");
    basis.rec_b.push_back(std::sqrt(norm_sq));
  }
  return basis;
}

// Rayleigh-Ritz gap for one angular sector. The trial functions are
// f_j = r^j * mode; after factoring r out of the mode-1 family both sectors
// reduce to polynomials orthonormalized against the variance measure.
inline double sector_gap(const RadialMeasure& m, int ell, int n, double rel_tol) {
  if (ell < 0 || ell > 2) throw InvalidParams("gap estimate: sector must be 0, 1, or 2");
  if (n > 16) throw InvalidParams("gap estimate: basis size is capped at 16");
  if (ell == 0 && n < 2)
    throw InvalidParams("gap estimate: the radial sector needs n >= 2");
  if (ell >= 1 && n < 1) throw InvalidParams("gap estimate: basis size must be positive");

  const double nu = m.variance_power();
  const double lam = angular_eigenvalue(ell, m.n_dim);
  const double dir_power = m.n_dim - 1.0 - m.mu;
  const int size = n;  // trial-space dimension in both sectors

  // ell = 0: polynomials of degree 1..n, orthogonality to p_0 is exactly the
  // mean centering. ell >= 1: f = r q with deg q <= n-1, and the variance
  // measure absorbs the extra r^2.
  const double var_power = (ell == 0) ? m.n_dim - 1.0 - nu : m.n_dim + 1.0 - nu;
  const int top_degree = (ell == 0) ? n : n - 1;
  const OrthoPolyBasis basis =
      build_ortho_basis(var_power, m.delta, m.alpha, top_degree, rel_tol);

  // Off-diagonal products of near-orthogonal functions integrate to values
  // near zero, which an adaptive rule with a relative stopping test cannot
  // resolve. Polarize instead: every entry is a difference of two integrals
  // of squares, each positive and convergent, so entries come out accurate
  // relative to the diagonal scale.
  std::vector<double> p, dp;
  const auto quad_form = [&](double power, const std::function<double(double)>& fn,
                             double growth) {
    return measure_integral(
        power, m.delta, m.alpha,
        [&](double r) {
          const double t = fn(r);
          return t * t;
        },
        growth, rel_tol);
  };
  const auto polarized = [&](double power, const std::function<double(double, int)>& fn,
                             int j, int k, double growth) {
    if (j == k) return quad_form(power, [&](double r) { return fn(r, j); }, growth);
    const double plus =
        quad_form(power, [&](double r) { return fn(r, j) + fn(r, k); }, growth);
    const double minus =
        quad_form(power, [&](double r) { return fn(r, j) - fn(r, k); }, growth);
    return 0.25 * (plus - minus);
  };

  const int lo = (ell == 0) ? 1 : 0;
  const auto value_at = [&](double r, int idx) {
    basis.eval(r, p, dp);
    return p[lo + idx];
  };
  const auto slope_at = [&](double r, int idx) {
    basis.eval(r, p, dp);
    return dp[lo + idx];
  };
  const auto mode_slope_at = [&](double r, int idx) {
    basis.eval(r, p, dp);
    return p[lo + idx] + r * dp[lo + idx];
  };

  std::vector<double> a(size * size, 0.0), b(size * size, 0.0);
  for (int j = 0; j < size; ++j) {
    for (int k = j; k < size; ++k) {
      const double growth = double(lo + j + lo + k + 2);
      const double bjk = polarized(var_power, value_at, j, k, growth);
      double ajk = (ell == 0) ? polarized(dir_power, slope_at, j, k, growth)
                              : polarized(dir_power, mode_slope_at, j, k, growth) +
                                    lam * polarized(dir_power, value_at, j, k, growth);
      a[j * size + k] = a[k * size + j] = ajk;
      b[j * size + k] = b[k * size + j] = bjk;
    }
  }
  return smallest_eigenvalue(SymmetricPencil(size, std::move(a), std::move(b)));
}

// First moment of a sign-mixed profile, polarized against the constant 1 so
// both quadratures see positive integrands.
inline double profile_moment(const RadialProfile& f, const WeightExpr& w, int n_dim,
                             double rel_tol) {
  const WeightExpr expr = to_weight_expr(f);
  const WeightExpr density = mul(w, WeightExpr::power(1.0, n_dim - 1.0));
  const WeightExpr plus = add(expr, WeightExpr::one());
  const WeightExpr minus = add(expr, WeightExpr::power(-1.0, 0.0));
  const double ip = integrate_radial(make_integrand(mul(mul(plus, plus), density)), rel_tol).value;
  const double im =
      integrate_radial(make_integrand(mul(mul(minus, minus), density)), rel_tol).value;
  return surface_area(n_dim) * 0.25 * (ip - im);
}

}  // namespace detail

// Per-sector Rayleigh-Ritz estimate; requires an unweighted measure. Sector 2
// is accepted for diagnostics even though the full-space gap only needs 0, 1.
inline double gap_estimate(const RadialMeasure& m, int ell, int n,
                           double rel_tol = 1e-12) {
  if (m.mu != 0.0)
    throw InvalidParams("gap_estimate: requires mu = 0, see weighted_gap_estimate");
  return detail::sector_gap(m, ell, n, rel_tol);
}

// Full-space estimate: minimum over the two sectors that can carry the gap.
inline double gap_estimate(const RadialMeasure& m, int n = 12, double rel_tol = 1e-12) {
  const double g0 = gap_estimate(m, 0, std::max(n, 2), rel_tol);
  const double g1 = gap_estimate(m, 1, std::max(n, 1), rel_tol);
  return std::min(g0, g1);
}

// Weighted inequality: Dirichlet form carries r^{-mu}, the variance carries
// r^{-N mu/(N-2)}. Reduces to gap_estimate when mu = 0.
inline double weighted_gap_estimate(const RadialMeasure& m, int n = 12,
                                    double rel_tol = 1e-12) {
  const double g0 = detail::sector_gap(m, 0, std::max(n, 2), rel_tol);
  const double g1 = detail::sector_gap(m, 1, std::max(n, 1), rel_tol);
  return std::min(g0, g1);
}

// Dirichlet side of the change of variables y = |x|^{lambda-1} x: for radial v
// the weighted form equals the plain Dirichlet form of the transported profile
// against the measure with exponent lambda * alpha.
inline IdentityReport kelvin_transform_check(const ModeFunction& v,
                                             const RadialMeasure& m, double tol = 1e-9) {
  if (v.ell != 0)
    throw InvalidParams("kelvin_transform_check: only radial test functions admit the identity");
  const double lambda = m.kelvin_lambda();
  const ModeFunction vbar = kelvin_transport(v, lambda);
  const WeightExpr target =
      WeightExpr::gauss(1.0, 0.0, m.delta * lambda * m.alpha, lambda * m.alpha);
  IdentityReport rep;
  rep.lhs = gradient_seminorm_sq(v, m.dirichlet_weight(), m.n_dim);
  rep.rhs = gradient_seminorm_sq(vbar, target, m.n_dim);
  rep.remainder = rep.lhs - rep.rhs;
  const double scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-300});
  rep.residual = std::abs(rep.remainder) / scale;
  rep.pass = rep.residual <= tol;
  return rep;
}

// Variance side of the same substitution. The centered mass picks up a factor
// lambda^2 and the center shifts by lambda^{-1/2}:
//   int |v - c|^2 r^{-N mu/(N-2)} e^{-delta r^alpha} dy
//     = lambda^2 int |vbar - c lambda^{-1/2}|^2 e^{-delta r^{lambda alpha}} dx.
inline IdentityReport kelvin_variance_check(const ModeFunction& v, const RadialMeasure& m,
                                            double center, double tol = 1e-9) {
  if (v.ell != 0)
    throw InvalidParams("kelvin_variance_check: only radial test functions admit the identity");
  const double lambda = m.kelvin_lambda();
  const ModeFunction vbar = kelvin_transport(v, lambda);
  const WeightExpr target =
      WeightExpr::gauss(1.0, 0.0, m.delta * lambda * m.alpha, lambda * m.alpha);
  const WeightExpr wvar = m.variance_weight();
  const int n = m.n_dim;

  const double mass_w = surface_area(n) *
                        integrate_radial(make_integrand(mul(wvar, WeightExpr::power(
                                                                      1.0, n - 1.0))),
                                         1e-12)
                            .value;
  const double mass_t = surface_area(n) *
                        integrate_radial(make_integrand(mul(target, WeightExpr::power(
                                                                        1.0, n - 1.0))),
                                         1e-12)
                            .value;
  IdentityReport rep;
  rep.lhs = value_norm_sq(v, wvar, n) - 2.0 * center * detail::profile_moment(v.radial_part, wvar, n, 1e-12) +
            center * center * mass_w;
  const double shifted = center / std::sqrt(lambda);
  rep.rhs = lambda * lambda *
            (value_norm_sq(vbar, target, n) -
             2.0 * shifted * detail::profile_moment(vbar.radial_part, target, n, 1e-12) +
             shifted * shifted * mass_t);
  rep.remainder = rep.lhs - rep.rhs;
  const double scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1e-300});
  rep.residual = std::abs(rep.remainder) / scale;
  rep.pass = rep.residual <= tol;
  return rep;
}

struct PoincareReport {
  double dirichlet = 0.0;
  double variance = 0.0;
  double ratio = 0.0;
};

// Polynomial test function q(r) * mode; lets constants and pure coordinate
// functions like x_1 (mode 1, coeffs {0, 1}) be checked exactly.
struct PolyMode {
  int ell;
  std::vector<double> coeffs;  // q(r) = sum_j coeffs[j] r^j

  PolyMode(int ell_, std::vector<double> coeffs_) : ell(ell_), coeffs(std::move(coeffs_)) {
    if (ell != 0 && ell != 1) throw InvalidParams("PolyMode: mode must be 0 or 1");
    if (coeffs.empty()) throw InvalidParams("PolyMode: needs at least one coefficient");
    for (double c : coeffs)
      if (!std::isfinite(c)) throw InvalidParams("PolyMode: coefficients must be finite");
    if (ell == 1 && coeffs[0] != 0.0)
      throw InvalidParams("PolyMode: mode 1 requires a vanishing constant term");
  }

  double eval(double r) const {
    double v = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) v = v * r + coeffs[j];
    return v;
  }
  double eval_derivative(double r) const {
    double v = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) v = v * r + coeffs[j] * double(j);
    return v;
  }
  double degree() const { return double(coeffs.size()) - 1.0; }
};

namespace detail {

inline PoincareReport finish_poincare(double dirichlet, double variance, double scale) {
  PoincareReport rep;
  rep.dirichlet = dirichlet;
  if (variance <= 1e-13 * scale) {
    rep.variance = 0.0;
    rep.ratio = std::numeric_limits<double>::infinity();
  } else {
    rep.variance = variance;
    rep.ratio = dirichlet / variance;
  }
  return rep;
}

}  // namespace detail

// Dirichlet form, exactly centered variance (c* is the weighted mean), and
// their ratio, which upper-bounds the measure's spectral gap for every v.
inline PoincareReport poincare_check(const ModeFunction& v, const RadialMeasure& m,
                                     double rel_tol = 1e-12) {
  const WeightExpr wvar = m.variance_weight();
  const int n = m.n_dim;
  const double dirichlet = gradient_seminorm_sq(v, m.dirichlet_weight(), n, rel_tol);
  const double raw = value_norm_sq(v, wvar, n, rel_tol);
  double variance = raw;
  if (v.ell == 0) {
    const double mass = surface_area(n) *
                        integrate_radial(make_integrand(mul(wvar, WeightExpr::power(
                                                                      1.0, n - 1.0))),
                                         rel_tol)
                            .value;
    const double mean = detail::profile_moment(v.radial_part, wvar, n, rel_tol) / mass;
    variance = raw - mean * mean * mass;
  }
  return detail::finish_poincare(dirichlet, std::max(variance, 0.0), raw);
}

inline PoincareReport poincare_check(const PolyMode& v, const RadialMeasure& m,
                                     double rel_tol = 1e-12) {
  const int n = m.n_dim;
  const double nu = m.variance_power();
  const double lam = angular_eigenvalue(v.ell, n);
  const double mw = mode_weight(v.ell, n);
  const double dir_power = n - 1.0 - m.mu;
  const double var_power = n - 1.0 - nu;
  const double deg = v.degree();

  const double dirichlet =
      mw * detail::measure_integral(
               dir_power, m.delta, m.alpha,
               [&](double r) {
                 const double f = v.eval(r);
                 const double df = v.eval_derivative(r);
                 return df * df + (lam > 0.0 ? lam * (f / r) * (f / r) : 0.0);
               },
               2.0 * deg, rel_tol);
  const double raw = mw * detail::measure_integral(
                              var_power, m.delta, m.alpha,
                              [&](double r) {
                                const double f = v.eval(r);
                                return f * f;
                              },
                              2.0 * deg, rel_tol);
  double variance = raw;
  if (v.ell == 0) {
    const double mass = mw * detail::measure_integral(
                                 var_power, m.delta, m.alpha,
                                 [](double) { return 1.0; }, 0.0, rel_tol);
    const double plus = detail::measure_integral(
        var_power, m.delta, m.alpha,
        [&](double r) {
          const double t = v.eval(r) + 1.0;
          return t * t;
        },
        2.0 * deg, rel_tol);
    const double minus = detail::measure_integral(
        var_power, m.delta, m.alpha,
        [&](double r) {
          const double t = v.eval(r) - 1.0;
          return t * t;
        },
        2.0 * deg, rel_tol);
    const double mean = mw * 0.25 * (plus - minus) / mass;
    variance = raw - mean * mean * mass;
  }
  return detail::finish_poincare(dirichlet, std::max(variance, 0.0), raw);
}

}  // namespace ckn
