#pragma once

// Deficit functionals, distances to the extremal cone (projection, norm
// constrained, graph norm), and the stability-theorem auditors built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ckn/closedform.hpp"
#include "ckn/errors.hpp"
#include "ckn/minimize.hpp"
#include "ckn/profiles.hpp"
#include "ckn/reduction.hpp"

namespace ckn {

struct ExtremalCandidate {
  double c = 0.0;
  double beta = 1.0;
};

struct DistanceResult {
  double dist_sq = 0.0;
  ExtremalCandidate witness;
};

// (a, b) = (-1, 0): cone of Gaussians c e^{-beta r^2 / 2}, unweighted norms.
inline CknParams heisenberg_params(int n_dim) { return CknParams(n_dim, -1.0, 0.0); }

namespace detail {

inline ModeFunction cone_profile(const CknParams& p, double beta) {
  return ModeFunction(0, RadialProfile({GaussPowerTerm(1.0, 0.0, beta, p.y())}));
}

// || e^{-(beta/y) r^y} ||^2 against r^{-(a+b+1)}.
inline double phi_mid_norm_sq(const CknParams& p, double beta) {
  return surface_area(p.n_dim) * gamma_moment(p.sigma(), p.y(), 2.0 * beta);
}

inline void require_cone_domain(const CknParams& p, const char* who) {
  if (!(p.y() > 0.0)) throw InvalidParams(std::string(who) + ": requires b + 1 - a > 0");
  if (!(p.sigma() > 0.0))
    throw NonIntegrable(std::string(who) + ": cone norm needs N - a - b - 1 > 0");
}

inline void require_sharpness_regime(const CknParams& p, const char* who) {
  if (!p.sharpness_regime())
    throw InvalidParams(std::string(who) + ": requires 0 <= b < (N-2)/2 and a <= Nb/(N-2)");
}

inline void require_alignment(const CknParams& p, const char* who) {
  if (!p.scale_aligned())
    throw InvalidParams(std::string(who) + ": requires a + b + 1 = 2bN/(N-2)");
}

}  // namespace detail

// ||del u|| ||xu|| - (N/2) ||u||^2.
inline double deficit_delta1(const ModeFunction& u, int n_dim, double rel_tol = kReductionTol) {
  const double grad = gradient_seminorm_sq(u, WeightExpr::one(), n_dim, rel_tol);
  const double xnorm = value_norm_sq(u, WeightExpr::power(1.0, 2.0), n_dim, rel_tol);
  const double mass = value_norm_sq(u, WeightExpr::one(), n_dim, rel_tol);
  return std::sqrt(grad * xnorm) - 0.5 * n_dim * mass;
}

// ||del u||^2 ||xu||^2 - (N^2/4) ||u||^4.
inline double deficit_delta2(const ModeFunction& u, int n_dim, double rel_tol = kReductionTol) {
  const double grad = gradient_seminorm_sq(u, WeightExpr::one(), n_dim, rel_tol);
  const double xnorm = value_norm_sq(u, WeightExpr::power(1.0, 2.0), n_dim, rel_tol);
  const double mass = value_norm_sq(u, WeightExpr::one(), n_dim, rel_tol);
  return grad * xnorm - 0.25 * n_dim * n_dim * mass * mass;
}

// ||u/|x|^a|| ||del u/|x|^b|| - |N-a-b-1|/2 ||u/|x|^{(a+b+1)/2}||^2.
inline double deficit_ckn1(const ModeFunction& u, const CknParams& p,
                           double rel_tol = kReductionTol) {
  if (!(p.y() > 0.0)) throw InvalidParams("deficit_ckn1: requires b + 1 - a > 0");
  const double grad_b =
      gradient_seminorm_sq(u, WeightExpr::power(1.0, -2.0 * p.b), p.n_dim, rel_tol);
  const double val_a = value_norm_sq(u, WeightExpr::power(1.0, -2.0 * p.a), p.n_dim, rel_tol);
  const double mid =
      value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), p.n_dim, rel_tol);
  return std::sqrt(grad_b * val_a) - ckn_sharp_constant(p) * mid;
}

// Squared-product version of deficit_ckn1.
inline double deficit_ckn2(const ModeFunction& u, const CknParams& p,
                           double rel_tol = kReductionTol) {
  if (!(p.y() > 0.0)) throw InvalidParams("deficit_ckn2: requires b + 1 - a > 0");
  const double grad_b =
      gradient_seminorm_sq(u, WeightExpr::power(1.0, -2.0 * p.b), p.n_dim, rel_tol);
  const double val_a = value_norm_sq(u, WeightExpr::power(1.0, -2.0 * p.a), p.n_dim, rel_tol);
  const double mid =
      value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), p.n_dim, rel_tol);
  const double s = ckn_sharp_constant(p);
  return grad_b * val_a - s * s * mid * mid;
}

// int |del u|^2/|x|^{2b} + int u^2/|x|^{2a} - (N-a-b-1) int u^2/|x|^{a+b+1}.
inline double scale_noninv_deficit(const ModeFunction& u, const CknParams& p,
                                   double rel_tol = kReductionTol) {
  if (!(p.sigma() > 0.0))
    throw InvalidParams("scale_noninv_deficit: requires N - a - b - 1 > 0");
  const double grad_b =
      gradient_seminorm_sq(u, WeightExpr::power(1.0, -2.0 * p.b), p.n_dim, rel_tol);
  const double val_a = value_norm_sq(u, WeightExpr::power(1.0, -2.0 * p.a), p.n_dim, rel_tol);
  const double mid =
      value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), p.n_dim, rel_tol);
  return grad_b + val_a - p.sigma() * mid;
}

// inf over c alone of ||u - c phi||_w^2; the c subproblem is exactly quadratic.
inline DistanceResult projection_distance(const ModeFunction& u, const ModeFunction& phi,
                                          const WeightExpr& w, int n_dim,
                                          double rel_tol = kReductionTol) {
  const double unorm = value_norm_sq(u, w, n_dim, rel_tol);
  const double pnorm = value_norm_sq(phi, w, n_dim, rel_tol);
  if (!(pnorm > 1e-280)) throw DegenerateNorm("projection_distance: reference norm vanishes");
  const double ip = value_inner(u, phi, w, n_dim, rel_tol);
  return {std::max(0.0, unorm - ip * ip / pnorm), {ip / pnorm, 1.0}};
}

// inf over (c, beta) of ||u - c e^{-(beta/y) r^y}||^2 in the r^{-(a+b+1)} weight.
inline DistanceResult distance_d1(const ModeFunction& u, const CknParams& p,
                                  double rel_tol = kReductionTol) {
  detail::require_cone_domain(p, "distance_d1");
  const WeightExpr w = WeightExpr::power(1.0, -(p.a + p.b + 1.0));
  const double unorm = value_norm_sq(u, w, p.n_dim, rel_tol);
  if (u.ell == 1) return {unorm, {0.0, 1.0}};
  const auto objective = [&](double beta) {
    const double phin = detail::phi_mid_norm_sq(p, beta);
    const double ip = value_inner(u, detail::cone_profile(p, beta), w, p.n_dim, rel_tol);
    return unorm - ip * ip / phin;
  };
  const MinimizeResult m = minimize_log_axis(objective, 1e-4, 1e4, 1e-10);
  const double phin = detail::phi_mid_norm_sq(p, m.argmin);
  const double ip = value_inner(u, detail::cone_profile(p, m.argmin), w, p.n_dim, rel_tol);
  return {std::max(0.0, unorm - ip * ip / phin), {ip / phin, m.argmin}};
}

// Same infimum restricted to candidates with ||c phi||_w = ||u||_w.
inline DistanceResult distance_d2(const ModeFunction& u, const CknParams& p,
                                  double rel_tol = kReductionTol) {
  detail::require_cone_domain(p, "distance_d2");
  const WeightExpr w = WeightExpr::power(1.0, -(p.a + p.b + 1.0));
  const double unorm = value_norm_sq(u, w, p.n_dim, rel_tol);
  if (!(unorm > 1e-280)) throw DegenerateNorm("distance_d2: profile norm vanishes");
  if (u.ell == 1) {
    const double c = std::sqrt(unorm / detail::phi_mid_norm_sq(p, 1.0));
    return {2.0 * unorm, {c, 1.0}};
  }
  const auto objective = [&](double beta) {
    const double phin = detail::phi_mid_norm_sq(p, beta);
    const double ip = value_inner(u, detail::cone_profile(p, beta), w, p.n_dim, rel_tol);
    return 2.0 * unorm - 2.0 * std::abs(ip) * std::sqrt(unorm / phin);
  };
  const MinimizeResult m = minimize_log_axis(objective, 1e-4, 1e4, 1e-10);
  const double phin = detail::phi_mid_norm_sq(p, m.argmin);
  const double ip = value_inner(u, detail::cone_profile(p, m.argmin), w, p.n_dim, rel_tol);
  const double scale = std::sqrt(unorm / phin);
  const double c = ip < 0.0 ? -scale : scale;
  return {std::max(0.0, 2.0 * unorm - 2.0 * std::abs(ip) * scale), {c, m.argmin}};
}

// inf over c of the Gaussian graph norm: grad + |x|^2 mass + plain mass of
// u - c e^{-r^2/2}. Reference-profile quadratics come from closed forms.
inline DistanceResult graph_distance(const ModeFunction& u, int n_dim,
                                     double rel_tol = kReductionTol) {
  const CknParams hp = heisenberg_params(n_dim);
  const ModeFunction phi = detail::cone_profile(hp, 1.0);
  const WeightExpr one = WeightExpr::one();
  const WeightExpr xsq = WeightExpr::power(1.0, 2.0);
  const double q_u = gradient_seminorm_sq(u, one, n_dim, rel_tol) +
                     value_norm_sq(u, xsq, n_dim, rel_tol) +
                     value_norm_sq(u, one, n_dim, rel_tol);
  const double pi_pow = surface_area(n_dim) * gamma_moment(n_dim, 2.0, 2.0);
  const double q_phi = (n_dim + 1.0) * pi_pow;
  const double cross = gradient_inner(u, phi, one, n_dim, rel_tol) +
                       value_inner(u, phi, xsq, n_dim, rel_tol) +
                       value_inner(u, phi, one, n_dim, rel_tol);
  const double c = cross / q_phi;
  return {std::max(0.0, q_u - cross * cross / q_phi), {c, 1.0}};
}

// Weighted counterpart with exponents (2b, 2a, a+b+1), reference profile at
// beta = 1, infimum over c alone.
inline DistanceResult weighted_graph_distance(const ModeFunction& u, const CknParams& p,
                                              double rel_tol = kReductionTol) {
  detail::require_cone_domain(p, "weighted_graph_distance");
  const ExtremalNorms en = extremal_norms(p, 1.0);
  const ModeFunction phi = detail::cone_profile(p, 1.0);
  const WeightExpr w_mid = WeightExpr::power(1.0, -(p.a + p.b + 1.0));
  const WeightExpr w_b = WeightExpr::power(1.0, -2.0 * p.b);
  const WeightExpr w_a = WeightExpr::power(1.0, -2.0 * p.a);
  const double q_u = value_norm_sq(u, w_mid, p.n_dim, rel_tol) +
                     gradient_seminorm_sq(u, w_b, p.n_dim, rel_tol) +
                     value_norm_sq(u, w_a, p.n_dim, rel_tol);
  const double q_phi = en.mid + en.grad + en.a_norm;
  const double cross = value_inner(u, phi, w_mid, p.n_dim, rel_tol) +
                       gradient_inner(u, phi, w_b, p.n_dim, rel_tol) +
                       value_inner(u, phi, w_a, p.n_dim, rel_tol);
  const double c = cross / q_phi;
  return {std::max(0.0, q_u - cross * cross / q_phi), {c, 1.0}};
}

enum class Theorem {
  T3_1,
  T3_2,
  T3_3,
  T3_4,
  T3_5,
  T3_6a,
  T3_6b,
  E3_first,
  E3_second,
  D2AB,
  T3_7,
  T3_8
};

inline const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::T3_1: return "T3_1";
    case Theorem::T3_2: return "T3_2";
    case Theorem::T3_3: return "T3_3";
    case Theorem::T3_4: return "T3_4";
    case Theorem::T3_5: return "T3_5";
    case Theorem::T3_6a: return "T3_6a";
    case Theorem::T3_6b: return "T3_6b";
    case Theorem::E3_first: return "E3_first";
    case Theorem::E3_second: return "E3_second";
    case Theorem::D2AB: return "D2AB";
    case Theorem::T3_7: return "T3_7";
    case Theorem::T3_8: return "T3_8";
  }
  throw InvalidParams("theorem_name: unknown theorem value");
}

inline Theorem theorem_from_string(const std::string& s) {
  for (Theorem t : {Theorem::T3_1, Theorem::T3_2, Theorem::T3_3, Theorem::T3_4, Theorem::T3_5,
                    Theorem::T3_6a, Theorem::T3_6b, Theorem::E3_first, Theorem::E3_second,
                    Theorem::D2AB, Theorem::T3_7, Theorem::T3_8}) {
    if (s == theorem_name(t)) return t;
  }
  throw InvalidParams("unknown theorem identifier: " + s);
}

struct TheoremParams {
  int n_dim = 3;
  double a = 0.0;
  double b = 0.0;
  double c2_constant = 0.0;  // chain constant consumed by D2AB only
  double rel_tol = kReductionTol;
};

struct StabilityReport {
  std::string theorem;
  double deficit = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  ExtremalCandidate witness;
  bool empirical = false;
  bool pass = false;
};

namespace detail {

// Ratio conventions: 1 when deficit and bound both sit under the floor of the
// theorem's natural scale (equality case), infinite when only the bound does.
inline StabilityReport finish_report(const char* name, double deficit, double bound,
                                     ExtremalCandidate w, bool empirical, double scale) {
  StabilityReport r;
  r.theorem = name;
  r.deficit = deficit;
  r.bound = bound;
  r.witness = w;
  r.empirical = empirical;
  const double floor = 1e-10 * std::max(scale, 0.0);
  if (std::abs(deficit) <= floor && std::abs(bound) <= floor) {
    r.ratio = 1.0;
    r.pass = true;
    return r;
  }
  if (bound == 0.0) {
    r.ratio = deficit > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
  } else {
    r.ratio = deficit / bound;
  }
  r.pass = empirical ? std::isfinite(r.ratio) : deficit >= bound * (1.0 - 1e-8) - 1e-12;
  return r;
}

}  // namespace detail

inline StabilityReport check_stability(Theorem t, const ModeFunction& u,
                                       const TheoremParams& P) {
  const int n = P.n_dim;
  const double rt = P.rel_tol;
  const WeightExpr unit = WeightExpr::one();
  switch (t) {
    case Theorem::T3_1: {
      const CknParams hp = heisenberg_params(n);
      const double deficit = scale_noninv_deficit(u, hp, rt);
      const DistanceResult d =
          projection_distance(u, detail::cone_profile(hp, 1.0), unit, n, rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      return detail::finish_report("T3_1", deficit, 2.0 * d.dist_sq, d.witness, false,
                                   n * mass);
    }
    case Theorem::T3_2: {
      const double deficit = deficit_delta1(u, n, rt);
      const DistanceResult d = distance_d1(u, heisenberg_params(n), rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      return detail::finish_report("T3_2", deficit, d.dist_sq, d.witness, false,
                                   0.5 * n * mass);
    }
    case Theorem::T3_3: {
      const double deficit = deficit_delta1(u, n, rt);
      const DistanceResult d = distance_d2(u, heisenberg_params(n), rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      return detail::finish_report("T3_3", deficit, 0.5 * d.dist_sq, d.witness, false,
                                   0.5 * n * mass);
    }
    case Theorem::T3_4: {
      const double deficit = scale_noninv_deficit(u, heisenberg_params(n), rt);
      const DistanceResult d = graph_distance(u, n, rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      return detail::finish_report("T3_4", deficit, 2.0 / (n + 3.0) * d.dist_sq, d.witness,
                                   false, n * mass);
    }
    case Theorem::T3_5: {
      if (!(P.a <= 0.0)) throw InvalidParams("T3_5: requires a <= 0");
      if (P.b != 0.0) throw InvalidParams("T3_5: requires b = 0");
      const CknParams p(n, P.a, 0.0);
      const double deficit = scale_noninv_deficit(u, p, rt);
      const DistanceResult d =
          projection_distance(u, detail::cone_profile(p, 1.0), unit, n, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + 1.0)), n, rt);
      return detail::finish_report("T3_5", deficit, d.dist_sq, d.witness, true,
                                   p.sigma() * mid);
    }
    case Theorem::T3_6a: {
      const CknParams p(n, P.a, P.b);
      detail::require_sharpness_regime(p, "T3_6a");
      const double deficit = scale_noninv_deficit(u, p, rt);
      const WeightExpr w = WeightExpr::power(1.0, -2.0 * p.b * n / (n - 2.0));
      const DistanceResult d =
          projection_distance(u, detail::cone_profile(p, 1.0), w, n, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), n, rt);
      return detail::finish_report("T3_6a", deficit, d.dist_sq, d.witness, true,
                                   p.sigma() * mid);
    }
    case Theorem::T3_6b: {
      const CknParams p(n, P.a, P.b);
      detail::require_sharpness_regime(p, "T3_6b");
      detail::require_alignment(p, "T3_6b");
      const double deficit = deficit_ckn1(u, p, rt);
      const DistanceResult d = distance_d1(u, p, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), n, rt);
      return detail::finish_report("T3_6b", deficit, d.dist_sq, d.witness, true,
                                   ckn_sharp_constant(p) * mid);
    }
    case Theorem::E3_first: {
      const double deficit = deficit_delta2(u, n, rt);
      const DistanceResult d = distance_d1(u, heisenberg_params(n), rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      const double bound = n * mass * d.dist_sq + d.dist_sq * d.dist_sq;
      return detail::finish_report("E3_first", deficit, bound, d.witness, false,
                                   0.25 * n * n * mass * mass);
    }
    case Theorem::E3_second: {
      const double deficit = deficit_delta2(u, n, rt);
      const DistanceResult d = distance_d2(u, heisenberg_params(n), rt);
      const double mass = value_norm_sq(u, unit, n, rt);
      const double bound = 0.5 * n * mass * d.dist_sq + 0.25 * d.dist_sq * d.dist_sq;
      return detail::finish_report("E3_second", deficit, bound, d.witness, false,
                                   0.25 * n * n * mass * mass);
    }
    case Theorem::D2AB: {
      const CknParams p(n, P.a, P.b);
      detail::require_sharpness_regime(p, "D2AB");
      detail::require_alignment(p, "D2AB");
      if (!(P.c2_constant > 0.0))
        throw InvalidParams("D2AB: requires a positive chain constant");
      const double deficit = deficit_ckn2(u, p, rt);
      const DistanceResult d = distance_d1(u, p, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), n, rt);
      const double s = ckn_sharp_constant(p);
      const double bound = 2.0 * s * P.c2_constant * mid * d.dist_sq +
                           P.c2_constant * P.c2_constant * d.dist_sq * d.dist_sq;
      return detail::finish_report("D2AB", deficit, bound, d.witness, false,
                                   s * s * mid * mid);
    }
    case Theorem::T3_7: {
      const CknParams p(n, P.a, P.b);
      detail::require_sharpness_regime(p, "T3_7");
      detail::require_alignment(p, "T3_7");
      const double deficit = deficit_ckn1(u, p, rt);
      const DistanceResult d = distance_d2(u, p, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), n, rt);
      return detail::finish_report("T3_7", deficit, d.dist_sq, d.witness, true,
                                   ckn_sharp_constant(p) * mid);
    }
    case Theorem::T3_8: {
      const CknParams p(n, P.a, P.b);
      detail::require_sharpness_regime(p, "T3_8");
      detail::require_alignment(p, "T3_8");
      const double deficit = scale_noninv_deficit(u, p, rt);
      const DistanceResult d = weighted_graph_distance(u, p, rt);
      const double mid =
          value_norm_sq(u, WeightExpr::power(1.0, -(p.a + p.b + 1.0)), n, rt);
      return detail::finish_report("T3_8", deficit, d.dist_sq, d.witness, true,
                                   p.sigma() * mid);
    }
  }
  throw InvalidParams("check_stability: unknown theorem value");
}

}  // namespace ckn
