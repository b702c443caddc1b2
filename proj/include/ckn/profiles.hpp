#pragma once

// Radial profiles and Gauss-power weight expressions.
//
// A profile is a sum of terms  coeff * r^k * exp(-(beta/s) r^s)  with
// k >= 0, beta > 0, s > 0. Weight expressions are the closure of that family
// needed for symbolic work: k may be any real, beta any sign, and a term may
// carry several exponential factors (products with different s do not merge
// into one). The closure is exact under sums, products, and differentiation,
// which is what lets identity remainders and ground-state transforms be
// assembled without evaluating any overflowing intermediate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ckn/errors.hpp"
#include "ckn/quadrature.hpp"
#include "ckn/rng.hpp"

namespace ckn {

// ---------------------------------------------------------------------------
// Weight expressions

struct ExpFactor {
  double beta = 0.0;  // exp(-(beta/s) r^s); beta may be negative (growth)
  double s = 1.0;     // s > 0
};

struct WeightTerm {
  double coeff = 0.0;
  double k = 0.0;
  std::vector<ExpFactor> exps;  // kept sorted by s, betas merged per s
};

struct WeightExpr {
  std::vector<WeightTerm> terms;

  static WeightExpr zero() { return {}; }
  static WeightExpr power(double coeff, double k) {
    if (coeff == 0.0) return {};
    return {{WeightTerm{coeff, k, {}}}};
  }
  static WeightExpr one() { return power(1.0, 0.0); }
  // coeff * r^k * exp(-(beta/s) r^s)
  static WeightExpr gauss(double coeff, double k, double beta, double s) {
    if (!(s > 0.0)) throw InvalidParams("WeightExpr: exponential factor needs s > 0");
    if (coeff == 0.0) return {};
    if (beta == 0.0) return power(coeff, k);
    return {{WeightTerm{coeff, k, {ExpFactor{beta, s}}}}};
  }
};

namespace detail {

inline void canonicalize_term(WeightTerm& t) {
  std::sort(t.exps.begin(), t.exps.end(),
            [](const ExpFactor& a, const ExpFactor& b) { return a.s < b.s; });
  std::vector<ExpFactor> merged;
  for (const ExpFactor& e : t.exps) {
    if (!merged.empty() && merged.back().s == e.s) {
      merged.back().beta += e.beta;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const ExpFactor& e) { return e.beta == 0.0; });
  t.exps = std::move(merged);
}

inline bool same_shape(const WeightTerm& a, const WeightTerm& b) {
  if (a.k != b.k || a.exps.size() != b.exps.size()) return false;
  for (size_t i = 0; i < a.exps.size(); ++i)
    if (a.exps[i].beta != b.exps[i].beta || a.exps[i].s != b.exps[i].s) return false;
  return true;
}

}  // namespace detail

// Merges identical-shape terms and drops exact zeros.
inline WeightExpr simplify(WeightExpr e) {
  for (WeightTerm& t : e.terms) detail::canonicalize_term(t);
  std::vector<WeightTerm> out;
  for (WeightTerm& t : e.terms) {
    if (t.coeff == 0.0) continue;
    bool merged = false;
    for (WeightTerm& o : out) {
      if (detail::same_shape(o, t)) {
        o.coeff += t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(t));
  }
  std::erase_if(out, [](const WeightTerm& t) { return t.coeff == 0.0; });
  return {std::move(out)};
}

inline WeightExpr add(WeightExpr a, const WeightExpr& b) {
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  return simplify(std::move(a));
}

inline WeightExpr scale(WeightExpr a, double c) {
  if (c == 0.0) return {};
  for (WeightTerm& t : a.terms) t.coeff *= c;
  return a;
}

inline WeightExpr mul(const WeightExpr& a, const WeightExpr& b) {
  WeightExpr out;
  out.terms.reserve(a.terms.size() * b.terms.size());
  for (const WeightTerm& ta : a.terms)
    for (const WeightTerm& tb : b.terms) {
      WeightTerm t;
      t.coeff = ta.coeff * tb.coeff;
      t.k = ta.k + tb.k;
      t.exps = ta.exps;
      t.exps.insert(t.exps.end(), tb.exps.begin(), tb.exps.end());
      out.terms.push_back(std::move(t));
    }
  return simplify(std::move(out));
}

// d/dr of a weight expression; exact within the family.
inline WeightExpr derivative(const WeightExpr& e) {
  WeightExpr out;
  for (const WeightTerm& t : e.terms) {
    if (t.k != 0.0) {
      WeightTerm p{t.coeff * t.k, t.k - 1.0, t.exps};
      out.terms.push_back(std::move(p));
    }
    for (const ExpFactor& f : t.exps) {
      WeightTerm p{-t.coeff * f.beta, t.k + f.s - 1.0, t.exps};
      out.terms.push_back(std::move(p));
    }
  }
  return simplify(std::move(out));
}

// Square root of a single positive term (used for A = sqrt(V)).
inline WeightExpr sqrt_single(const WeightExpr& e) {
  if (e.terms.size() != 1 || !(e.terms[0].coeff > 0.0))
    throw InvalidParams("sqrt_single: requires a single term with positive coefficient");
  WeightTerm t = e.terms[0];
  t.coeff = std::sqrt(t.coeff);
  t.k *= 0.5;
  for (ExpFactor& f : t.exps) f.beta *= 0.5;
  return {{std::move(t)}};
}

// phi' / phi for a single-term phi: exact, exponential-free.
inline WeightExpr log_derivative_single(const WeightExpr& phi) {
  if (phi.terms.size() != 1)
    throw InvalidParams("log_derivative_single: requires a single-term expression");
  const WeightTerm& t = phi.terms[0];
  WeightExpr out;
  if (t.k != 0.0) out = add(out, WeightExpr::power(t.k, -1.0));
  for (const ExpFactor& f : t.exps)
    out = add(out, WeightExpr::power(-f.beta, f.s - 1.0));
  return out;
}

namespace detail {

inline double guarded_exp_arg(double st) {
  // e^(s t) in the exponent budget; +inf collapses correctly below.
  return (st > 709.0) ? std::numeric_limits<double>::infinity() : std::exp(st);
}

}  // namespace detail

// Value at r = e^t, stable for any t: each term is evaluated as
// coeff * exp(k t - sum (beta_i/s_i) e^{s_i t}).
inline double eval_log(const WeightExpr& e, double t) {
  double total = 0.0;
  for (const WeightTerm& term : e.terms) {
    double arg = term.k * t;
    for (const ExpFactor& f : term.exps) arg -= (f.beta / f.s) * detail::guarded_exp_arg(f.s * t);
    if (arg == -std::numeric_limits<double>::infinity()) continue;
    if (arg > 709.0) {
      total += (term.coeff > 0.0) ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
      continue;
    }
    total += term.coeff * std::exp(arg);
  }
  return total;
}

inline double eval(const WeightExpr& e, double r) {
  if (!(r > 0.0)) throw DomainError("WeightExpr eval: requires r > 0");
  return eval_log(e, std::log(r));
}

// Leading exponent as r -> 0 (min k over surviving terms).
inline double leading_exponent(const WeightExpr& e) {
  if (e.terms.empty()) return std::numeric_limits<double>::infinity();
  double k = e.terms[0].k;
  for (const WeightTerm& t : e.terms) k = std::min(k, t.k);
  return k;
}

// ---------------------------------------------------------------------------
// Integrand construction

// Declares integrability metadata for integral of e over (0, inf) against dr.
// Throws NonIntegrable when a term grows at infinity or when the power tail
// is too fat; the caller sees the same error integrate_radial would raise.
inline Integrand make_integrand(const WeightExpr& e) {
  Integrand f;
  if (e.terms.empty()) {
    f.zero_exponent = 0.0;
    f.tail = TailClass::exp_power(1.0);
    f.evaluator = [](double) { return 0.0; };
    f.log_evaluator = [](double) { return 0.0; };
    return f;
  }
  f.zero_exponent = leading_exponent(e);
  double slowest_decay_s = std::numeric_limits<double>::infinity();
  double fattest_power = -std::numeric_limits<double>::infinity();
  bool has_power_tail = false;
  for (const WeightTerm& t : e.terms) {
    if (t.exps.empty()) {
      has_power_tail = true;
      fattest_power = std::max(fattest_power, t.k);
      continue;
    }
    const ExpFactor& dominant = t.exps.back();  // largest s after canonicalization
    if (dominant.beta < 0.0)
      throw NonIntegrable("make_integrand: expression grows at infinity");
    slowest_decay_s = std::min(slowest_decay_s, dominant.s);
  }
  if (has_power_tail) {
    if (!(fattest_power < -1.0))
      throw NonIntegrable("make_integrand: power tail is not integrable");
    f.tail = TailClass::power(fattest_power);
  } else {
    f.tail = TailClass::exp_power(slowest_decay_s);
  }
  WeightExpr copy = e;
  f.evaluator = [copy](double r) { return eval(copy, r); };
  f.log_evaluator = [copy](double t) { return eval_log(copy, t) * std::exp(t); };
  return f;
}

// ---------------------------------------------------------------------------
// Profiles

struct GaussPowerTerm {
  double coeff;
  double k;
  double beta;
  double s;

  GaussPowerTerm(double coeff_, double k_, double beta_, double s_)
      : coeff(coeff_), k(k_), beta(beta_), s(s_) {
    if (!std::isfinite(coeff) || !std::isfinite(k) || !std::isfinite(beta) ||
        !std::isfinite(s))
      throw InvalidParams("GaussPowerTerm: parameters must be finite");
    if (!(k >= 0.0)) throw InvalidParams("GaussPowerTerm: requires k >= 0");
    if (!(beta > 0.0)) throw InvalidParams("GaussPowerTerm: requires beta > 0");
    if (!(s > 0.0)) throw InvalidParams("GaussPowerTerm: requires s > 0");
  }
};

struct RadialProfile {
  std::vector<GaussPowerTerm> terms;

  explicit RadialProfile(std::vector<GaussPowerTerm> terms_) : terms(std::move(terms_)) {
    if (terms.empty()) throw InvalidParams("RadialProfile: needs at least one term");
  }

  double leading_exponent() const {
    double k = terms[0].k;
    for (const auto& t : terms) k = std::min(k, t.k);
    return k;
  }
};

struct ModeFunction {
  int ell;  // spherical mode: 0 (radial) or 1 (times x_1/|x|)
  RadialProfile radial_part;

  ModeFunction(int ell_, RadialProfile radial) : ell(ell_), radial_part(std::move(radial)) {
    if (ell != 0 && ell != 1) throw InvalidParams("ModeFunction: mode must be 0 or 1");
    if (ell == 1 && !(radial_part.leading_exponent() >= 1.0))
      throw InvalidParams("ModeFunction: mode 1 requires leading exponent >= 1");
  }
};

inline WeightExpr to_weight_expr(const RadialProfile& p) {
  WeightExpr e;
  for (const GaussPowerTerm& t : p.terms)
    e = add(e, WeightExpr::gauss(t.coeff, t.k, t.beta, t.s));
  return e;
}

struct ProfileValue {
  double value;
  double derivative;
};

// Pointwise value and derivative, evaluated in log space per term.
inline ProfileValue eval_profile(const RadialProfile& p, double r) {
  if (!(r > 0.0)) throw DomainError("eval_profile: requires r > 0");
  const double t = std::log(r);
  double v = 0.0, d = 0.0;
  for (const GaussPowerTerm& term : p.terms) {
    const double rs = detail::guarded_exp_arg(term.s * t);
    const double arg = term.k * t - (term.beta / term.s) * rs;
    if (arg == -std::numeric_limits<double>::infinity()) continue;
    const double val = term.coeff * std::exp(arg);
    if (val == 0.0) continue;
    v += val;
    d += val * (term.k - term.beta * rs) / r;
  }
  return {v, d};
}

// Smallest tail-decay exponent s across terms.
inline double tail_exponent(const RadialProfile& p) {
  double s = p.terms[0].s;
  for (const auto& t : p.terms) s = std::min(s, t.s);
  return s;
}

// ---------------------------------------------------------------------------
// Transports

// u_lambda(x) = u(lambda x): coeff -> coeff lambda^k, beta -> beta lambda^s.
inline ModeFunction dilate(const ModeFunction& u, double lambda) {
  if (!(lambda > 0.0)) throw InvalidParams("dilate: requires lambda > 0");
  std::vector<GaussPowerTerm> terms;
  terms.reserve(u.radial_part.terms.size());
  for (const GaussPowerTerm& t : u.radial_part.terms)
    terms.emplace_back(t.coeff * std::pow(lambda, t.k), t.k,
                       t.beta * std::pow(lambda, t.s), t.s);
  return ModeFunction(u.ell, RadialProfile(std::move(terms)));
}

// v_bar(x) = lambda^{-1/2} v(|x|^{lambda-1} x) for radial v:
// k -> lambda k, s -> lambda s, beta -> lambda beta, coeff -> lambda^{-1/2} coeff.
inline ModeFunction kelvin_transport(const ModeFunction& v, double lambda) {
  if (v.ell != 0)
    throw InvalidParams("kelvin_transport: only radial test functions are handled");
  if (!(lambda > 0.0)) throw InvalidParams("kelvin_transport: requires lambda > 0");
  std::vector<GaussPowerTerm> terms;
  terms.reserve(v.radial_part.terms.size());
  for (const GaussPowerTerm& t : v.radial_part.terms)
    terms.emplace_back(t.coeff / std::sqrt(lambda), t.k * lambda, t.beta * lambda,
                       t.s * lambda);
  return ModeFunction(0, RadialProfile(std::move(terms)));
}

// ---------------------------------------------------------------------------
// Validation against reduced-integrand exponents

struct ValidationEntry {
  double weight_power;       // p in the weight r^{-p}
  double value_exponent;     // exponent at 0 of w r^{N-1} f^2 style integrands
  double gradient_exponent;  // exponent at 0 of the gradient-seminorm integrand
  bool ok;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool ok = true;
};

// Flags any weight power whose reduced integrand has exponent <= -1 at zero.
inline ValidationReport validate_mode_function(const ModeFunction& u,
                                               const std::vector<double>& weight_powers,
                                               int n_dim) {
  if (n_dim < 2) throw InvalidParams("validate_mode_function: requires N >= 2");
  const double k_min = u.radial_part.leading_exponent();
  double deriv_min = std::numeric_limits<double>::infinity();
  for (const GaussPowerTerm& t : u.radial_part.terms)
    deriv_min = std::min(deriv_min, (t.k > 0.0) ? t.k - 1.0 : t.s - 1.0);

  ValidationReport report;
  for (double p : weight_powers) {
    ValidationEntry e;
    e.weight_power = p;
    e.value_exponent = n_dim - 1.0 - p + 2.0 * k_min;
    double grad = n_dim - 1.0 - p + 2.0 * deriv_min;
    if (u.ell == 1) grad = std::min(grad, n_dim - 1.0 - p + 2.0 * k_min - 2.0);
    e.gradient_exponent = grad;
    e.ok = (e.value_exponent > -1.0) && (e.gradient_exponent > -1.0);
    report.ok = report.ok && e.ok;
    report.entries.push_back(e);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Random generation

enum class ProfileClass { Radial, Mode1 };

// Deterministic in (seed); 1 to 3 terms with k in {0,1,2}, s in [0.8,2.4],
// beta in [0.3,4], |coeff| in [0.05,2]. Retries draws (bounded) until the
// result validates against weight powers 0 and p_max.
inline ModeFunction random_profile(std::uint64_t seed, ProfileClass cls, int n_dim,
                                   double p_max) {
  if (!(p_max < n_dim))
    throw ConstraintUnsatisfiable("random_profile: requires p_max < N");
  const int ell = (cls == ProfileClass::Mode1) ? 1 : 0;
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + attempt + 1);
    const int n_terms = 1 + rng.uniform_int(3);
    std::vector<GaussPowerTerm> terms;
    for (int i = 0; i < n_terms; ++i) {
      int k = rng.uniform_int(3);
      const double s = rng.uniform(0.8, 2.4);
      const double beta = rng.uniform(0.3, 4.0);
      double coeff = rng.uniform(0.05, 2.0);
      if (rng.uniform01() < 0.5) coeff = -coeff;
      if (ell == 1 && k < 1) k = 1;
      // A k = 0 term needs its derivative exponent s - 1 to survive the
      // strongest weight; bump k when the draw cannot.
      if (k == 0 && (n_dim - 1.0 - p_max + 2.0 * (s - 1.0)) <= -0.9) k = 1;
      terms.emplace_back(coeff, double(k), beta, s);
    }
    ModeFunction candidate(ell, RadialProfile(std::move(terms)));
    if (validate_mode_function(candidate, {0.0, p_max}, n_dim).ok) return candidate;
  }
  throw ConstraintUnsatisfiable("random_profile: no valid draw after 64 attempts");
}

}  // namespace ckn
