// ckn-lab: command-line surface over the identity, stability, and spectral-gap
// checks. Emits JSON Lines by default, CSV on request; exit codes: 0 all
// checks pass, 1 a mathematical check failed, 2 usage or validation error,
// 3 numerical failure.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "ckn/closedform.hpp"
#include "ckn/identities.hpp"
#include "ckn/poincare.hpp"
#include "ckn/profile_json.hpp"
#include "ckn/profiles.hpp"
#include "ckn/reduction.hpp"
#include "ckn/selftest.hpp"
#include "ckn/stability.hpp"

namespace {

using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string json_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c))
    return std::isfinite(*d) ? fmt_double(*d) : "\"" + fmt_double(*d) + "\"";
  if (const std::int64_t* i = std::get_if<std::int64_t>(&c))
    return std::to_string(*i);
  if (const bool* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  if (const std::string* s = std::get_if<std::string>(&c))
    return "\"" + json_escape(*s) + "\"";
  return "null";
}

std::string csv_cell(const Cell& c) {
  std::string raw;
  if (const double* d = std::get_if<double>(&c))
    raw = fmt_double(*d);
  else if (const std::int64_t* i = std::get_if<std::int64_t>(&c))
    raw = std::to_string(*i);
  else if (const bool* b = std::get_if<bool>(&c))
    raw = *b ? "true" : "false";
  else if (const std::string* s = std::get_if<std::string>(&c))
    raw = *s;
  else
    return "";
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char ch : raw) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::string render(const Table& t, const std::string& format) {
  std::string out;
  if (format == "csv") {
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      if (j) out += ',';
      out += csv_cell(Cell(t.columns[j]));
    }
    out += '\n';
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out += ',';
        out += csv_cell(row[j]);
      }
      out += '\n';
    }
    return out;
  }
  for (const auto& row : t.rows) {
    std::string line = "{";
    bool first = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (std::holds_alternative<std::monostate>(row[j])) continue;
      if (!first) line += ",";
      first = false;
      line += "\"" + json_escape(t.columns[j]) + "\":" + json_cell(row[j]);
    }
    line += "}";
    out += line;
    out += '\n';
  }
  return out;
}

struct Scenario {
  std::vector<int> dims{3};
  double a = -1.0;
  double b = 0.0;
  double lambda = 1.0;
  double alpha = 2.0;
  double beta = 1.0;
  double mu = 0.0;
  double delta = 1.0;
  std::string preset_name;
  std::string theorem_str;
  std::string profile_str;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::vector<std::string> grid_specs;
  std::string format = "json";
  std::string out_path;
  double perturb = 0.0;
  bool a_given = false;
  bool b_given = false;
  bool lambda_given = false;
};

struct CmdOpts {
  CLI::Option* a = nullptr;
  CLI::Option* b = nullptr;
  CLI::Option* lambda = nullptr;
};

CmdOpts add_common(CLI::App* cmd, Scenario& s) {
  CmdOpts tracked;
  cmd->add_option("--dim", s.dims, "space dimension (at least 3); repeatable for selftest")
      ->delimiter(',');
  tracked.a = cmd->add_option("--a", s.a, "value-weight exponent a");
  tracked.b = cmd->add_option("--b", s.b, "gradient-weight exponent b");
  tracked.lambda = cmd->add_option("--lambda", s.lambda,
                                   "family exponent (presets) or measure scale (gaps)");
  cmd->add_option("--alpha", s.alpha, "decay power of the measure density");
  cmd->add_option("--beta", s.beta, "extremal scale parameter");
  cmd->add_option("--mu", s.mu, "singular weight exponent of the measure");
  cmd->add_option("--delta", s.delta, "decay rate of the measure density");
  cmd->add_option("--preset", s.preset_name, "weight pair preset c1..c8");
  cmd->add_option("--theorem", s.theorem_str, "stability statement name, e.g. T3_2");
  cmd->add_option("--profile", s.profile_str, "profile as inline JSON or @file");
  cmd->add_option("--tol", s.tol, "pass tolerance for residual checks");
  cmd->add_option("--seed", s.seed, "seed for the random batteries");
  cmd->add_option("--grid", s.grid_specs,
                  "sweep grid name=lo:hi:count or name=log:lo:hi:count (up to two)");
  cmd->add_option("--format", s.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", s.out_path, "write the report to a file instead of stdout");
  cmd->add_flag("--perturb{0.01}", s.perturb, "")->group("");
  return tracked;
}

int single_dim(const Scenario& s) {
  if (s.dims.size() != 1)
    throw ckn::InvalidParams("this command expects exactly one --dim value");
  return s.dims[0];
}

ckn::ModeFunction parse_profile(const std::string& spec) {
  if (spec.empty())
    return ckn::ModeFunction(
        1, ckn::RadialProfile({ckn::GaussPowerTerm(1.0, 1.0, 1.0, 2.0)}));
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    if (!in) throw ckn::InvalidParams("profile: cannot read file '" + spec.substr(1) + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ckn::mode_function_from_json_text(buf.str());
  }
  return ckn::mode_function_from_json_text(spec);
}

ckn::PresetParams preset_params(const Scenario& s, int n_dim) {
  ckn::PresetParams p;
  p.lambda = s.lambda;
  p.a = s.a;
  p.b = s.b;
  p.bessel = ckn::bessel_pair_inverse_square(n_dim);
  return p;
}

// ---- identity --------------------------------------------------------------

int run_identity(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  if (s.preset_name.empty()) throw ckn::InvalidParams("identity: --preset is required");
  const ckn::ABPair pair = ckn::preset(s.preset_name, n, preset_params(s, n));
  const ckn::ModeFunction u = parse_profile(s.profile_str);

  t.columns = {"preset", "dim", "form", "lhs", "rhs", "remainder", "residual", "pass"};
  bool all_pass = true;
  auto add_row = [&](const char* form, const ckn::IdentityReport& rep) {
    t.rows.push_back({Cell(s.preset_name), Cell(std::int64_t(n)), Cell(std::string(form)),
                      Cell(rep.lhs), Cell(rep.rhs), Cell(rep.remainder), Cell(rep.residual),
                      Cell(rep.pass)});
    all_pass = all_pass && rep.pass;
  };
  add_row("gradient",
          ckn::hardy_identity_check(u, pair, ckn::RemainderForm::Gradient, s.tol));
  add_row("radial", ckn::hardy_identity_check(u, pair, ckn::RemainderForm::Radial, s.tol));
  if (ckn::preset_uses_product_form(s.preset_name)) {
    add_row("product_gradient",
            ckn::ckn_identity_check(u, pair, ckn::RemainderForm::Gradient, s.tol));
    add_row("product_radial",
            ckn::ckn_identity_check(u, pair, ckn::RemainderForm::Radial, s.tol));
  }
  return all_pass ? 0 : 1;
}

// ---- deficit ---------------------------------------------------------------

int run_deficit(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  const ckn::ModeFunction u = parse_profile(s.profile_str);
  const ckn::CknParams p(n, s.a, s.b);
  const double mass = ckn::value_norm_sq(u, ckn::WeightExpr::one(), n);
  const double d1 = ckn::deficit_delta1(u, n);
  const double d2 = ckn::deficit_delta2(u, n);
  const double sni = ckn::scale_noninv_deficit(u, p);
  const double dab = ckn::deficit_ckn1(u, p);
  const double floor1 = -1e-9 * std::max(mass, 1.0);
  const double floor2 = -1e-9 * std::max(mass * mass, 1.0);
  const bool pass = d1 >= floor1 && d2 >= floor2 && sni >= floor1 && dab >= floor1;
  t.columns = {"dim",    "a",      "b",          "mass", "delta1",
               "delta2", "scale_noninv", "deficit_ab", "pass"};
  t.rows.push_back({Cell(std::int64_t(n)), Cell(s.a), Cell(s.b), Cell(mass), Cell(d1),
                    Cell(d2), Cell(sni), Cell(dab), Cell(pass)});
  return pass ? 0 : 1;
}

// ---- distance --------------------------------------------------------------

int run_distance(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  const ckn::ModeFunction u = parse_profile(s.profile_str);
  const ckn::CknParams p(n, s.a, s.b);
  const ckn::DistanceResult r1 = ckn::distance_d1(u, p);
  const ckn::DistanceResult r2 = ckn::distance_d2(u, p);
  const ckn::DistanceResult rg = ckn::graph_distance(u, n);
  const ckn::DistanceResult rw = ckn::weighted_graph_distance(u, p);
  t.columns = {"dim",   "a",     "b",       "d1_sq",    "d1_c",
               "d1_beta", "d2_sq", "d2_beta", "graph_sq", "weighted_graph_sq"};
  t.rows.push_back({Cell(std::int64_t(n)), Cell(s.a), Cell(s.b), Cell(r1.dist_sq),
                    Cell(r1.witness.c), Cell(r1.witness.beta), Cell(r2.dist_sq),
                    Cell(r2.witness.beta), Cell(rg.dist_sq), Cell(rw.dist_sq)});
  return 0;
}

// ---- stability ---------------------------------------------------------------

double aligned_a(int n, double b) { return b * (n + 2.0) / (n - 2.0) - 1.0; }

bool needs_alignment(ckn::Theorem t) {
  return t == ckn::Theorem::T3_6b || t == ckn::Theorem::T3_7 ||
         t == ckn::Theorem::T3_8 || t == ckn::Theorem::D2AB;
}

ckn::CknParams cone_params_for(ckn::Theorem t, int n, double a, double b) {
  switch (t) {
    case ckn::Theorem::T3_5: return ckn::CknParams(n, a, 0.0);
    case ckn::Theorem::T3_6a:
    case ckn::Theorem::T3_6b:
    case ckn::Theorem::T3_7:
    case ckn::Theorem::T3_8:
    case ckn::Theorem::D2AB: return ckn::CknParams(n, a, b);
    default: return ckn::heisenberg_params(n);
  }
}

int run_stability(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  if (s.theorem_str.empty()) throw ckn::InvalidParams("stability: --theorem is required");
  const ckn::Theorem th = ckn::theorem_from_string(s.theorem_str);
  double a = s.a, b = s.b;
  if (needs_alignment(th) && !s.a_given) a = aligned_a(n, b);
  ckn::TheoremParams tp;
  tp.n_dim = n;
  tp.a = a;
  tp.b = b;
  const ckn::ModeFunction u =
      s.profile_str.empty()
          ? ckn::extremal_profile(cone_params_for(th, n, a, b), s.beta, 1.0)
          : parse_profile(s.profile_str);
  const ckn::StabilityReport rep = ckn::check_stability(th, u, tp);
  t.columns = {"theorem", "dim",   "a",     "b",        "deficit",      "bound",
               "ratio",   "empirical", "pass", "witness_c", "witness_beta"};
  t.rows.push_back({Cell(rep.theorem), Cell(std::int64_t(n)), Cell(a), Cell(b),
                    Cell(rep.deficit), Cell(rep.bound), Cell(rep.ratio),
                    Cell(rep.empirical), Cell(rep.pass), Cell(rep.witness.c),
                    Cell(rep.witness.beta)});
  return rep.pass ? 0 : 1;
}

// ---- poincare ----------------------------------------------------------------

ckn::RadialMeasure measure_for(const Scenario& s, int n, double lambda,
                               bool lambda_set) {
  if (lambda_set) {
    if (!(lambda > 0.0)) throw ckn::InvalidParams("poincare: requires lambda > 0");
    return ckn::RadialMeasure(1.0 / (lambda * lambda), 2.0, s.mu, n);
  }
  return ckn::RadialMeasure(s.delta, s.alpha, s.mu, n);
}

int run_poincare(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  const ckn::RadialMeasure m = measure_for(s, n, s.lambda, s.lambda_given);
  const double gap =
      m.mu != 0.0 ? ckn::weighted_gap_estimate(m, 12) : ckn::gap_estimate(m, 12);
  if (s.profile_str.empty()) {
    t.columns = {"dim", "mu", "delta", "alpha", "gap"};
    t.rows.push_back(
        {Cell(std::int64_t(n)), Cell(m.mu), Cell(m.delta), Cell(m.alpha), Cell(gap)});
    return 0;
  }
  const ckn::ModeFunction v = parse_profile(s.profile_str);
  const ckn::PoincareReport rep = ckn::poincare_check(v, m);
  // Ritz gives a lower bound: no test function may undercut it beyond slack.
  const bool pass = rep.ratio >= gap * (1.0 - 1e-6) - 1e-12;
  t.columns = {"dim", "mu",       "delta",    "alpha", "gap",
               "dirichlet", "variance", "ratio", "pass"};
  t.rows.push_back({Cell(std::int64_t(n)), Cell(m.mu), Cell(m.delta), Cell(m.alpha),
                    Cell(gap), Cell(rep.dirichlet), Cell(rep.variance), Cell(rep.ratio),
                    Cell(pass)});
  return pass ? 0 : 1;
}

// ---- bessel ------------------------------------------------------------------

int run_bessel(const Scenario& s, Table& t) {
  const int n = single_dim(s);
  t.columns = {"pair", "dim", "residual", "pass"};
  bool all_pass = true;
  auto add_row = [&](const char* name, const ckn::BesselPair& pair) {
    const double res = ckn::bessel_residual(pair, n);
    const bool pass = res <= s.tol;
    all_pass = all_pass && pass;
    t.rows.push_back(
        {Cell(std::string(name)), Cell(std::int64_t(n)), Cell(res), Cell(pass)});
  };
  add_row("inverse_square", ckn::bessel_pair_inverse_square(n));
  add_row("gaussian", ckn::bessel_pair_gaussian(n));
  return all_pass ? 0 : 1;
}

// ---- selftest ------------------------------------------------------------------

int run_selftest_cmd(const Scenario& s, bool dims_given, Table& t) {
  ckn::SelfTestOptions opts;
  if (dims_given) opts.dims = s.dims;
  opts.perturb = s.perturb;
  opts.seed = s.seed;
  const ckn::SelfTestReport rep = ckn::run_selftest(opts);
  t.columns = {"criterion", "name",    "expected", "computed", "rel_err",
               "pass",      "deficit", "bound",    "ratio"};
  for (const ckn::SelfCheck& c : rep.checks) {
    std::vector<Cell> row = {Cell(std::int64_t(c.criterion)),
                             Cell(c.name),
                             Cell(c.expected),
                             Cell(c.computed),
                             Cell(c.rel_err),
                             Cell(c.pass),
                             Cell(std::monostate{}),
                             Cell(std::monostate{}),
                             Cell(std::monostate{})};
    if (c.has_report) {
      row[6] = Cell(c.deficit);
      row[7] = Cell(c.bound);
      row[8] = Cell(c.ratio);
    }
    t.rows.push_back(std::move(row));
  }
  return rep.all_pass ? 0 : 1;
}

// ---- sweep ---------------------------------------------------------------------

struct Grid {
  std::string name;
  std::vector<double> values;
};

Grid parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ckn::InvalidParams("grid: expected name=lo:hi:count, got '" + spec + "'");
  Grid g;
  g.name = spec.substr(0, eq);
  if (g.name != "a" && g.name != "b" && g.name != "beta" && g.name != "lambda" &&
      g.name != "dim")
    throw ckn::InvalidParams("grid: parameter must be one of a, b, beta, lambda, dim");
  std::string rest = spec.substr(eq + 1);
  bool logspace = false;
  if (rest.rfind("log:", 0) == 0) {
    logspace = true;
    rest = rest.substr(4);
  }
  std::vector<std::string> parts;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3)
    throw ckn::InvalidParams("grid: expected name=lo:hi:count, got '" + spec + "'");
  double lo, hi;
  long long count;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    count = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
  } catch (const std::exception&) {
    throw ckn::InvalidParams("grid: cannot parse '" + spec + "'");
  }
  if (count < 1) throw ckn::InvalidParams("grid: count must be at least 1");
  if (logspace && (!(lo > 0.0) || !(hi > 0.0)))
    throw ckn::InvalidParams("grid: log spacing needs positive endpoints");
  for (long long i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : double(i) / double(count - 1);
    g.values.push_back(logspace ? std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * frac)
                                : lo + (hi - lo) * frac);
  }
  return g;
}

void apply_grid_value(Scenario& s, const std::string& name, double value) {
  if (name == "a") {
    s.a = value;
    s.a_given = true;
  } else if (name == "b") {
    s.b = value;
    s.b_given = true;
  } else if (name == "beta") {
    s.beta = value;
  } else if (name == "lambda") {
    s.lambda = value;
    s.lambda_given = true;
  } else {
    s.dims = {int(std::llround(value))};
  }
}

int run_sweep(const Scenario& s, Table& t) {
  if (s.grid_specs.empty()) throw ckn::InvalidParams("sweep: at least one --grid is required");
  if (s.grid_specs.size() > 2)
    throw ckn::InvalidParams("sweep: at most two --grid parameters");
  std::vector<Grid> grids;
  for (const std::string& spec : s.grid_specs) grids.push_back(parse_grid(spec));
  std::size_t cells = 1;
  for (const Grid& g : grids) cells *= g.values.size();
  if (cells > 10000) throw ckn::InvalidParams("sweep: grid exceeds 10000 cells");

  enum class Template { Stability, Identity, Poincare };
  const Template tpl = !s.theorem_str.empty() ? Template::Stability
                       : !s.preset_name.empty() ? Template::Identity
                                                : Template::Poincare;
  ckn::Theorem th = ckn::Theorem::T3_1;
  if (tpl == Template::Stability) th = ckn::theorem_from_string(s.theorem_str);

  bool fixed_profile = !s.profile_str.empty();
  ckn::ModeFunction fixed =
      fixed_profile ? parse_profile(s.profile_str)
                    : ckn::ModeFunction(1, ckn::RadialProfile({ckn::GaussPowerTerm(
                                               1.0, 1.0, 1.0, 2.0)}));

  for (const Grid& g : grids) t.columns.push_back(g.name);
  if (tpl == Template::Stability)
    t.columns.insert(t.columns.end(), {"deficit", "bound", "ratio", "status"});
  else if (tpl == Template::Identity)
    t.columns.insert(t.columns.end(), {"lhs", "rhs", "residual", "remainder", "status"});
  else
    t.columns.insert(t.columns.end(), {"gap", "status"});

  double min_ratio = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  double max_residual = 0.0;
  bool any_fail = false;

  std::vector<std::size_t> idx(grids.size(), 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rem = cell;
    for (std::size_t gi = grids.size(); gi-- > 0;) {
      idx[gi] = rem % grids[gi].values.size();
      rem /= grids[gi].values.size();
    }
    Scenario cs = s;
    std::vector<Cell> row;
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
      const double v = grids[gi].values[idx[gi]];
      apply_grid_value(cs, grids[gi].name, v);
      row.push_back(grids[gi].name == "dim" ? Cell(std::int64_t(std::llround(v)))
                                            : Cell(v));
    }
    try {
      const int n = single_dim(cs);
      if (tpl == Template::Stability) {
        double a = cs.a, b = cs.b;
        if (needs_alignment(th) && !cs.a_given) a = aligned_a(n, b);
        ckn::TheoremParams tp;
        tp.n_dim = n;
        tp.a = a;
        tp.b = b;
        const ckn::ModeFunction u =
            fixed_profile
                ? fixed
                : ckn::extremal_profile(cone_params_for(th, n, a, b), cs.beta, 1.0);
        const ckn::StabilityReport rep = ckn::check_stability(th, u, tp);
        row.insert(row.end(), {Cell(rep.deficit), Cell(rep.bound), Cell(rep.ratio),
                               Cell(std::string(rep.pass ? "ok" : "fail"))});
        if (std::isfinite(rep.ratio)) min_ratio = std::min(min_ratio, rep.ratio);
        any_fail = any_fail || !rep.pass;
      } else if (tpl == Template::Identity) {
        const ckn::ABPair pair = ckn::preset(cs.preset_name, n, preset_params(cs, n));
        const ckn::ModeFunction& u = fixed;
        const ckn::IdentityReport g =
            ckn::hardy_identity_check(u, pair, ckn::RemainderForm::Gradient, cs.tol);
        const ckn::IdentityReport r =
            ckn::hardy_identity_check(u, pair, ckn::RemainderForm::Radial, cs.tol);
        const double residual = std::max(g.residual, r.residual);
        const bool ok = g.pass && r.pass;
        row.insert(row.end(),
                   {Cell(g.lhs), Cell(g.rhs), Cell(residual),
                    Cell(std::min(g.remainder, r.remainder)),
                    Cell(std::string(ok ? "ok" : "fail"))});
        max_residual = std::max(max_residual, residual);
        any_fail = any_fail || !ok;
      } else {
        const ckn::RadialMeasure m = measure_for(cs, n, cs.lambda, cs.lambda_given);
        const double gap = m.mu != 0.0 ? ckn::weighted_gap_estimate(m, 12)
                                       : ckn::gap_estimate(m, 12);
        row.insert(row.end(), {Cell(gap), Cell(std::string("ok"))});
        if (std::isfinite(gap)) min_gap = std::min(min_gap, gap);
      }
    } catch (const std::exception& e) {
      const std::size_t want = t.columns.size() - 1;
      while (row.size() < want) row.push_back(Cell(std::monostate{}));
      row.push_back(Cell(std::string("error: ") + e.what()));
    }
    t.rows.push_back(std::move(row));
  }

  // summary footer
  std::vector<Cell> footer(t.columns.size(), Cell(std::monostate{}));
  if (tpl == Template::Stability) {
    if (std::isfinite(min_ratio)) footer[t.columns.size() - 2] = Cell(min_ratio);
    footer.back() = Cell(std::string("min_ratio"));
  } else if (tpl == Template::Identity) {
    footer[t.columns.size() - 3] = Cell(max_residual);
    footer.back() = Cell(std::string("max_residual"));
  } else {
    if (std::isfinite(min_gap)) footer[t.columns.size() - 2] = Cell(min_gap);
    footer.back() = Cell(std::string("min_gap"));
  }
  t.rows.push_back(std::move(footer));
  return any_fail ? 1 : 0;
}

int emit(const Table& t, const Scenario& s) {
  const std::string text = render(t, s.format);
  if (s.out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return 0;
  }
  std::ofstream out(s.out_path, std::ios::binary);
  if (!out) throw ckn::InvalidParams("cannot open output file '" + s.out_path + "'");
  out.write(text.data(), std::streamsize(text.size()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted identity and stability checks"};
  app.require_subcommand(1);

  Scenario s;
  CLI::App* c_identity = app.add_subcommand("identity", "check one weight-pair identity");
  CLI::App* c_deficit = app.add_subcommand("deficit", "evaluate the deficit functionals");
  CLI::App* c_distance = app.add_subcommand("distance", "distances to the extremal cone");
  CLI::App* c_stability = app.add_subcommand("stability", "check one stability statement");
  CLI::App* c_poincare = app.add_subcommand("poincare", "spectral gap of a radial measure");
  CLI::App* c_bessel = app.add_subcommand("bessel", "certify the built-in weight pairs");
  CLI::App* c_sweep = app.add_subcommand("sweep", "grid sweep of a scenario");
  CLI::App* c_selftest = app.add_subcommand("selftest", "run the full verification battery");

  std::vector<CLI::App*> cmds = {c_identity, c_deficit, c_distance, c_stability,
                                 c_poincare, c_bessel,  c_sweep,    c_selftest};
  std::vector<CmdOpts> tracked;
  for (CLI::App* cmd : cmds) tracked.push_back(add_common(cmd, s));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!cmds[i]->parsed()) continue;
    s.a_given = tracked[i].a->count() > 0;
    s.b_given = tracked[i].b->count() > 0;
    s.lambda_given = tracked[i].lambda->count() > 0;
  }

  try {
    Table t;
    int code = 0;
    if (c_identity->parsed())
      code = run_identity(s, t);
    else if (c_deficit->parsed())
      code = run_deficit(s, t);
    else if (c_distance->parsed())
      code = run_distance(s, t);
    else if (c_stability->parsed())
      code = run_stability(s, t);
    else if (c_poincare->parsed())
      code = run_poincare(s, t);
    else if (c_bessel->parsed())
      code = run_bessel(s, t);
    else if (c_sweep->parsed())
      code = run_sweep(s, t);
    else
      code = run_selftest_cmd(s, !s.dims.empty() && c_selftest->count("--dim") > 0, t);
    emit(t, s);
    return code;
  } catch (const ckn::NoConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ckn::Overflow& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ckn::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ckn::ConstraintUnsatisfiable& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ckn::DegenerateNorm& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
