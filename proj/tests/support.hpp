#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ckn/profiles.hpp"

namespace testsupport {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-300});
}

// u = x_1 e^{-|x|^2/2}
inline ckn::ModeFunction witness_mode() {
  return ckn::ModeFunction(1, ckn::RadialProfile({ckn::GaussPowerTerm(1.0, 1.0, 1.0, 2.0)}));
}

// e^{-beta |x|^2 / 2}
inline ckn::ModeFunction gaussian_mode(double beta = 1.0) {
  return ckn::ModeFunction(0, ckn::RadialProfile({ckn::GaussPowerTerm(1.0, 0.0, beta, 2.0)}));
}

// Deterministic draw that advances the seed until every functional the
// caller computes in `check` is integrable for the candidate.
template <class Check>
ckn::ModeFunction admissible_draw(std::uint64_t& seed, ckn::ProfileClass cls, int n_dim,
                                  double p_max, Check&& check) {
  for (int tries = 0; tries < 400; ++tries) {
    ckn::ModeFunction u = ckn::random_profile(seed++, cls, n_dim, p_max);
    try {
      check(u);
      return u;
    } catch (const ckn::NonIntegrable&) {
      continue;
    }
  }
  throw std::runtime_error("admissible_draw: exhausted attempts");
}

}  // namespace testsupport
