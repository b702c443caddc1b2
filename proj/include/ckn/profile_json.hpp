#pragma once

// JSON serialization for mode functions:
//   {"mode": 0, "terms": [{"coeff": 1.0, "k": 0.0, "beta": 1.0, "s": 2.0}]}

#include <json.hpp>

#include "ckn/errors.hpp"
#include "ckn/profiles.hpp"

namespace ckn {

inline nlohmann::json mode_function_to_json(const ModeFunction& u) {
  nlohmann::json terms = nlohmann::json::array();
  for (const GaussPowerTerm& t : u.radial_part.terms) {
    terms.push_back({{"coeff", t.coeff}, {"k", t.k}, {"beta", t.beta}, {"s", t.s}});
  }
  return {{"mode", u.ell}, {"terms", terms}};
}

inline ModeFunction mode_function_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("mode") || !j.contains("terms"))
    throw InvalidParams("profile JSON: expected object with 'mode' and 'terms'");
  if (!j["mode"].is_number_integer())
    throw InvalidParams("profile JSON: 'mode' must be an integer");
  if (!j["terms"].is_array() || j["terms"].empty())
    throw InvalidParams("profile JSON: 'terms' must be a nonempty array");
  std::vector<GaussPowerTerm> terms;
  for (const auto& jt : j["terms"]) {
    for (const char* field : {"coeff", "k", "beta", "s"}) {
      if (!jt.is_object() || !jt.contains(field) || !jt[field].is_number())
        throw InvalidParams(std::string("profile JSON: term needs numeric '") + field + "'");
    }
    terms.emplace_back(jt["coeff"].get<double>(), jt["k"].get<double>(),
                       jt["beta"].get<double>(), jt["s"].get<double>());
  }
  return ModeFunction(j["mode"].get<int>(), RadialProfile(std::move(terms)));
}

inline ModeFunction mode_function_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidParams("profile JSON: parse error");
  return mode_function_from_json(j);
}

}  // namespace ckn
