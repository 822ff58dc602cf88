#pragma once

// JSON (de)serialization for fitted exponential sums, kept out of
// mortality.hpp so the fitter itself has no third-party includes.
// Schema: {"terms":[{"s_re":..,"s_im":..,"w_re":..,"w_im":..}],
//          "horizon":..,"sup_error":..}

#include <string>

#include <json.hpp>

#include "mortality.hpp"

namespace levyfun::mortality {

inline nlohmann::json to_json(const ExpSum& es) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : es.terms)
    terms.push_back({{"s_re", t.s.real()},
                     {"s_im", t.s.imag()},
                     {"w_re", t.w.real()},
                     {"w_im", t.w.imag()}});
  return {{"terms", terms}, {"horizon", es.horizon}, {"sup_error", es.sup_error}};
}

inline ExpSum expsum_from_json(const nlohmann::json& j) {
  const char* where = "mortality.expsum_from_json";
  ExpSum es;
  try {
    es.horizon = j.at("horizon").get<double>();
    es.sup_error = j.at("sup_error").get<double>();
    for (const auto& t : j.at("terms")) {
      ExpSumTerm term;
      term.s = cplx(t.at("s_re").get<double>(), t.at("s_im").get<double>());
      term.w = cplx(t.at("w_re").get<double>(), t.at("w_im").get<double>());
      if (!(term.s.real() > 0.0)) throw domain_error(where, "node with Re(s) <= 0");
      es.terms.push_back(term);
    }
  } catch (const nlohmann::json::exception& e) {
    throw domain_error(where, std::string("malformed expsum json: ") + e.what());
  }
  return es;
}

}  // namespace levyfun::mortality
