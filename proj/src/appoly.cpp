#include "bohrkit/appoly.hpp"

#include <cstdio>

namespace bohrkit {

APPoly to_floating(const ExactPoly& p) {
  APPoly out(p.basis());
  for (const auto& [f, c] : p.terms()) out.add_term(f, {c.re.get_d(), c.im.get_d()});
  return out;
}

std::string coeff_to_string(const std::complex<double>& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", c.real(), c.imag());
  return buf;
}

std::string coeff_to_string(const ExactComplex& c) {
  return "(" + c.re.get_str() + "," + c.im.get_str() + ")";
}

nlohmann::json to_json(const APPoly& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [f, c] : p.terms()) terms.push_back({{"freq", f.to_string()}, {"coeff", {c.real(), c.imag()}}});
  return {{"terms", terms}};
}

nlohmann::json to_json(const ExactPoly& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [f, c] : p.terms())
    terms.push_back({{"freq", f.to_string()}, {"coeff", {c.re.get_str(), c.im.get_str()}}});
  return {{"terms", terms}};
}

namespace {

const nlohmann::json& terms_of(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ParseError("polynomial JSON needs a 'terms' array");
  return j["terms"];
}

Rational parse_rational(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (!v.is_string()) throw ParseError("exact coefficient parts must be rational strings");
  Rational r;
  if (r.set_str(v.get<std::string>(), 10) != 0) throw ParseError("bad rational '" + v.get<std::string>() + "'");
  r.canonicalize();
  return r;
}

}  // namespace

APPoly appoly_from_json(const BasisPtr& basis, const nlohmann::json& j) {
  APPoly out(basis);
  for (const auto& t : terms_of(j)) {
    const auto& c = t.at("coeff");
    if (!c.is_array() || c.size() != 2) throw ParseError("coefficient must be [re, im]");
    out.add_term(Frequency::parse(basis, t.at("freq").get<std::string>()),
                 {c[0].get<double>(), c[1].get<double>()});
  }
  return out;
}

ExactPoly exact_poly_from_json(const BasisPtr& basis, const nlohmann::json& j) {
  ExactPoly out(basis);
  for (const auto& t : terms_of(j)) {
    const auto& c = t.at("coeff");
    if (!c.is_array() || c.size() != 2) throw ParseError("coefficient must be [re, im]");
    out.add_term(Frequency::parse(basis, t.at("freq").get<std::string>()), {parse_rational(c[0]), parse_rational(c[1])});
  }
  return out;
}

}  // namespace bohrkit
