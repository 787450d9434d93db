#include "rfv/serialization.hpp"

#include <fstream>

namespace rfv {

namespace {

constexpr const char* kFormat = "rfv-system";
constexpr int kVersion = 1;

const nlohmann::json& require(const nlohmann::json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ModelError(where + ": missing key '" + key + "'");
  return doc.at(key);
}

std::vector<double> numbers(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_array()) throw ModelError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(doc.size());
  for (const auto& v : doc) {
    if (!v.is_number()) throw ModelError(where + ": expected a number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

nlohmann::json rule_to_json(const FuzzyRule& rule, const Dimensions& dims) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < dims.rule_outputs(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < dims.coefficient_columns(); ++j) row.push_back(rule.at(i, j));
    rows.push_back(std::move(row));
  }
  return {{"site", rule.site}, {"coefficients", std::move(rows)}, {"frozen", rule.frozen}};
}

FuzzyRule rule_from_json(const nlohmann::json& doc, const Dimensions& dims) {
  FuzzyRule rule;
  rule.site = numbers(require(doc, "site", "rule"), "rule.site");
  const auto& rows = require(doc, "coefficients", "rule");
  if (!rows.is_array() || rows.size() != dims.rule_outputs()) {
    throw ModelError("rule.coefficients: expected " + std::to_string(dims.rule_outputs()) + " rows");
  }
  for (const auto& row : rows) {
    const auto values = numbers(row, "rule.coefficients");
    if (values.size() != dims.coefficient_columns()) {
      throw ModelError("rule.coefficients: expected " + std::to_string(dims.coefficient_columns()) + " columns");
    }
    rule.coefficients.insert(rule.coefficients.end(), values.begin(), values.end());
  }
  if (doc.contains("frozen")) rule.frozen = doc.at("frozen").get<bool>();
  rule.validate(dims);
  return rule;
}

nlohmann::json system_to_json(const RfvSystem& system) {
  const Dimensions& dims = system.dims();
  nlohmann::json rules = nlohmann::json::array();
  for (const FuzzyRule& r : system.rules()) rules.push_back(rule_to_json(r, dims));
  return {
      {"format", kFormat},
      {"version", kVersion},
      {"dims", {{"inputs", dims.inputs}, {"internal", dims.internal}, {"outputs", dims.outputs}}},
      {"domain", {{"lower", system.domain().lower}, {"upper", system.domain().upper}}},
      {"initial_state", system.initial_state()},
      {"rules", std::move(rules)},
  };
}

RfvSystem system_from_json(const nlohmann::json& doc) {
  try {
    if (require(doc, "format", "system") != kFormat) throw ModelError("system: unknown format tag");
    if (require(doc, "version", "system") != kVersion) throw ModelError("system: unsupported version");
    const auto& d = require(doc, "dims", "system");
    Dimensions dims{require(d, "inputs", "dims").get<std::size_t>(), require(d, "internal", "dims").get<std::size_t>(),
                    require(d, "outputs", "dims").get<std::size_t>()};
    dims.validate();
    const auto& dom = require(doc, "domain", "system");
    geometry::Box box{numbers(require(dom, "lower", "domain"), "domain.lower"),
                      numbers(require(dom, "upper", "domain"), "domain.upper")};
    std::vector<FuzzyRule> rules;
    for (const auto& r : require(doc, "rules", "system")) rules.push_back(rule_from_json(r, dims));
    RfvSystem system(dims, std::move(rules), std::move(box));
    if (doc.contains("initial_state")) system.set_initial_state(numbers(doc.at("initial_state"), "initial_state"));
    return system;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("system: malformed document: ") + e.what());
  } catch (const geometry::GeometryError& e) {
    throw ModelError(std::string("system: ") + e.what());
  }
}

void save_system(const RfvSystem& system, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot open " + path.string() + " for writing");
  out << system_to_json(system).dump(2) << '\n';
  if (!out) throw ModelError("failed writing " + path.string());
}

RfvSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
  return system_from_json(doc);
}

}  // namespace rfv
