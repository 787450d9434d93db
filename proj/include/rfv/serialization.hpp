#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rfv/system.hpp"

namespace rfv {

/// JSON form of a system: dims, domain ranges and every rule. Doubles are
/// written in shortest round-trip form, so load(save(s)) is bit-exact.
nlohmann::json system_to_json(const RfvSystem& system);
RfvSystem system_from_json(const nlohmann::json& doc);

nlohmann::json rule_to_json(const FuzzyRule& rule, const Dimensions& dims);
FuzzyRule rule_from_json(const nlohmann::json& doc, const Dimensions& dims);

void save_system(const RfvSystem& system, const std::filesystem::path& path);
RfvSystem load_system(const std::filesystem::path& path);

}  // namespace rfv
