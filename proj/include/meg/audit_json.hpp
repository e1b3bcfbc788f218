#pragma once

#include <json.hpp>

#include "meg/expansion.hpp"

namespace meg {

/// Audit report JSON: one object per audited (h, k) with
/// {mode, h, k, verdict, witness?, samples, minRatio}.
inline nlohmann::json toJson(const ExpansionAuditItem& item) {
  nlohmann::json j{
      {"mode", item.mode}, {"h", item.h}, {"k", item.k}, {"verdict", item.verdict}, {"samples", item.samples}};
  if (!std::isnan(item.minRatio)) j["minRatio"] = item.minRatio;
  if (item.witness) j["witness"] = *item.witness;
  return j;
}

inline nlohmann::json toJson(const ExpansionReport& report) {
  nlohmann::json j{{"mode", report.mode}, {"items", nlohmann::json::array()}};
  for (const auto& item : report.items) j["items"].push_back(toJson(item));
  return j;
}

}  // namespace meg
