#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slotfill/corpus.hpp"
#include "slotfill/error.hpp"

namespace slotfill::detail {

/// Calls `fn(object, line_number)` for every non-blank line of a JSONL
/// stream. Parse failures and non-object lines become DataError.
inline void for_each_jsonl(std::istream& in,
                           const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw DataError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    fn(obj, line_no);
  }
}

inline std::string require_string(const nlohmann::json& obj, const char* field, std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw DataError("line " + std::to_string(line_no) + ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

inline std::vector<SlotText> parse_slot_list(const nlohmann::json& arr, std::size_t line_no) {
  if (!arr.is_array()) {
    throw DataError("line " + std::to_string(line_no) + ": slot list must be an array");
  }
  std::vector<SlotText> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    if (!item.is_object()) {
      throw DataError("line " + std::to_string(line_no) + ": slot entries must be objects");
    }
    out.push_back({require_string(item, "key", line_no), require_string(item, "value", line_no)});
  }
  return out;
}

inline nlohmann::json slot_json(const SlotText& s) {
  return nlohmann::json{{"key", s.key}, {"value", s.value}};
}

}  // namespace slotfill::detail
