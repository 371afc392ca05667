#pragma once

// Small helpers for reading JSON configs where every number may also be given
// as an exact rational string ("3/2").

#include <cstdint>
#include <string>

#include <json.hpp>

#include "kgsys/error.hpp"
#include "kgsys/rational.hpp"

namespace kgsys {

using Json = nlohmann::json;

inline double json_number(const Json& v, const std::string& what = "value") {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rational(v.get<std::string>()).get_d();
  throw PreconditionError(what + ": expected a number or rational string, got " + v.dump());
}

inline double get_number(const Json& j, const std::string& key, double fallback) {
  return j.contains(key) ? json_number(j.at(key), key) : fallback;
}

inline std::vector<double> get_numbers(const Json& j, const std::string& key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(json_number(v, key));
  return out;
}

/// FNV-1a 64 over the canonical dump (keys sorted by nlohmann's std::map storage).
inline std::string config_hash(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

}  // namespace kgsys
