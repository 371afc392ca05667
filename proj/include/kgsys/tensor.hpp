#pragma once

// Cubic coefficient tensor C_{j,k,l,m} of F_j(u) = sum C_{j,k,l,m} u_k u_l u_m.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsys/error.hpp"
#include "kgsys/rational.hpp"

namespace kgsys {

struct TensorEntry {
  std::array<int, 4> index;  // zero-based (j, k, l, m)
  Rational value;
};

class CubicTensor {
 public:
  CubicTensor() = default;
  explicit CubicTensor(int components) : n_(components) {
    if (components < 1) throw PreconditionError("CubicTensor: need at least one component");
  }
  CubicTensor(int components, const std::vector<TensorEntry>& entries) : CubicTensor(components) {
    for (const auto& e : entries) add(e.index, e.value);
  }

  int components() const { return n_; }
  const std::vector<TensorEntry>& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }

  /// Adds to an existing coefficient; the tensor is not symmetrized.
  void add(std::array<int, 4> idx, const Rational& value) {
    for (int i : idx)
      if (i < 0 || i >= n_) throw DimensionMismatch("CubicTensor: index out of range");
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const TensorEntry& e) { return e.index == idx; });
    if (it == entries_.end()) {
      if (value != 0) entries_.push_back({idx, value});
    } else {
      it->value += value;
      if (it->value == 0) entries_.erase(it);
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const TensorEntry& a, const TensorEntry& b) { return a.index < b.index; });
  }

  Rational coefficient(int j, int k, int l, int m) const {
    const std::array<int, 4> idx{j, k, l, m};
    for (const auto& e : entries_)
      if (e.index == idx) return e.value;
    return Rational(0);
  }

  CubicTensor scaled(const Rational& s) const {
    CubicTensor out(n_);
    for (const auto& e : entries_) out.add(e.index, e.value * s);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : entries_)
      entries.push_back({e.index[0] + 1, e.index[1] + 1, e.index[2] + 1, e.index[3] + 1, e.value.get_str()});
    return {{"n", n_}, {"entries", entries}};
  }

  /// {"n": N, "entries": [[j,k,l,m,"p/q"], ...]} with one-based indices.
  static CubicTensor from_json(const nlohmann::json& j) {
    if (!j.contains("n") || !j.contains("entries")) throw PreconditionError("tensor config needs 'n' and 'entries'");
    CubicTensor t(j.at("n").get<int>());
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 5) throw PreconditionError("tensor entry must be [j,k,l,m,value]");
      std::array<int, 4> idx{};
      for (int i = 0; i < 4; ++i) idx[i] = e[i].get<int>() - 1;
      t.add(idx, json_rational(e[4]));
    }
    return t;
  }

  /// Accepts "3/2", 2, or 0.25 (decimal literals are read exactly).
  static Rational json_rational(const nlohmann::json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number()) return parse_rational(v.dump());
    throw PreconditionError("expected a rational value, got " + v.dump());
  }

 private:
  int n_ = 0;
  std::vector<TensorEntry> entries_;
};

inline bool operator==(const CubicTensor& a, const CubicTensor& b) {
  if (a.components() != b.components() || a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    if (a.entries()[i].index != b.entries()[i].index || a.entries()[i].value != b.entries()[i].value) return false;
  return true;
}

/// F_1 = (r1 u1^2 + r2 u2^2) u1,  F_2 = (r3 u1^2 + r4 u2^2) u2.
inline CubicTensor rho_family(const Rational& r1, const Rational& r2, const Rational& r3, const Rational& r4) {
  CubicTensor t(2);
  t.add({0, 0, 0, 0}, r1);
  t.add({0, 1, 1, 0}, r2);
  t.add({1, 0, 0, 1}, r3);
  t.add({1, 1, 1, 1}, r4);
  return t;
}

inline CubicTensor scalar_cubic() {
  CubicTensor t(1);
  t.add({0, 0, 0, 0}, Rational(1));
  return t;
}

/// (box + 1) U = |U|^2 U for U = u1 + i u2.
inline CubicTensor complex_cubic() { return rho_family(1, 1, 1, 1); }

/// F_1 = 0, F_2 = u1^3.
inline CubicTensor counterexample_tensor() {
  CubicTensor t(2);
  t.add({1, 0, 0, 0}, Rational(1));
  return t;
}

/// Resolves "scalar_cubic", "complex_cubic", "counterexample", "zero(N)" and
/// "rho_family(r1,r2,r3,r4)" (arguments are exact rational literals).
inline CubicTensor named_tensor(const std::string& name) {
  std::string s;
  for (char c : name)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s == "scalar_cubic") return scalar_cubic();
  if (s == "complex_cubic") return complex_cubic();
  if (s == "counterexample") return counterexample_tensor();
  const auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    const std::string head = s.substr(0, open);
    std::vector<std::string> args;
    std::string cur;
    for (char c : s.substr(open + 1, s.size() - open - 2)) {
      if (c == ',') {
        args.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    args.push_back(cur);
    if (head == "rho_family" && args.size() == 4)
      return rho_family(parse_rational(args[0]), parse_rational(args[1]), parse_rational(args[2]),
                        parse_rational(args[3]));
    if (head == "zero" && args.size() == 1) return CubicTensor(std::stoi(args[0]));
  }
  throw PreconditionError("unknown tensor '" + name + "'");
}

/// A tensor reference in a config: a name string or an inline {"n", "entries"} object.
inline CubicTensor tensor_from_json(const nlohmann::json& j) {
  if (j.is_string()) return named_tensor(j.get<std::string>());
  return CubicTensor::from_json(j);
}

}  // namespace kgsys
