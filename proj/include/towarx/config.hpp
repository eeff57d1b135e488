#pragma once

// `key = value` configuration files. Blank lines and lines starting with '#'
// are ignored; a trailing '# comment' after a value is stripped. Keys may be
// repeated only if the caller reads them as lists.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "towarx/error.hpp"
#include "towarx/text.hpp"

namespace towarx {

class KeyValueConfig {
public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view text = line;
      if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
      text = trim(text);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
      auto key = std::string(trim(text.substr(0, eq)));
      auto value = std::string(trim(text.substr(eq + 1)));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      if (key.empty()) throw ParseError(line_no, "empty key");
      if (cfg.values_.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_[key] = true;
    return it->second;
  }

  double number(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const auto d = parse_double(*v);
    if (!d) throw InputError("config key '" + key + "': not a number: '" + *v + "'");
    return *d;
  }

  long long integer(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
      throw InputError("config key '" + key + "': not an integer: '" + *v + "'");
    }
    return out;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
      throw InputError("config key '" + key + "': not an unsigned integer: '" + *v + "'");
    }
    return out;
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }

  /// Comma-separated numbers; an empty value is an empty list.
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    if (trim(*v).empty()) return out;
    for (auto part : split(*v)) {
      const auto d = parse_double(part);
      if (!d) throw InputError("config key '" + key + "': not a number list: '" + *v + "'");
      out.push_back(*d);
    }
    return out;
  }

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

} // namespace towarx
