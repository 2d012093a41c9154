#pragma once

// JSON experiment configs with path-tagged errors, plus the fixed-precision
// report writer shared by the command-line tools.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/errors.hpp"

namespace gswf {

inline constexpr const char* kVersion = "0.1.0";

// Reads fields by dotted path ("signal.n"). Every value read, defaults
// included, is copied into resolved() so reports can embed the effective config.
class Config {
 public:
  Config() : root_(nlohmann::json::object()), resolved_(nlohmann::json::object()) {}
  explicit Config(nlohmann::json j) : root_(std::move(j)), resolved_(nlohmann::json::object()) {
    if (!root_.is_object()) throw ConfigError("config: top level must be an object");
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    try {
      return Config(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: ") + path + ": " + e.what());
    }
  }

  bool has(const std::string& path) const { return find(path) != nullptr; }

  double number(const std::string& path, std::optional<double> def = std::nullopt) {
    const auto* v = lookup(path, def ? std::optional<nlohmann::json>(*def) : std::nullopt);
    if (!v->is_number()) fail(path, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    record(path, *v);
    return x;
  }
  double positive(const std::string& path, std::optional<double> def = std::nullopt) {
    const double x = number(path, def);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
  }
  int integer(const std::string& path, std::optional<int> def = std::nullopt) {
    const auto* v = lookup(path, def ? std::optional<nlohmann::json>(*def) : std::nullopt);
    if (!v->is_number_integer()) fail(path, "expected an integer");
    record(path, *v);
    return v->get<int>();
  }
  bool boolean(const std::string& path, std::optional<bool> def = std::nullopt) {
    const auto* v = lookup(path, def ? std::optional<nlohmann::json>(*def) : std::nullopt);
    if (!v->is_boolean()) fail(path, "expected true or false");
    record(path, *v);
    return v->get<bool>();
  }
  std::string string(const std::string& path, std::optional<std::string> def = std::nullopt) {
    const auto* v = lookup(path, def ? std::optional<nlohmann::json>(*def) : std::nullopt);
    if (!v->is_string()) fail(path, "expected a string");
    record(path, *v);
    return v->get<std::string>();
  }
  std::string choice(const std::string& path, const std::vector<std::string>& allowed,
                     std::optional<std::string> def = std::nullopt) {
    const std::string s = string(path, def);
    for (const auto& a : allowed) {
      if (a == s) return s;
    }
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(path, "must be one of " + list);
  }
  std::vector<double> numbers(const std::string& path, std::optional<std::vector<double>> def = std::nullopt) {
    const auto* v = lookup(path, def ? std::optional<nlohmann::json>(*def) : std::nullopt);
    if (!v->is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) fail(path, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    record(path, *v);
    return out;
  }
  // Unparsed subtree; convert it inside tagged() so errors carry the path.
  const nlohmann::json& raw(const std::string& path) {
    const auto* v = lookup(path, std::nullopt);
    record(path, *v);
    return *v;
  }
  void record(const std::string& path, const nlohmann::json& v) { resolved_[pointer(path)] = v; }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
  }
  // Runs f and tags any ConfigError or DomainError it raises with path.
  template <class F>
  static auto tagged(const std::string& path, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError& e) {
      fail(path, e.what());
    } catch (const DomainError& e) {
      fail(path, e.what());
    }
  }

  const nlohmann::json& resolved() const { return resolved_; }

 private:
  static nlohmann::json::json_pointer pointer(const std::string& path) {
    std::string p;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      p += "/" + path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return nlohmann::json::json_pointer(p);
  }
  const nlohmann::json* find(const std::string& path) const {
    const auto ptr = pointer(path);
    return root_.contains(ptr) ? &root_.at(ptr) : nullptr;
  }
  const nlohmann::json* lookup(const std::string& path, std::optional<nlohmann::json> def) {
    if (const auto* v = find(path)) return v;
    if (!def) fail(path, "missing");
    defaults_.push_back(std::make_unique<nlohmann::json>(std::move(*def)));
    return defaults_.back().get();
  }

  nlohmann::json root_;
  nlohmann::json resolved_;
  std::vector<std::unique_ptr<nlohmann::json>> defaults_;
};

namespace detail {

inline void write_json_string(std::ostream& os, const std::string& s) { os << nlohmann::json(s).dump(); }

inline void write_json_value(std::ostream& os, const nlohmann::json& j, int indent) {
  const std::string pad(indent + 2, ' '), end(indent, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_json_string(os, it.key());
        os << ": ";
        write_json_value(os, it.value(), indent + 2);
      }
      os << "\n" << end << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      bool scalar = true;
      for (const auto& e : j) scalar = scalar && !e.is_structured();
      if (scalar) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json_value(os, j[i], indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json_value(os, j[i], indent + 2);
      }
      os << "\n" << end << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

// Objects keep nlohmann's sorted key order; floats are printed with 17
// significant digits so identical inputs give identical bytes.
inline std::string format_json(const nlohmann::json& j) {
  std::ostringstream os;
  detail::write_json_value(os, j, 0);
  os << "\n";
  return os.str();
}

}  // namespace gswf
