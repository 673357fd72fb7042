#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "twofluid/errors.hpp"

namespace twofluid {

/// Flat `key = value` text with `#` comments; keys are dotted paths.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<input>") {
    Config c;
    c.source_ = source;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(no) + ": expected key = value");
      }
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(no) + ": empty key");
      if (c.values_.count(key)) {
        throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
      }
      c.values_[key] = val;
      c.lines_[key] = no;
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
    return parse(f, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
    lines_[key] = 0;
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::ConfigError, source_ + ": missing key '" + key + "'");
    return it->second;
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  int integer(const std::string& key) const {
    const double v = num(key);
    if (v != static_cast<double>(static_cast<long>(v))) fail(key, "expected an integer");
    return static_cast<int>(v);
  }
  int integer(const std::string& key, int def) const { return has(key) ? integer(key) : def; }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string& v = str(key);
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(key, "expected a boolean");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::istringstream is(str(key));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(key, tok));
    return out;
  }

  /// Keys starting with `prefix`, in lexical order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = values_.lower_bound(prefix); it != values_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
      out.push_back(it->first);
    }
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = lines_.find(key);
    const std::string where = it != lines_.end() && it->second > 0 ? ":" + std::to_string(it->second) : "";
    throw Error(ErrorKind::ConfigError, source_ + where + ": key '" + key + "': " + msg);
  }

  double to_double(const std::string& key, const std::string& s) const {
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0' || errno == ERANGE) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

}  // namespace twofluid
