#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/util.hpp"

namespace misme {

// Sectioned key/value configuration, TOML-style:
//
//   [training]
//   epochs = 100            # comment
//   optimizer = "adam"
//   coefficients = [1.0, 1.0, 1.0]
//
// Values are kept as raw text and interpreted by the typed getters, so the
// serialized echo reproduces what the user wrote plus any overrides.
class Config {
public:
  Config() = default;

  static Config parse_text(const std::string& text, const std::string& origin = "<config>") {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string no_comment = strip_comment(line);
      const std::string_view stripped = trim(no_comment);
      if (stripped.empty()) continue;
      if (stripped.front() == '[') {
        if (stripped.back() != ']' || stripped.size() < 3) {
          throw ParseError(origin + ":" + std::to_string(line_no) + ": malformed section header");
        }
        section = std::string(trim(stripped.substr(1, stripped.size() - 2)));
        continue;
      }
      const auto eq = stripped.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key{trim(stripped.substr(0, eq))};
      const std::string value{trim(stripped.substr(eq + 1))};
      if (key.empty() || value.empty()) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key or value");
      }
      cfg.sections_[section][key] = value;
    }
    return cfg;
  }

  static Config parse_file(const std::filesystem::path& path) {
    return parse_text(read_text_file(path), path.string());
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  void set(const std::string& section, const std::string& key, const std::string& raw_value) {
    sections_[section][key] = raw_value;
  }

  void set_string(const std::string& section, const std::string& key, const std::string& v) {
    set(section, key, "\"" + v + "\"");
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    return unquote(raw(section, key));
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(raw(section, key));
  }

  long long get_int(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    return parse_int(raw(section, key));
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = raw(section, key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError("config " + section + "." + key + ": expected true/false, got '" + v + "'");
  }

  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& item : list_items(section, key)) out.push_back(parse_double(item));
    return out;
  }

  std::vector<long long> get_int_list(const std::string& section, const std::string& key,
                                      std::vector<long long> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<long long> out;
    for (const auto& item : list_items(section, key)) out.push_back(parse_int(item));
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                           std::vector<std::string> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<std::string> out;
    for (const auto& item : list_items(section, key)) out.push_back(unquote(item));
    return out;
  }

  // Deterministic echo: sections and keys in sorted order.
  std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, keys] : sections_) {
      if (!first) out << "\n";
      first = false;
      if (!section.empty()) out << "[" << section << "]\n";
      for (const auto& [key, value] : keys) out << key << " = " << value << "\n";
    }
    return out.str();
  }

  void save(const std::filesystem::path& path) const { write_text_file(path, serialize()); }

private:
  const std::string& raw(const std::string& section, const std::string& key) const {
    return sections_.at(section).at(key);
  }

  static std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
  }

  static std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
      return v.substr(1, v.size() - 2);
    }
    return v;
  }

  std::vector<std::string> list_items(const std::string& section, const std::string& key) const {
    const std::string& v = raw(section, key);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      throw ParseError("config " + section + "." + key + ": expected [list], got '" + v + "'");
    }
    std::vector<std::string> out;
    for (const auto& piece : split(v.substr(1, v.size() - 2), ',')) {
      const auto item = trim(piece);
      if (!item.empty()) out.emplace_back(item);
    }
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace misme
