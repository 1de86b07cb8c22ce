#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spr/error.hpp"

namespace spr {

// Sectioned key=value config text:
//   - sections open with [name]; keys before any section live in section ""
//   - one "key = value" per line, '#' or ';' starts a comment
//   - values: numbers, booleans (true/false/1/0), or comma-separated lists
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile parse_stream(std::istream& in, const std::string& origin) {
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']') {
          throw IoError(origin + ":" + std::to_string(lineno) + ": unterminated section");
        }
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        cfg.sections[section];
        continue;
      }
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": empty key");
      }
      cfg.sections[section][key] = value;
    }
    return cfg;
  }

  static ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    return parse_stream(in, path);
  }

  static ConfigFile parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse_stream(in, "<string>");
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double get_num(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections.at(section).at(key);
    try {
      size_t used = 0;
      const double out = std::stod(v, &used);
      if (trim(v.substr(used)).empty()) return out;
    } catch (const std::exception&) {
    }
    throw IoError("config key [" + section + "] " + key + ": not a number: " + v);
  }

  long long get_int(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    const double v = get_num(section, key, 0.0);
    const long long out = static_cast<long long>(v);
    if (static_cast<double>(out) != v) {
      throw IoError("config key [" + section + "] " + key + ": not an integer");
    }
    return out;
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections.at(section).at(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw IoError("config key [" + section + "] " + key + ": not a boolean: " + v);
  }

  std::vector<double> get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    std::istringstream ls(sections.at(section).at(key));
    std::string item;
    while (std::getline(ls, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      try {
        out.push_back(std::stod(t));
      } catch (const std::exception&) {
        throw IoError("config key [" + section + "] " + key + ": bad list item: " + t);
      }
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }
};

}  // namespace spr
