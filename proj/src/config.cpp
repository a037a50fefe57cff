#include "llngm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace llngm {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

std::string Config::get_str(const std::string& key,
                            const std::string& dflt) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

std::string Config::require_str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing required key " + key);
  return it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw ConfigError("config: key " + key + " is not a number: '" +
                      it->second + "'");
  return v;
}

long Config::get_long(const std::string& key, long dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw ConfigError("config: key " + key + " is not an integer: '" +
                      it->second + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key " + key + " is not a boolean: '" + v + "'");
}

std::vector<double> Config::get_vector(const std::string& key,
                                       const std::vector<double>& dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("config: key " + key + " has a non-numeric entry '" +
                        tok + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw ConfigError("config: key " + key + " is an empty list");
  return out;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like section.key=value, got '" +
                      assignment + "'");
  kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

}  // namespace llngm
