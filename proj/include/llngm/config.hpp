#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace llngm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value configuration with [section] headers, `key = value` lines
// and '#' comments. Keys are addressed as "section.key". Parse errors carry
// the line number and offending field.
class Config {
 public:
  static Config from_string(const std::string& text);
  static Config from_file(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& dflt) const;
  std::string require_str(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  long get_long(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_vector(const std::string& key,
                                 const std::vector<double>& dflt) const;

  // "section.key=value" override (CLI --set).
  void apply_override(const std::string& assignment);

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace llngm
