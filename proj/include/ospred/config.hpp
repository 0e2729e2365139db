#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ospred {

// Flat key=value configuration, one entry per line, '#' starts a comment.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  // Comma-separated list values.
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace ospred
