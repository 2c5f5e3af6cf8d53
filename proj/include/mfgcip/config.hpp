#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace mfgcip {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// INI-style text: [table] headers and key = value lines.
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  static Config parse(const std::string& text);
  void save(const std::string& path) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, const std::vector<double>& values);

  const boost::property_tree::ptree& tree() const { return tree_; }

 private:
  boost::property_tree::ptree tree_;
};

std::string format_doubles(const std::vector<double>& v);
std::vector<double> parse_doubles(const std::string& s);

}  // namespace mfgcip
