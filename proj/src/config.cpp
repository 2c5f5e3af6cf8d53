#include "mfgcip/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <sstream>

namespace mfgcip {

namespace pt = boost::property_tree;

Config Config::load(const std::string& path) {
  Config c;
  try {
    pt::read_ini(path, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  try {
    pt::read_ini(in, c.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void Config::save(const std::string& path) const {
  try {
    pt::write_ini(path, tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

bool Config::has(const std::string& key) const { return bool(tree_.get_optional<std::string>(key)); }

std::string Config::get_string(const std::string& key, const std::string& def) const {
  return tree_.get<std::string>(key, def);
}

std::string Config::require_string(const std::string& key) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) throw ConfigError("config: missing key '" + key + "'");
  return *v;
}

double Config::get_double(const std::string& key, double def) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return def;
  try {
    std::size_t pos = 0;
    double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not a number: " + *v);
  }
}

int Config::get_int(const std::string& key, int def) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return def;
  try {
    std::size_t pos = 0;
    int d = std::stoi(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not an integer: " + *v);
  }
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: " + *v);
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& def) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return def;
  try {
    return parse_doubles(*v);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not a number list: " + *v);
  }
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

void Config::set(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  tree_.put(key, os.str());
}

void Config::set(const std::string& key, const std::vector<double>& values) { tree_.put(key, format_doubles(values)); }

std::string format_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto b = tok.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t pos = 0;
    out.push_back(std::stod(tok.substr(b), &pos));
  }
  return out;
}

}  // namespace mfgcip
