#include "bangbang/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bangbang/error.hpp"
#include "bangbang/random.hpp"

extern char** environ;

namespace bangbang {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Config Config::parse(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  Config cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty()) {
        throw ConfigError("config key '" + section + "' is outside any [section]");
      }
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!value.empty()) {
        throw ConfigError("nested config section under '" + section + "'");
      }
      cfg.entries_[section + "." + key] = trim(value.data());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, std::string value) {
  if (key.find('.') == std::string::npos) {
    throw ConfigError("config key must be 'section.key': " + key);
  }
  entries_[key] = std::move(value);
}

void Config::erase(const std::string& key) { entries_.erase(key); }

bool Config::has(const std::string& key) const { return entries_.contains(key); }

std::optional<std::string> Config::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  char* end = nullptr;
  double out = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": expected a number, got '" + *v + "'");
  }
  return out;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    // accept scientific notation for integral values such as 2e5
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0' || d != static_cast<double>(static_cast<long long>(d))) {
      throw ConfigError("config key " + key + ": expected an integer, got '" + *v + "'");
    }
    return static_cast<long long>(d);
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::string s = lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key " + key + ": expected a boolean, got '" + *v + "'");
}

std::vector<long long> Config::get_int_list(const std::string& key,
                                            std::vector<long long> fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<long long> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    if (t.empty()) continue;
    long long x = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw ConfigError("config key " + key + ": bad integer list entry '" + t + "'");
    }
    out.push_back(x);
  }
  return out;
}

int Config::apply_env_overrides(std::string_view prefix) {
  int applied = 0;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    if (!entry.starts_with(prefix)) continue;
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string name(entry.substr(prefix.size(), eq - prefix.size()));
    auto sep = name.find("__");
    if (sep == std::string::npos) continue;
    std::string key = lower(name.substr(0, sep)) + "." + lower(name.substr(sep + 2));
    entries_[key] = std::string(entry.substr(eq + 1));
    ++applied;
  }
  return applied;
}

void Config::reject_unknown(const std::vector<std::string>& known) const {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : entries_) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key: " + key);
  }
}

std::string Config::to_ini() const {
  std::ostringstream out;
  std::string current;
  for (const auto& [key, value] : entries_) {
    auto dot = key.find('.');
    std::string section = key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << "\n";
      out << "[" << section << "]\n";
      current = section;
    }
    out << key.substr(dot + 1) << " = " << value << "\n";
  }
  return out.str();
}

std::uint64_t Config::content_hash() const { return fnv1a64(to_ini()); }

std::string Config::content_hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(content_hash()));
  return buf;
}

}  // namespace bangbang
