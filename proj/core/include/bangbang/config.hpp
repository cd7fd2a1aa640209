#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bangbang {

// Flat view of a hierarchical INI-style document. Keys are "section.key";
// values are kept as text and converted on access.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  void erase(const std::string& key);
  bool has(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<long long> get_int_list(const std::string& key,
                                      std::vector<long long> fallback) const;

  // Entries of the form PREFIX<SECTION>__<KEY>=value override "section.key".
  // Returns the number of overrides applied.
  int apply_env_overrides(std::string_view prefix = "BBCTL_");

  // Every key must be listed in `known`.
  void reject_unknown(const std::vector<std::string>& known) const;

  // Canonical serialization: sections and keys in lexicographic order.
  std::string to_ini() const;
  std::uint64_t content_hash() const;
  std::string content_hash_hex() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace bangbang
