#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xsearch {

// A parsed `key=value` configuration file.
//
// Lines may hold several whitespace separated `key=value` pairs. `#` starts a
// comment. `[name]` opens a section; keys before the first section header
// live in the unnamed section "". Later assignments override earlier ones,
// except that entry order is preserved for enumeration.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view section,
                                 std::string_view key) const;
  // Entries of a section in file order.
  const std::vector<std::pair<std::string, std::string>>& entries(
      std::string_view section) const;
  bool has_section(std::string_view section) const;

  std::optional<double> get_double(std::string_view section,
                                   std::string_view key) const;
  std::optional<bool> get_bool(std::string_view section,
                               std::string_view key) const;

 private:
  std::map<std::string, std::vector<std::pair<std::string, std::string>>,
           std::less<>>
      sections_;
};

}  // namespace xsearch
