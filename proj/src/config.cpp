#include "xsearch/config.h"

#include <fstream>
#include <sstream>

#include "xsearch/error.h"

namespace xsearch {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::vector<std::pair<std::string, std::string>>& empty_entries() {
  static const std::vector<std::pair<std::string, std::string>> kEmpty;
  return kEmpty;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile config;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      config.sections_[section];
      continue;
    }
    // One or more key=value tokens, whitespace separated.
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto end = line.find_first_of(" \t", start);
      if (end == std::string_view::npos) end = line.size();
      std::string_view token = line.substr(start, end - start);
      // Allow `key = value` with spaces around the equals sign.
      if (token.find('=') == std::string_view::npos) {
        const auto eq = line.find_first_not_of(" \t", end);
        if (eq != std::string_view::npos && line[eq] == '=') {
          auto vstart = line.find_first_not_of(" \t", eq + 1);
          if (vstart == std::string_view::npos) vstart = line.size();
          auto vend = line.find_first_of(" \t", vstart);
          if (vend == std::string_view::npos) vend = line.size();
          config.sections_[section].emplace_back(
              std::string(token),
              std::string(line.substr(vstart, vend - vstart)));
          pos = vend;
          continue;
        }
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key=value, got '" + std::string(token) +
                          "'");
      }
      const auto eq = token.find('=');
      std::string key(trim(token.substr(0, eq)));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty key");
      config.sections_[section].emplace_back(
          std::move(key), std::string(trim(token.substr(eq + 1))));
      pos = end;
    }
  }
  return config;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<std::string> ConfigFile::get(std::string_view section,
                                           std::string_view key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) return std::nullopt;
  std::optional<std::string> value;
  for (const auto& [k, v] : it->second)
    if (k == key) value = v;
  return value;
}

const std::vector<std::pair<std::string, std::string>>& ConfigFile::entries(
    std::string_view section) const {
  const auto it = sections_.find(section);
  return it == sections_.end() ? empty_entries() : it->second;
}

bool ConfigFile::has_section(std::string_view section) const {
  return sections_.find(section) != sections_.end();
}

std::optional<double> ConfigFile::get_double(std::string_view section,
                                             std::string_view key) const {
  const auto value = get(section, key);
  if (!value) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(*value, &used);
    if (used != value->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) +
                      "' is not a number: " + *value);
  }
}

std::optional<bool> ConfigFile::get_bool(std::string_view section,
                                         std::string_view key) const {
  const auto value = get(section, key);
  if (!value) return std::nullopt;
  if (*value == "1" || *value == "true" || *value == "on" || *value == "yes")
    return true;
  if (*value == "0" || *value == "false" || *value == "off" || *value == "no")
    return false;
  throw ConfigError("config key '" + std::string(key) +
                    "' is not a boolean: " + *value);
}

}  // namespace xsearch
