#pragma once
// Sectioned key-value text shared by configs and model files:
//   # comment
//   key = value          (before any header: the unnamed top section)
//   [section]
//   key = value
//   1 2 3.5e-01 -2e-02   (data row: whitespace-separated fields)

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dpdlab {

struct TextEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct TextRow {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

struct TextSection {
  std::string name;  // empty for the top section
  std::size_t line = 0;
  std::vector<TextEntry> entries;
  std::vector<TextRow> rows;

  const TextEntry* find(std::string_view key) const noexcept;
};

struct TextDocument {
  std::vector<TextSection> sections;  // sections[0] is the top section

  const TextSection* find(std::string_view name) const noexcept;
  std::string to_string() const;
};

/// Throws FormatError("line N: ...") on malformed headers, duplicate
/// sections, duplicate keys, or empty keys.
TextDocument parse_structured(std::string_view text);

std::string trim(std::string_view s);

/// Typed value parsing; throw FormatError naming the line and key.
double parse_double(const TextEntry& e);
long long parse_int(const TextEntry& e);
std::size_t parse_size(const TextEntry& e);
bool parse_bool(const TextEntry& e);
std::vector<std::string> parse_list(const TextEntry& e);

/// Shortest round-trip representation.
std::string format_double(double v);

}  // namespace dpdlab
