#include "dpdlab/structured_text.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dpdlab/errors.hpp"

namespace dpdlab {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void type_error(const TextEntry& e, const char* expected) {
  fail(e.line, "key '" + e.key + "' expects " + expected + ", got '" + e.value + "'");
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

const TextEntry* TextSection::find(std::string_view key) const noexcept {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

const TextSection* TextDocument::find(std::string_view name) const noexcept {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string TextDocument::to_string() const {
  std::string out;
  for (const auto& s : sections) {
    if (!s.name.empty()) {
      if (!out.empty()) out += '\n';
      out += "[" + s.name + "]\n";
    }
    for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
    for (const auto& r : s.rows) {
      for (std::size_t i = 0; i < r.fields.size(); ++i) {
        if (i) out += ' ';
        out += r.fields[i];
      }
      out += '\n';
    }
  }
  return out;
}

TextDocument parse_structured(std::string_view text) {
  TextDocument doc;
  doc.sections.push_back(TextSection{"", 0, {}, {}});
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) fail(line_no, "empty section name");
      if (doc.find(name)) fail(line_no, "duplicate section [" + name + "]");
      doc.sections.push_back(TextSection{name, line_no, {}, {}});
    } else if (const auto eq = line.find('='); eq != std::string::npos) {
      TextEntry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
      if (e.key.empty()) fail(line_no, "missing key before '='");
      if (e.key.find_first_of(" \t") != std::string::npos) fail(line_no, "malformed key '" + e.key + "'");
      auto& section = doc.sections.back();
      if (section.find(e.key)) fail(line_no, "duplicate key '" + e.key + "'");
      section.entries.push_back(std::move(e));
    } else {
      TextRow row{{}, line_no};
      std::istringstream fields(line);
      for (std::string f; fields >> f;) row.fields.push_back(f);
      doc.sections.back().rows.push_back(std::move(row));
    }
    if (nl == text.size()) break;
  }
  return doc;
}

double parse_double(const TextEntry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) type_error(e, "a finite number");
  return v;
}

long long parse_int(const TextEntry& e) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) type_error(e, "an integer");
  return v;
}

std::size_t parse_size(const TextEntry& e) {
  const long long v = parse_int(e);
  if (v < 0) type_error(e, "a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const TextEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  type_error(e, "true or false");
}

std::vector<std::string> parse_list(const TextEntry& e) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  const std::string& s = e.value;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string item = trim(std::string_view(s).substr(pos, comma - pos));
    if (item.empty()) type_error(e, "a comma-separated list without empty items");
    out.push_back(std::move(item));
    pos = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace dpdlab
