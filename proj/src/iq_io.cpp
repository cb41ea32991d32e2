#include "dpdlab/iq_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dpdlab/errors.hpp"

namespace dpdlab {
namespace {

constexpr std::array<char, 8> kMagic{'D', 'P', 'D', 'I', 'Q', '1', '\0', '\0'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  auto bits = std::bit_cast<std::uint64_t>(value);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

template <typename T>
T get_le(std::istream& is, const std::filesystem::path& path) {
  std::uint64_t bits = 0;
  if (!is.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
    throw FormatError("DPDIQ1: truncated file " + path.string());
  }
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<T>(bits);
}

double parse_double(std::string_view text, const std::filesystem::path& path, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(path.string() + ": line " + std::to_string(line) + ": invalid number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

void serialize_iq(std::span<const cplx> samples, double sample_rate_hint, const std::filesystem::path& path) {
  if (samples.empty()) throw ArgumentError("serialize_iq: refusing to write an empty sequence");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_le(os, static_cast<std::uint64_t>(samples.size()));
  put_le(os, sample_rate_hint);
  for (const cplx& v : samples) {
    put_le(os, v.real());
    put_le(os, v.imag());
  }
  if (!os) throw IoError("write failed for " + path.string());
}

void serialize_iq(const ComplexSequence& x, const std::filesystem::path& path) {
  serialize_iq(x.samples(), x.sample_rate_hint(), path);
}

ComplexSequence deserialize_iq(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("DPDIQ1: bad magic/version in " + path.string());
  }
  const auto count = get_le<std::uint64_t>(is, path);
  const auto rate = get_le<double>(is, path);
  if (count == 0) throw FormatError("DPDIQ1: zero sample count in " + path.string());
  // Guard against absurd counts before allocating.
  const auto header = static_cast<std::uintmax_t>(24);
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (!ec && size != header + count * 16) {
    throw FormatError("DPDIQ1: payload size does not match sample count in " + path.string());
  }
  std::vector<cplx> samples(count);
  for (cplx& v : samples) {
    const double re = get_le<double>(is, path);
    const double im = get_le<double>(is, path);
    v = {re, im};
  }
  return ComplexSequence(std::move(samples), rate);
}

void write_iq_csv(const ComplexSequence& x, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "re,im\n";
  char buf[64];
  for (const cplx& v : x.samples()) {
    auto r1 = std::to_chars(buf, buf + sizeof(buf), v.real());
    *r1.ptr++ = ',';
    auto r2 = std::to_chars(r1.ptr, buf + sizeof(buf), v.imag());
    *r2.ptr++ = '\n';
    os.write(buf, r2.ptr - buf);
  }
  if (!os) throw IoError("write failed for " + path.string());
}

ComplexSequence read_iq_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<cplx> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && (line == "re,im" || line == "re, im")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": expected two columns re,im");
    }
    const std::string_view view(line);
    samples.emplace_back(parse_double(view.substr(0, comma), path, line_no),
                         parse_double(view.substr(comma + 1), path, line_no));
  }
  if (samples.empty()) throw FormatError("CSV: no samples in " + path.string());
  return ComplexSequence(std::move(samples));
}

ComplexSequence load_samples(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_iq_csv(path);
  return deserialize_iq(path);
}

void save_samples(const ComplexSequence& x, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    write_iq_csv(x, path);
  } else {
    serialize_iq(x, path);
  }
}

}  // namespace dpdlab
