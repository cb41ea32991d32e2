#pragma once
// DPDIQ1 binary sample files and two-column CSV import/export.
//
// DPDIQ1 layout (little-endian):
//   bytes 0..7   magic "DPDIQ1\0\0"
//   bytes 8..15  u64 sample count
//   bytes 16..23 f64 sample-rate hint
//   then count pairs of f64 (re, im)

#include <filesystem>
#include <string>

#include "dpdlab/signal.hpp"

namespace dpdlab {

void serialize_iq(const ComplexSequence& x, const std::filesystem::path& path);
ComplexSequence deserialize_iq(const std::filesystem::path& path);

/// Writes `re,im` lines (with a `re,im` header row).
void write_iq_csv(const ComplexSequence& x, const std::filesystem::path& path);
/// Reads `re,im` lines; a leading `re,im` header row is accepted.
ComplexSequence read_iq_csv(const std::filesystem::path& path);

/// Dispatches on extension: `.csv` uses CSV, everything else DPDIQ1.
ComplexSequence load_samples(const std::filesystem::path& path);
void save_samples(const ComplexSequence& x, const std::filesystem::path& path);

/// Writes `x` to DPDIQ1 from raw samples; rejects an empty span with
/// ArgumentError before touching the file system.
void serialize_iq(std::span<const cplx> samples, double sample_rate_hint, const std::filesystem::path& path);

}  // namespace dpdlab
