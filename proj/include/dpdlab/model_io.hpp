#pragma once
// Model files in the structured text format. The top section carries
// `kind` and `schema_version`; [spec] holds shape fields; data sections
// hold one coefficient per row.

#include <filesystem>
#include <string>
#include <string_view>

#include "dpdlab/ila.hpp"

namespace dpdlab {

inline constexpr int kModelSchemaVersion = 1;

std::string model_to_text(const DpdModel& model);
DpdModel model_from_text(std::string_view text);

void save_model(const std::filesystem::path& path, const DpdModel& model);
DpdModel load_model(const std::filesystem::path& path);

}  // namespace dpdlab
