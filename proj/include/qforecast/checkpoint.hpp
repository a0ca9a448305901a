#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "qforecast/nn.hpp"

namespace qforecast::checkpoint {

// Binary checkpoint, format version 1 (see docs/formats.md):
//   magic  "QFCKPT01"                     8 bytes
//   u32    block count                    little-endian
//   per block:
//     u32  name length, name bytes (UTF-8, no terminator)
//     u32  rows, u32 cols
//     f64  rows*cols values, column-major, little-endian
void save(const nn::ParameterBundle& params, const std::filesystem::path& path);

// Loads into an existing bundle; block names and shapes must match exactly.
void load(nn::ParameterBundle& params, const std::filesystem::path& path);

// Reads a checkpoint into named matrices without a target model.
std::map<std::string, nn::MatrixXd> load_raw(const std::filesystem::path& path);

} // namespace qforecast::checkpoint
