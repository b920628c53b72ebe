#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "skintex/image.hpp"

namespace skintex::ppm {

/// Decodes a P3 (ASCII) or P6 (binary) PPM with maxval 255. `#` comments are
/// accepted anywhere whitespace is allowed in the header. Throws PpmParseError.
RgbImage decode(std::span<const std::uint8_t> bytes);

/// Always emits P6: "P6\n<w> <h>\n255\n" followed by the raw RGB payload.
std::vector<std::uint8_t> encode(const RgbImage& img);

/// File helpers. Throw Error when the file cannot be opened or written.
RgbImage read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const RgbImage& img);

}  // namespace skintex::ppm
