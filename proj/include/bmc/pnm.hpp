#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bmc/image.hpp"

namespace bmc {

/// Binary PPM (P6) / PGM (P5) codecs, maxval 255. Writers emit
/// "P6\n<w> <h>\n255\n" followed by the raw payload; readers accept any
/// whitespace run (and '#' comments) between header tokens and exactly one
/// whitespace byte before the payload. Parse failures raise FormatError
/// carrying the offending byte offset.
using Bytes = std::vector<std::uint8_t>;

RgbImage read_ppm(std::span<const std::uint8_t> bytes);
Bytes write_ppm(const RgbImage& img);

GrayImage read_pgm(std::span<const std::uint8_t> bytes);
Bytes write_pgm(const GrayImage& img);

Mask read_mask_pgm(std::span<const std::uint8_t> bytes);
Bytes write_mask_pgm(const Mask& m);

Bytes read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& p, const std::string& text);

RgbImage load_ppm(const std::filesystem::path& p);
GrayImage load_pgm(const std::filesystem::path& p);
Mask load_mask(const std::filesystem::path& p);
void save_ppm(const std::filesystem::path& p, const RgbImage& img);
void save_pgm(const std::filesystem::path& p, const GrayImage& img);
void save_mask(const std::filesystem::path& p, const Mask& m);

}  // namespace bmc
