#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aigikit/types.hpp"

namespace aigikit {

class DecodeError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

/// Decode PNG or JPEG bytes (sniffed by magic) into canonical 8-bit RGB.
PixelBuffer decode_image(std::span<const std::uint8_t> bytes);

/// Load and canonically decode a file. Enforces the 8px minimum-side floor
/// imposed on images entering the pipeline.
PixelBuffer load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const PixelBuffer& img);
PixelBuffer decode_png(std::span<const std::uint8_t> bytes);
void save_png(const PixelBuffer& img, const std::filesystem::path& path);

/// Baseline sequential JPEG, Annex-K quantization tables scaled by quality,
/// 4:2:0 chroma subsampling below quality 95 and 4:4:4 from 95 up.
std::vector<std::uint8_t> encode_jpeg(const PixelBuffer& img, int quality);
PixelBuffer decode_jpeg(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace aigikit
