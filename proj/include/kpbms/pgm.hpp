#pragma once

#include <filesystem>

#include "kpbms/image.hpp"

namespace kpbms {

/// Reads an 8- or 16-bit grayscale PGM (binary P5 or ASCII P2);
/// intensities are normalized to [0,1] by the container's maxval.
/// Throws std::runtime_error on malformed input.
GrayImage read_pgm(const std::filesystem::path& path);

/// Reads (width, height) and verifies the raster is fully present,
/// without decoding pixels; used for cheap index validation.
std::pair<int, int> read_pgm_dims(const std::filesystem::path& path);

/// Writes a binary P5 PGM, quantizing [0,1] to the requested depth
/// (8 or 16 bits).
void write_pgm(const GrayImage& image, const std::filesystem::path& path,
               int bit_depth = 8);

}  // namespace kpbms
