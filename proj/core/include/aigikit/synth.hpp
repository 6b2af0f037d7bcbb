#pragma once

#include <cstdint>

#include "aigikit/types.hpp"

namespace aigikit {

/// Deterministic sample images for demos, desk-scale corpora, and tests.
/// synth_photo renders a textured outdoor-style scene (gradients, shapes,
/// fine grain); synth_surreal renders a structurally implausible variant
/// with the same grain statistics, so only content separates the two.
PixelBuffer synth_photo(std::uint64_t seed, int width, int height);
PixelBuffer synth_surreal(std::uint64_t seed, int width, int height);

}  // namespace aigikit
