#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "aigikit/types.hpp"

namespace aigikit {

class DegenerateOutput : public Error {
 public:
  using Error::Error;
};

class EmptyPool : public Error {
 public:
  using Error::Error;
};

class ProfileError : public Error {
 public:
  using Error::Error;
};

enum class ResizeKernel { Nearest, Bilinear, Bicubic };

std::string_view to_string(ResizeKernel k);
ResizeKernel kernel_from_string(std::string_view s);

/// One seeded, replayable post-processing operator.
struct DegradationOp {
  struct Jpeg {
    int quality;
  };
  struct DoubleJpeg {
    int quality;
  };
  struct Resize {
    double scale;
    ResizeKernel kernel;
  };
  struct DoubleResize {
    double scale;  // down-then-up, so strictly <= 1
    ResizeKernel kernel;
  };
  struct GaussianBlur {
    double sigma;
  };
  struct GaussianNoise {
    double sigma;
    std::uint64_t seed;
  };

  using Variant =
      std::variant<Jpeg, DoubleJpeg, Resize, DoubleResize, GaussianBlur, GaussianNoise>;

  Variant op;

  std::string_view kind() const;
  void validate() const;  // throws Error on out-of-range parameters
};

bool operator==(const DegradationOp& a, const DegradationOp& b);

/// Ordered, seeded op list. Replaying the same spec on the same buffer is
/// bit-identical.
struct DegradationSpec {
  std::uint64_t seed = 0;
  std::vector<DegradationOp> ops;  // length 0..8

  void validate() const;
};

bool operator==(const DegradationSpec& a, const DegradationSpec& b);

/// Canonical JSON for a spec; byte-identical specs compare equal on this.
std::string spec_to_json(const DegradationSpec& spec);
DegradationSpec spec_from_json(const std::string& json_text);

// ---- individual operators -------------------------------------------------

PixelBuffer jpeg_compress(const PixelBuffer& img, int quality);
PixelBuffer double_jpeg(const PixelBuffer& img, int quality);

/// Output dims = round(input dims * scale); scale 1.0 short-circuits to a
/// bit-identical copy.
PixelBuffer resize(const PixelBuffer& img, double scale, ResizeKernel kernel);
PixelBuffer resize_to(const PixelBuffer& img, int out_w, int out_h, ResizeKernel kernel);

/// Downsample by `scale`, then upsample back to the exact original dims.
PixelBuffer double_resize(const PixelBuffer& img, double scale, ResizeKernel kernel);

/// Truncated kernel of radius ceil(3*sigma), symmetric-reflected borders.
PixelBuffer gaussian_blur(const PixelBuffer& img, double sigma);

/// Adds i.i.d. Gaussian samples drawn from `seed`, clamped to [0,255].
PixelBuffer gaussian_noise(const PixelBuffer& img, double sigma, std::uint64_t seed);

PixelBuffer apply_op(const DegradationOp& op, const PixelBuffer& img);
PixelBuffer apply_spec(const DegradationSpec& spec, const PixelBuffer& img);

// ---- randomized pipelines ---------------------------------------------------

/// Pool entry for the pipeline sampler: an op family plus its parameter range.
struct OpPoolEntry {
  std::string kind;  // "jpeg" | "double_jpeg" | "resize" | "double_resize" |
                     // "gaussian_blur" | "gaussian_noise"
  double lo = 0.0;   // quality / scale / sigma lower bound
  double hi = 0.0;   // upper bound
  ResizeKernel kernel = ResizeKernel::Bilinear;  // resize families only
};

struct PipelineProfile {
  std::vector<OpPoolEntry> pool;
  int min_len = 2;
  int max_len = 4;

  void validate() const;  // EmptyPool / ProfileError
};

/// Heavy default: jpeg q30-75, double jpeg q30-75, double resize 0.3-0.7
/// bilinear, blur sigma 0.8-2.0, noise sigma 2-8; 2 to 4 ops per spec.
PipelineProfile default_heavy_profile();

/// Deterministic function of (seed, profile): length uniform in the profile
/// range, ops drawn without replacement, parameters uniform in their ranges.
DegradationSpec sample_heavy_pipeline(std::uint64_t seed, const PipelineProfile& profile);

}  // namespace aigikit
