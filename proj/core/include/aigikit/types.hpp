#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aigikit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Label { Real, Synthetic };

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);

enum class Subset { PixelSet, SemanticSet, Unassigned };

std::string_view to_string(Subset subset);
Subset subset_from_string(std::string_view s);

/// Canonical decoded image: 8-bit RGB, row-major. Grayscale sources are
/// replicated across channels and alpha is dropped at decode time.
struct PixelBuffer {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  PixelBuffer() = default;
  PixelBuffer(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  std::size_t sample_count() const { return data.size(); }
  bool same_dims(const PixelBuffer& other) const {
    return width == other.width && height == other.height;
  }
};

/// FNV-1a hash of dimensions plus raw samples; the determinism probe used
/// throughout the tests.
std::uint64_t pixel_hash(const PixelBuffer& img);

double mean_abs_diff(const PixelBuffer& a, const PixelBuffer& b);
int max_abs_diff(const PixelBuffer& a, const PixelBuffer& b);

/// Mean squared neighbor difference (horizontal + vertical, all channels) on
/// samples normalized to [0,1]. Proxy for high-frequency residual energy.
double neighbor_residual_energy(const PixelBuffer& img);

enum class BranchKind { Semantic, PixelExpert };

std::string_view to_string(BranchKind branch);

/// Per-branch outcome. `score` is the probability the image is synthetic;
/// `decision` is Synthetic iff score >= the branch's threshold (ties flag).
struct BranchVerdict {
  BranchKind branch = BranchKind::PixelExpert;
  double score = 0.0;
  Label decision = Label::Real;
  std::optional<std::string> rationale;
};

BranchVerdict make_branch_verdict(BranchKind branch, double score, double threshold,
                                  std::optional<std::string> rationale = std::nullopt);

}  // namespace aigikit
