#include "aigikit/types.hpp"

#include <cmath>
#include <cstdlib>

#include "aigikit/rng.hpp"

namespace aigikit {

PixelBuffer::PixelBuffer(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h * kChannels, fill) {
  if (w < 1 || h < 1) {
    throw Error("PixelBuffer dimensions must be positive");
  }
}

std::string_view to_string(Label label) {
  return label == Label::Real ? "real" : "synthetic";
}

Label label_from_string(std::string_view s) {
  if (s == "real") return Label::Real;
  if (s == "synthetic") return Label::Synthetic;
  throw Error("unknown label: " + std::string(s));
}

std::string_view to_string(Subset subset) {
  switch (subset) {
    case Subset::PixelSet: return "pixel";
    case Subset::SemanticSet: return "semantic";
    case Subset::Unassigned: return "unassigned";
  }
  return "unassigned";
}

Subset subset_from_string(std::string_view s) {
  if (s == "pixel") return Subset::PixelSet;
  if (s == "semantic") return Subset::SemanticSet;
  if (s == "unassigned") return Subset::Unassigned;
  throw Error("unknown subset: " + std::string(s));
}

std::string_view to_string(BranchKind branch) {
  return branch == BranchKind::Semantic ? "semantic" : "pixel_expert";
}

std::uint64_t pixel_hash(const PixelBuffer& img) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  feed(static_cast<std::uint64_t>(img.width));
  feed(static_cast<std::uint64_t>(img.height));
  for (std::uint8_t b : img.data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

double mean_abs_diff(const PixelBuffer& a, const PixelBuffer& b) {
  if (!a.same_dims(b)) {
    throw Error("mean_abs_diff: dimension mismatch");
  }
  if (a.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(static_cast<int>(a.data[i]) - static_cast<int>(b.data[i]));
  }
  return sum / static_cast<double>(a.data.size());
}

int max_abs_diff(const PixelBuffer& a, const PixelBuffer& b) {
  if (!a.same_dims(b)) {
    throw Error("max_abs_diff: dimension mismatch");
  }
  int worst = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<int>(a.data[i]) - static_cast<int>(b.data[i])));
  }
  return worst;
}

double neighbor_residual_energy(const PixelBuffer& img) {
  const double inv = 1.0 / 255.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x + 1 < img.width; ++x) {
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        const double d = (static_cast<int>(img.at(x + 1, y, c)) - img.at(x, y, c)) * inv;
        sum += d * d;
        ++count;
      }
    }
  }
  for (int y = 0; y + 1 < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < PixelBuffer::kChannels; ++c) {
        const double d = (static_cast<int>(img.at(x, y + 1, c)) - img.at(x, y, c)) * inv;
        sum += d * d;
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

BranchVerdict make_branch_verdict(BranchKind branch, double score, double threshold,
                                  std::optional<std::string> rationale) {
  BranchVerdict v;
  v.branch = branch;
  v.score = score;
  v.decision = score >= threshold ? Label::Synthetic : Label::Real;
  v.rationale = std::move(rationale);
  return v;
}

}  // namespace aigikit
