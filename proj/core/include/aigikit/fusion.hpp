#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aigikit/expert.hpp"
#include "aigikit/semantic.hpp"
#include "aigikit/types.hpp"

namespace aigikit {

class RoleMismatch : public Error {
 public:
  using Error::Error;
};

class DetectionError : public Error {
 public:
  using Error::Error;
};

/// OR-fused decision: final is Real only if the semantic branch and every
/// pixel expert say Real. Both inputs are preserved for audit.
struct FusedVerdict {
  Label final = Label::Real;
  BranchVerdict semantic;
  std::vector<BranchVerdict> pixels;  // one entry per expert, at least one
  std::optional<std::string> audit;   // degraded-mode notes

  const BranchVerdict& pixel() const { return pixels.front(); }
};

FusedVerdict fuse(const BranchVerdict& semantic, const BranchVerdict& pixel);

/// Same OR rule over any number of pixel experts.
FusedVerdict fuse(const BranchVerdict& semantic, std::span<const BranchVerdict> pixels);

struct FusionPolicy {
  UnknownPolicy unknown = UnknownPolicy::Real;
  bool degraded_ok = false;  // permit single-branch operation
};

/// A pixel branch: local reference expert or remote scoring backend.
using PixelScorer = std::function<BranchVerdict(const PixelBuffer&)>;

PixelScorer expert_scorer(ExpertModel model);
PixelScorer backend_scorer(std::shared_ptr<ExternalExpertBackend> backend);

/// Runs both branches and fuses. When a branch fails and degraded mode is
/// on, the remaining branch decides and the audit trail records it; with
/// degraded mode off (or any branch down) the error propagates.
FusedVerdict detect(const ImageRef& image, const SemanticBackend* semantic_backend,
                    std::span<const PixelScorer> pixel_branches, const std::string& prompt,
                    const FusionPolicy& policy = {});

FusedVerdict detect(const ImageRef& image, const SemanticBackend* semantic_backend,
                    std::span<const ExpertModel> experts, const std::string& prompt,
                    const FusionPolicy& policy = {});

}  // namespace aigikit
