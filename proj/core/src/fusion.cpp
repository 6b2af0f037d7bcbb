#include "aigikit/fusion.hpp"

namespace aigikit {

FusedVerdict fuse(const BranchVerdict& semantic, std::span<const BranchVerdict> pixels) {
  if (semantic.branch != BranchKind::Semantic) {
    throw RoleMismatch("first verdict must come from the semantic branch");
  }
  if (pixels.empty()) {
    throw RoleMismatch("fusion needs at least one pixel-expert verdict");
  }
  for (const auto& p : pixels) {
    if (p.branch != BranchKind::PixelExpert) {
      throw RoleMismatch("pixel verdicts must come from the pixel-expert branch");
    }
  }

  FusedVerdict fused;
  fused.semantic = semantic;
  fused.pixels.assign(pixels.begin(), pixels.end());

  // Synthetic if either branch flags it; Real requires unanimity.
  bool flagged = semantic.decision == Label::Synthetic;
  for (const auto& p : pixels) flagged = flagged || p.decision == Label::Synthetic;
  fused.final = flagged ? Label::Synthetic : Label::Real;
  return fused;
}

FusedVerdict fuse(const BranchVerdict& semantic, const BranchVerdict& pixel) {
  return fuse(semantic, std::span<const BranchVerdict>(&pixel, 1));
}

PixelScorer expert_scorer(ExpertModel model) {
  return [model = std::move(model)](const PixelBuffer& img) { return score(model, img); };
}

PixelScorer backend_scorer(std::shared_ptr<ExternalExpertBackend> backend) {
  return [backend = std::move(backend)](const PixelBuffer& img) { return backend->score(img); };
}

FusedVerdict detect(const ImageRef& image, const SemanticBackend* semantic_backend,
                    std::span<const PixelScorer> pixel_branches, const std::string& prompt,
                    const FusionPolicy& policy) {
  if (!image.pixels) throw DetectionError("detect needs decoded pixels");
  if (semantic_backend == nullptr && pixel_branches.empty()) {
    throw DetectionError("no branches available");
  }

  std::optional<BranchVerdict> semantic;
  std::string semantic_failure;
  if (semantic_backend) {
    try {
      semantic = semantic_verdict(*semantic_backend, image, prompt, policy.unknown);
    } catch (const std::exception& e) {
      semantic_failure = e.what();
    }
  }

  std::vector<BranchVerdict> pixels;
  std::string pixel_failure;
  for (const auto& scorer : pixel_branches) {
    try {
      pixels.push_back(scorer(*image.pixels));
    } catch (const std::exception& e) {
      pixel_failure = e.what();
    }
  }
  const bool pixels_complete = pixels.size() == pixel_branches.size();

  if (!policy.degraded_ok) {
    if (semantic_backend && !semantic) {
      throw DetectionError("semantic branch failed (" + semantic_failure +
                           ") and degraded mode is off");
    }
    if (semantic_backend == nullptr) {
      throw DetectionError("semantic branch not configured and degraded mode is off");
    }
    if (pixel_branches.empty()) {
      throw DetectionError("no pixel expert configured and degraded mode is off");
    }
    if (!pixels_complete) {
      throw DetectionError("pixel branch failed (" + pixel_failure +
                           ") and degraded mode is off");
    }
    return fuse(*semantic, pixels);
  }

  if (semantic && !pixels.empty()) {
    FusedVerdict fused = fuse(*semantic, pixels);
    if (!pixels_complete) {
      fused.audit = "degraded: a pixel expert failed (" + pixel_failure + ")";
    }
    return fused;
  }

  // Single-branch degraded operation, recorded in the audit trail.
  if (semantic) {
    FusedVerdict fused;
    fused.semantic = *semantic;
    BranchVerdict placeholder;
    placeholder.branch = BranchKind::PixelExpert;
    placeholder.score = 0.0;
    placeholder.decision = Label::Real;  // OR-neutral
    placeholder.rationale = pixel_branches.empty() ? "pixel branch not configured"
                                                   : "pixel branch failed: " + pixel_failure;
    fused.pixels.push_back(std::move(placeholder));
    fused.final = semantic->decision;
    fused.audit = "degraded: pixel branch unavailable; semantic decision used";
    return fused;
  }

  if (pixels.empty()) {
    throw DetectionError("both branches unavailable: semantic (" + semantic_failure +
                         "), pixel (" + pixel_failure + ")");
  }
  BranchVerdict placeholder;
  placeholder.branch = BranchKind::Semantic;
  placeholder.score = 0.0;
  placeholder.decision = Label::Real;  // OR-neutral
  placeholder.rationale = semantic_backend ? "semantic branch failed: " + semantic_failure
                                           : std::string("semantic branch not configured");
  FusedVerdict fused = fuse(placeholder, pixels);
  fused.audit = "degraded: semantic branch unavailable; pixel decision used";
  return fused;
}

FusedVerdict detect(const ImageRef& image, const SemanticBackend* semantic_backend,
                    std::span<const ExpertModel> experts, const std::string& prompt,
                    const FusionPolicy& policy) {
  std::vector<PixelScorer> scorers;
  scorers.reserve(experts.size());
  for (const auto& model : experts) scorers.push_back(expert_scorer(model));
  return detect(image, semantic_backend, std::span<const PixelScorer>(scorers), prompt, policy);
}

}  // namespace aigikit
