#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aigikit/expert.hpp"  // BackendUnavailable / MalformedResponse
#include "aigikit/types.hpp"

namespace aigikit {

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

class UnknownVerdictError : public Error {
 public:
  using Error::Error;
};

/// One preference comparison under the policy and reference models. Log-probs
/// may be unnormalized scores in tests.
struct DpoBatchItem {
  double logp_chosen = 0.0;
  double logp_rejected = 0.0;
  double ref_logp_chosen = 0.0;
  double ref_logp_rejected = 0.0;
};

struct DpoItemGrad {
  double d_logp_chosen = 0.0;
  double d_logp_rejected = 0.0;
  double d_ref_logp_chosen = 0.0;
  double d_ref_logp_rejected = 0.0;
};

struct DpoLossResult {
  double loss = 0.0;
  std::vector<DpoItemGrad> grads;
};

/// Mean over the batch of -log sigmoid(beta * ((logp_c - ref_c) - (logp_r -
/// ref_r))), with analytic gradients for all four fields per item.
DpoLossResult dpo_loss(std::span<const DpoBatchItem> batch, double beta);

enum class Verdict { Real, Synthetic, Unknown };

std::string_view to_string(Verdict v);

/// Total and deterministic. Full verdict prefixes win by first position
/// (case-insensitive, trailing period optional); otherwise the first
/// sentence's "ai-generated"/"authentic" verdict word decides; otherwise
/// Unknown.
Verdict parse_verdict(std::string_view text);

/// Image handed to a semantic backend: id for fixture lookup plus decoded
/// pixels for wire transport. `pixels` may be null for id-only stubs.
struct ImageRef {
  std::string id;
  const PixelBuffer* pixels = nullptr;
};

class SemanticBackend {
 public:
  virtual ~SemanticBackend() = default;
  virtual std::string verdict_text(const ImageRef& image, const std::string& prompt) const = 0;
  virtual std::string name() const = 0;
};

enum class UnknownPolicy { Real, Synthetic, Error };

std::string_view to_string(UnknownPolicy p);
UnknownPolicy unknown_policy_from_string(std::string_view s);

/// Calls the backend and parses its text. Score 1.0/0.0/0.5 for
/// Synthetic/Real/Unknown; Unknown resolves per policy (default Real, the
/// branch abstains). rationale carries the full backend text.
BranchVerdict semantic_verdict(const SemanticBackend& backend, const ImageRef& image,
                               const std::string& prompt,
                               UnknownPolicy policy = UnknownPolicy::Real);

/// Deterministic test double: pure lookup keyed by image id.
class StubBackend : public SemanticBackend {
 public:
  StubBackend(std::map<std::string, std::string> table, std::string default_text);

  std::string verdict_text(const ImageRef& image, const std::string& prompt) const override;
  std::string name() const override { return "stub"; }

 private:
  std::map<std::string, std::string> table_;
  std::string default_text_;
};

/// Fixture file: JSONL of {"image_id", "text"}.
std::map<std::string, std::string> load_stub_fixture(const std::filesystem::path& path);

struct VlmBackendConfig {
  std::string endpoint;
  std::string model_name;
  int timeout_ms = 30000;
  int retries = 3;
  int backoff_ms = 200;  // exponential backoff base
};

/// POST /verdict with {"image_b64", "prompt", "model"}; response {"text"}.
class HttpVlmBackend : public SemanticBackend {
 public:
  explicit HttpVlmBackend(VlmBackendConfig config);

  std::string verdict_text(const ImageRef& image, const std::string& prompt) const override;
  std::string name() const override;

  const VlmBackendConfig& config() const { return config_; }

 private:
  VlmBackendConfig config_;
};

}  // namespace aigikit
