#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aigikit/manifest.hpp"
#include "aigikit/types.hpp"

namespace aigikit {

class DegenerateCorpus : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

inline constexpr int kResidualFeatureCount = 12;

/// Layout: [mean|dh| RGB, var|dh| RGB, mean|dv| RGB, var|dv| RGB] where dh/dv
/// are horizontal/vertical neighbor differences of the image normalized to
/// [0,1]. A 90-degree rotation swaps the first six with the last six.
using ResidualFeatures = std::array<double, kResidualFeatureCount>;

ResidualFeatures extract_residual_features(const PixelBuffer& img);

struct ExpertTrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 16;
  int epochs = 5;
  int lora_rank = 8;        // forwarded to external backends only
  double lora_alpha = 1.0;  // forwarded only
  std::uint64_t seed = 0;
};

/// Linear head over residual features: score = logistic(w . f + b).
struct ExpertModel {
  std::array<double, kResidualFeatureCount> weights{};
  double bias = 0.0;
  double threshold = 0.5;
  ExpertTrainConfig training_config;

  std::vector<double> epoch_losses;  // trace; not serialized
};

double expert_score_value(const ExpertModel& model, const ResidualFeatures& features);

/// Pixel branch verdict; score >= threshold (ties included) flags Synthetic.
BranchVerdict score(const ExpertModel& model, const PixelBuffer& img);

struct LabeledFeatures {
  ResidualFeatures features;
  Label label = Label::Real;
};

/// Mean logistic loss and its analytic gradient; exposed so tests can check
/// the gradient against finite differences.
double logistic_loss(std::span<const LabeledFeatures> samples,
                     const std::array<double, kResidualFeatureCount>& weights, double bias);
void logistic_gradient(std::span<const LabeledFeatures> samples,
                       const std::array<double, kResidualFeatureCount>& weights, double bias,
                       std::array<double, kResidualFeatureCount>& grad_w, double& grad_b);

/// Mini-batch gradient descent from zero init; the config seed drives the
/// per-epoch shuffle. Throws NonFiniteLoss if the loss diverges.
ExpertModel fit_expert(std::span<const LabeledFeatures> samples, const ExpertTrainConfig& config);

using ExpertImageLoader =
    std::function<PixelBuffer(const CorpusManifest&, const ImageRecord&)>;

/// Trains the reference expert on a PixelSupervision manifest (low-level
/// supervision only; labels come from the manifest, no semantic fields used).
ExpertModel train_expert(const CorpusManifest& manifest, const ExpertTrainConfig& config,
                         const ExpertImageLoader& loader = {}, int workers = 0);

/// Model file: JSON {weights[12], bias, threshold, training_config}.
void save_expert(const ExpertModel& model, const std::filesystem::path& path);
ExpertModel load_expert(const std::filesystem::path& path);

struct ExpertBackendConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8400
  int timeout_ms = 10000;
  int retries = 3;
  int backoff_ms = 200;
  double threshold = 0.5;
};

/// Adapter for a remote pixel expert speaking the POST /score contract:
/// request {"image_b64", "format":"png"}, response {"score": s in [0,1]}.
class ExternalExpertBackend {
 public:
  explicit ExternalExpertBackend(ExpertBackendConfig config);

  /// GET /health returns 200.
  bool healthy() const;

  /// Throws BackendUnavailable after the configured retries, or
  /// MalformedResponse for non-200 / missing / out-of-range scores.
  BranchVerdict score(const PixelBuffer& img) const;

  const ExpertBackendConfig& config() const { return config_; }

 private:
  ExpertBackendConfig config_;
};

}  // namespace aigikit
