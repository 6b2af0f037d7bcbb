#include "aigikit/expert.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "aigikit/image_io.hpp"
#include "aigikit/parallel.hpp"
#include "aigikit/rng.hpp"
#include "b64.hpp"

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Numerically stable -log sigmoid(z) = softplus(-z).
double softplus_neg(double z) {
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace

ResidualFeatures extract_residual_features(const PixelBuffer& img) {
  ResidualFeatures f{};
  const double inv = 1.0 / 255.0;

  for (int c = 0; c < 3; ++c) {
    // Horizontal |differences|.
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x + 1 < img.width; ++x) {
        const double d =
            std::abs(static_cast<int>(img.at(x + 1, y, c)) - img.at(x, y, c)) * inv;
        sum += d;
        sum_sq += d * d;
        ++n;
      }
    }
    const double mean_h = n ? sum / static_cast<double>(n) : 0.0;
    const double var_h = n ? std::max(0.0, sum_sq / static_cast<double>(n) - mean_h * mean_h) : 0.0;

    // Vertical |differences|.
    sum = 0.0;
    sum_sq = 0.0;
    n = 0;
    for (int y = 0; y + 1 < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double d =
            std::abs(static_cast<int>(img.at(x, y + 1, c)) - img.at(x, y, c)) * inv;
        sum += d;
        sum_sq += d * d;
        ++n;
      }
    }
    const double mean_v = n ? sum / static_cast<double>(n) : 0.0;
    const double var_v = n ? std::max(0.0, sum_sq / static_cast<double>(n) - mean_v * mean_v) : 0.0;

    f[static_cast<std::size_t>(c)] = mean_h;
    f[static_cast<std::size_t>(3 + c)] = var_h;
    f[static_cast<std::size_t>(6 + c)] = mean_v;
    f[static_cast<std::size_t>(9 + c)] = var_v;
  }
  return f;
}

double expert_score_value(const ExpertModel& model, const ResidualFeatures& features) {
  double z = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i) z += model.weights[i] * features[i];
  return logistic(z);
}

BranchVerdict score(const ExpertModel& model, const PixelBuffer& img) {
  const double s = expert_score_value(model, extract_residual_features(img));
  // score >= threshold flags Synthetic; ties flag.
  return make_branch_verdict(BranchKind::PixelExpert, s, model.threshold);
}

double logistic_loss(std::span<const LabeledFeatures> samples,
                     const std::array<double, kResidualFeatureCount>& weights, double bias) {
  if (samples.empty()) throw Error("logistic_loss on empty sample set");
  double total = 0.0;
  for (const auto& s : samples) {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * s.features[i];
    const double y = s.label == Label::Synthetic ? 1.0 : 0.0;
    // -y log p - (1-y) log (1-p), stable form.
    total += y > 0.5 ? softplus_neg(z) : softplus_neg(-z);
  }
  return total / static_cast<double>(samples.size());
}

void logistic_gradient(std::span<const LabeledFeatures> samples,
                       const std::array<double, kResidualFeatureCount>& weights, double bias,
                       std::array<double, kResidualFeatureCount>& grad_w, double& grad_b) {
  grad_w.fill(0.0);
  grad_b = 0.0;
  for (const auto& s : samples) {
    double z = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * s.features[i];
    const double y = s.label == Label::Synthetic ? 1.0 : 0.0;
    const double err = logistic(z) - y;
    for (std::size_t i = 0; i < weights.size(); ++i) grad_w[i] += err * s.features[i];
    grad_b += err;
  }
  const double n = static_cast<double>(samples.size());
  for (double& g : grad_w) g /= n;
  grad_b /= n;
}

ExpertModel fit_expert(std::span<const LabeledFeatures> samples, const ExpertTrainConfig& config) {
  if (config.learning_rate <= 0) throw Error("learning_rate must be > 0");
  if (config.batch_size < 1) throw Error("batch_size must be >= 1");

  long n_real = 0, n_fake = 0;
  for (const auto& s : samples) (s.label == Label::Real ? n_real : n_fake)++;
  if (n_real == 0 || n_fake == 0) {
    throw DegenerateCorpus("training set needs both labels (got " + std::to_string(n_real) +
                           " real, " + std::to_string(n_fake) + " synthetic)");
  }

  ExpertModel model;
  model.training_config = config;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(config.seed);

  std::vector<LabeledFeatures> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Full Fisher-Yates shuffle per epoch from the config seed.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(samples[order[k]]);

      std::array<double, kResidualFeatureCount> grad_w;
      double grad_b;
      logistic_gradient(batch, model.weights, model.bias, grad_w, grad_b);
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        model.weights[i] -= config.learning_rate * grad_w[i];
      }
      model.bias -= config.learning_rate * grad_b;
    }

    const double epoch_loss = logistic_loss(samples, model.weights, model.bias);
    if (!std::isfinite(epoch_loss)) {
      throw NonFiniteLoss("training diverged at epoch " + std::to_string(epoch) +
                          " (loss not finite); lower the learning rate");
    }
    model.epoch_losses.push_back(epoch_loss);
  }
  return model;
}

ExpertModel train_expert(const CorpusManifest& manifest, const ExpertTrainConfig& config,
                         const ExpertImageLoader& loader, int workers) {
  if (manifest.kind != ManifestKind::PixelSupervision) {
    throw Error("expert training expects a pixel_supervision manifest");
  }
  long n_real = 0, n_fake = 0;
  for (const auto& r : manifest.records) (r.label == Label::Real ? n_real : n_fake)++;
  if (n_real < 2 || n_fake < 2) {
    throw DegenerateCorpus("expert training needs at least 2 records of each label");
  }

  // Deterministic sample order regardless of manifest record order.
  std::vector<const ImageRecord*> sorted;
  for (const auto& r : manifest.records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  std::vector<LabeledFeatures> samples(sorted.size());
  parallel_for(sorted.size(), workers, [&](std::size_t i) {
    const ImageRecord& r = *sorted[i];
    const PixelBuffer img =
        loader ? loader(manifest, r) : load_image(resolve_source_path(manifest, r));
    samples[i] = LabeledFeatures{extract_residual_features(img), r.label};
  });

  return fit_expert(samples, config);
}

void save_expert(const ExpertModel& model, const std::filesystem::path& path) {
  ordered_json j;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["threshold"] = model.threshold;
  j["training_config"] = {{"learning_rate", model.training_config.learning_rate},
                          {"batch_size", model.training_config.batch_size},
                          {"epochs", model.training_config.epochs},
                          {"lora_rank", model.training_config.lora_rank},
                          {"lora_alpha", model.training_config.lora_alpha},
                          {"seed", model.training_config.seed}};
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open model file for writing: " + path.string());
  const std::string bytes = j.dump(2) + "\n";
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("model file write failed: " + path.string());
}

ExpertModel load_expert(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open model file: " + path.string());
  ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("model file parse error: " + std::string(e.what()));
  }
  ExpertModel model;
  const auto w = j.at("weights");
  if (w.size() != kResidualFeatureCount) {
    throw Error("model file has wrong weight count");
  }
  for (std::size_t i = 0; i < kResidualFeatureCount; ++i) model.weights[i] = w[i].get<double>();
  model.bias = j.at("bias").get<double>();
  model.threshold = j.at("threshold").get<double>();
  const auto& tc = j.at("training_config");
  model.training_config.learning_rate = tc.at("learning_rate").get<double>();
  model.training_config.batch_size = tc.at("batch_size").get<int>();
  model.training_config.epochs = tc.at("epochs").get<int>();
  model.training_config.lora_rank = tc.at("lora_rank").get<int>();
  model.training_config.lora_alpha = tc.at("lora_alpha").get<double>();
  model.training_config.seed = tc.at("seed").get<std::uint64_t>();
  return model;
}

ExternalExpertBackend::ExternalExpertBackend(ExpertBackendConfig config)
    : config_(std::move(config)) {}

bool ExternalExpertBackend::healthy() const {
  httplib::Client client(config_.endpoint);
  client.set_connection_timeout(0, config_.timeout_ms * 1000);
  client.set_read_timeout(0, config_.timeout_ms * 1000);
  const auto res = client.Get("/health");
  return res && res->status == 200;
}

BranchVerdict ExternalExpertBackend::score(const PixelBuffer& img) const {
  ordered_json body;
  body["image_b64"] = detail::base64_encode(encode_png(img));
  body["format"] = "png";
  const std::string payload = body.dump();

  std::string last_error;
  const int attempts = std::max(1, config_.retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    const auto res = client.Post("/score", payload, "application/json");
    if (!res) {
      last_error = "no response from " + config_.endpoint;
      continue;
    }
    if (res->status != 200) {
      throw MalformedResponse("expert backend returned HTTP " + std::to_string(res->status));
    }
    double s;
    try {
      const auto j = ordered_json::parse(res->body);
      s = j.at("score").get<double>();
    } catch (const std::exception& e) {
      throw MalformedResponse(std::string("expert backend response: ") + e.what());
    }
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw MalformedResponse("expert backend score out of range [0,1]");
    }
    return make_branch_verdict(BranchKind::PixelExpert, s, config_.threshold);
  }
  throw BackendUnavailable("expert backend unreachable after " + std::to_string(attempts) +
                           " attempts: " + last_error);
}

}  // namespace aigikit
