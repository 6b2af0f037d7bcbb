#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aigikit/degrade.hpp"
#include "aigikit/expert.hpp"
#include "aigikit/semantic.hpp"

namespace aigikit {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Resolved run configuration. A run is reproducible from (config, inputs)
/// alone; the canonical JSON of this struct is hashed into every output.
struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency

  struct Paths {
    std::string reals_dir;
    std::string fakes_dir;
    std::string captions;
    std::string aigi_dir;  // <aigi_dir>/<generator>/{faithful,surreal}/
    std::string out_dir = "out";
  } paths;

  std::map<std::string, PipelineProfile> profiles;  // seeded with "heavy"

  struct PixelSet {
    std::string name = "pixel";
    int target_reals = 11800;  // full-scale default corpus size
    double recon_strength = 1.0;
  } pixel_set;

  struct SemanticSet {
    std::string name = "semantic";
    int real_count = 5000;  // full-scale defaults
    int fake_count = 5000;
    std::string profile = "heavy";
  } semantic_set;

  struct AigiNow {
    std::string name = "aigi-now";
    int per_generator = 1000;
    std::string profile = "heavy";
  } aigi_now;

  struct Expert {
    ExpertTrainConfig train;  // seed 0 resolves to the global seed
    double threshold = 0.5;
    std::string model_path;  // empty = zero model for detect/eval
  } expert;

  struct Dpo {
    double beta = 0.05;
    std::string prompt = std::string("Is this image AI-generated or authentic? Answer and explain.");
    int lora_rank = 16;
    double lora_alpha = 32.0;
    double learning_rate = 1e-6;
    int batch_size = 8;
    int epochs = 1;
  } dpo;

  struct SemanticBackendConfig {
    std::string type = "stub";  // "stub" | "http"
    std::string fixture;        // stub fixture JSONL
    std::string default_text;
    std::string endpoint;
    std::string model = "qwen2.5-vl-7b";
    int timeout_ms = 30000;
    int retries = 3;
  } semantic_backend;

  struct ExpertBackendConfig_ {
    std::string type = "local";  // "local" | "http"
    std::string endpoint;
    int timeout_ms = 10000;
    int retries = 3;
  } expert_backend;

  struct Fusion {
    UnknownPolicy unknown_policy = UnknownPolicy::Real;
    bool degraded_ok = false;
  } fusion;

  struct Eval {
    std::string group_by = "generator";
    long failure_budget = 0;
    std::map<std::string, std::vector<double>> grids;  // op family -> parameters
  } eval;

  struct Probe {
    std::string pixel_set;     // manifest paths
    std::string semantic_set;  // mixed is assembled by concatenation
    std::string semantic_val;
    std::string semantic_test;
    std::string pixel_val;
    std::string pixel_test;
    std::string fixture;  // stub fixture for the semantic model row
  } probe;

  /// Expert seed with the 0-means-global rule applied.
  std::uint64_t expert_seed() const { return expert.train.seed ? expert.train.seed : seed; }
};

RunConfig default_run_config();

/// Defaults overlaid with the config file (missing keys keep defaults).
RunConfig load_run_config(const std::filesystem::path& path);

/// AIGIKIT_SEED, AIGIKIT_WORKERS, AIGIKIT_OUT, AIGIKIT_BACKEND_URL,
/// AIGIKIT_DEGRADED_OK.
void apply_env_overrides(RunConfig& config);

/// Canonical JSON (sorted keys, full field set). Equal configs produce equal
/// bytes; this string is what gets hashed and embedded in outputs.
std::string resolved_config_json(const RunConfig& config);

/// hex16 FNV-1a of the canonical JSON.
std::string config_hash(const RunConfig& config);

}  // namespace aigikit
