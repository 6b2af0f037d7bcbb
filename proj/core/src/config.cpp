#include "aigikit/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "aigikit/rng.hpp"

namespace aigikit {

namespace {

using json = nlohmann::json;  // sorted keys: canonical form for hashing

json profile_to_json(const PipelineProfile& p) {
  json j;
  j["min_len"] = p.min_len;
  j["max_len"] = p.max_len;
  j["pool"] = json::array();
  for (const auto& e : p.pool) {
    json entry;
    entry["kind"] = e.kind;
    entry["range"] = {e.lo, e.hi};
    if (e.kind == "resize" || e.kind == "double_resize") {
      entry["kernel"] = std::string(to_string(e.kernel));
    }
    j["pool"].push_back(std::move(entry));
  }
  return j;
}

PipelineProfile profile_from_json(const json& j) {
  PipelineProfile p;
  p.min_len = j.value("min_len", 2);
  p.max_len = j.value("max_len", 4);
  p.pool.clear();
  for (const auto& entry : j.at("pool")) {
    OpPoolEntry e;
    e.kind = entry.at("kind").get<std::string>();
    e.lo = entry.at("range").at(0).get<double>();
    e.hi = entry.at("range").at(1).get<double>();
    if (entry.contains("kernel")) {
      e.kernel = kernel_from_string(entry.at("kernel").get<std::string>());
    }
    p.pool.push_back(std::move(e));
  }
  p.validate();
  return p;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.profiles["heavy"] = default_heavy_profile();
  c.eval.grids = {
      {"jpeg", {90, 70, 50, 30}},
      {"double_jpeg", {90, 70, 50, 30}},
      {"resize", {0.8, 0.6, 0.5, 0.4}},
      {"double_resize", {0.8, 0.6, 0.5, 0.4}},
  };
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }

  RunConfig c = default_run_config();
  try {
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);

    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      c.paths.reals_dir = p.value("reals_dir", c.paths.reals_dir);
      c.paths.fakes_dir = p.value("fakes_dir", c.paths.fakes_dir);
      c.paths.captions = p.value("captions", c.paths.captions);
      c.paths.aigi_dir = p.value("aigi_dir", c.paths.aigi_dir);
      c.paths.out_dir = p.value("out_dir", c.paths.out_dir);
    }
    if (j.contains("profiles")) {
      for (const auto& [name, jp] : j.at("profiles").items()) {
        c.profiles[name] = profile_from_json(jp);
      }
    }
    if (j.contains("pixel_set")) {
      const auto& p = j.at("pixel_set");
      c.pixel_set.name = p.value("name", c.pixel_set.name);
      c.pixel_set.target_reals = p.value("target_reals", c.pixel_set.target_reals);
      c.pixel_set.recon_strength = p.value("recon_strength", c.pixel_set.recon_strength);
    }
    if (j.contains("semantic_set")) {
      const auto& p = j.at("semantic_set");
      c.semantic_set.name = p.value("name", c.semantic_set.name);
      c.semantic_set.real_count = p.value("real_count", c.semantic_set.real_count);
      c.semantic_set.fake_count = p.value("fake_count", c.semantic_set.fake_count);
      c.semantic_set.profile = p.value("profile", c.semantic_set.profile);
    }
    if (j.contains("aigi_now")) {
      const auto& p = j.at("aigi_now");
      c.aigi_now.name = p.value("name", c.aigi_now.name);
      c.aigi_now.per_generator = p.value("per_generator", c.aigi_now.per_generator);
      c.aigi_now.profile = p.value("profile", c.aigi_now.profile);
    }
    if (j.contains("expert")) {
      const auto& p = j.at("expert");
      c.expert.train.learning_rate = p.value("learning_rate", c.expert.train.learning_rate);
      c.expert.train.batch_size = p.value("batch_size", c.expert.train.batch_size);
      c.expert.train.epochs = p.value("epochs", c.expert.train.epochs);
      c.expert.train.lora_rank = p.value("lora_rank", c.expert.train.lora_rank);
      c.expert.train.lora_alpha = p.value("lora_alpha", c.expert.train.lora_alpha);
      c.expert.train.seed = p.value("seed", c.expert.train.seed);
      c.expert.threshold = p.value("threshold", c.expert.threshold);
      c.expert.model_path = p.value("model_path", c.expert.model_path);
    }
    if (j.contains("dpo")) {
      const auto& p = j.at("dpo");
      c.dpo.beta = p.value("beta", c.dpo.beta);
      c.dpo.prompt = p.value("prompt", c.dpo.prompt);
      c.dpo.lora_rank = p.value("lora_rank", c.dpo.lora_rank);
      c.dpo.lora_alpha = p.value("lora_alpha", c.dpo.lora_alpha);
      c.dpo.learning_rate = p.value("learning_rate", c.dpo.learning_rate);
      c.dpo.batch_size = p.value("batch_size", c.dpo.batch_size);
      c.dpo.epochs = p.value("epochs", c.dpo.epochs);
    }
    if (j.contains("semantic_backend")) {
      const auto& p = j.at("semantic_backend");
      c.semantic_backend.type = p.value("type", c.semantic_backend.type);
      c.semantic_backend.fixture = p.value("fixture", c.semantic_backend.fixture);
      c.semantic_backend.default_text = p.value("default_text", c.semantic_backend.default_text);
      c.semantic_backend.endpoint = p.value("endpoint", c.semantic_backend.endpoint);
      c.semantic_backend.model = p.value("model", c.semantic_backend.model);
      c.semantic_backend.timeout_ms = p.value("timeout_ms", c.semantic_backend.timeout_ms);
      c.semantic_backend.retries = p.value("retries", c.semantic_backend.retries);
    }
    if (j.contains("expert_backend")) {
      const auto& p = j.at("expert_backend");
      c.expert_backend.type = p.value("type", c.expert_backend.type);
      c.expert_backend.endpoint = p.value("endpoint", c.expert_backend.endpoint);
      c.expert_backend.timeout_ms = p.value("timeout_ms", c.expert_backend.timeout_ms);
      c.expert_backend.retries = p.value("retries", c.expert_backend.retries);
    }
    if (j.contains("fusion")) {
      const auto& p = j.at("fusion");
      c.fusion.unknown_policy = unknown_policy_from_string(
          p.value("unknown_policy", std::string(to_string(c.fusion.unknown_policy))));
      c.fusion.degraded_ok = p.value("degraded_ok", c.fusion.degraded_ok);
    }
    if (j.contains("eval")) {
      const auto& p = j.at("eval");
      c.eval.group_by = p.value("group_by", c.eval.group_by);
      c.eval.failure_budget = p.value("failure_budget", c.eval.failure_budget);
      if (p.contains("grids")) {
        c.eval.grids.clear();
        for (const auto& [family, grid] : p.at("grids").items()) {
          c.eval.grids[family] = grid.get<std::vector<double>>();
        }
      }
    }
    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      c.probe.pixel_set = p.value("pixel_set", c.probe.pixel_set);
      c.probe.semantic_set = p.value("semantic_set", c.probe.semantic_set);
      c.probe.semantic_val = p.value("semantic_val", c.probe.semantic_val);
      c.probe.semantic_test = p.value("semantic_test", c.probe.semantic_test);
      c.probe.pixel_val = p.value("pixel_val", c.probe.pixel_val);
      c.probe.pixel_test = p.value("pixel_test", c.probe.pixel_test);
      c.probe.fixture = p.value("fixture", c.probe.fixture);
    }
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path.string() + ": " + e.what());
  }
  return c;
}

void apply_env_overrides(RunConfig& config) {
  if (const char* v = std::getenv("AIGIKIT_SEED")) {
    config.seed = std::strtoull(v, nullptr, 10);
  }
  if (const char* v = std::getenv("AIGIKIT_WORKERS")) {
    config.workers = static_cast<int>(std::strtol(v, nullptr, 10));
  }
  if (const char* v = std::getenv("AIGIKIT_OUT")) {
    config.paths.out_dir = v;
  }
  if (const char* v = std::getenv("AIGIKIT_BACKEND_URL")) {
    config.semantic_backend.endpoint = v;
    config.semantic_backend.type = "http";
  }
  if (const char* v = std::getenv("AIGIKIT_DEGRADED_OK")) {
    const std::string s(v);
    config.fusion.degraded_ok = s == "1" || s == "true" || s == "yes";
  }
}

std::string resolved_config_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["paths"] = {{"reals_dir", c.paths.reals_dir},
                {"fakes_dir", c.paths.fakes_dir},
                {"captions", c.paths.captions},
                {"aigi_dir", c.paths.aigi_dir},
                {"out_dir", c.paths.out_dir}};
  j["profiles"] = json::object();
  for (const auto& [name, p] : c.profiles) j["profiles"][name] = profile_to_json(p);
  j["pixel_set"] = {{"name", c.pixel_set.name},
                    {"target_reals", c.pixel_set.target_reals},
                    {"recon_strength", c.pixel_set.recon_strength}};
  j["semantic_set"] = {{"name", c.semantic_set.name},
                       {"real_count", c.semantic_set.real_count},
                       {"fake_count", c.semantic_set.fake_count},
                       {"profile", c.semantic_set.profile}};
  j["aigi_now"] = {{"name", c.aigi_now.name},
                   {"per_generator", c.aigi_now.per_generator},
                   {"profile", c.aigi_now.profile}};
  j["expert"] = {{"learning_rate", c.expert.train.learning_rate},
                 {"batch_size", c.expert.train.batch_size},
                 {"epochs", c.expert.train.epochs},
                 {"lora_rank", c.expert.train.lora_rank},
                 {"lora_alpha", c.expert.train.lora_alpha},
                 {"seed", c.expert.train.seed},
                 {"threshold", c.expert.threshold},
                 {"model_path", c.expert.model_path}};
  j["dpo"] = {{"beta", c.dpo.beta},
              {"prompt", c.dpo.prompt},
              {"lora_rank", c.dpo.lora_rank},
              {"lora_alpha", c.dpo.lora_alpha},
              {"learning_rate", c.dpo.learning_rate},
              {"batch_size", c.dpo.batch_size},
              {"epochs", c.dpo.epochs}};
  j["semantic_backend"] = {{"type", c.semantic_backend.type},
                           {"fixture", c.semantic_backend.fixture},
                           {"default_text", c.semantic_backend.default_text},
                           {"endpoint", c.semantic_backend.endpoint},
                           {"model", c.semantic_backend.model},
                           {"timeout_ms", c.semantic_backend.timeout_ms},
                           {"retries", c.semantic_backend.retries}};
  j["expert_backend"] = {{"type", c.expert_backend.type},
                         {"endpoint", c.expert_backend.endpoint},
                         {"timeout_ms", c.expert_backend.timeout_ms},
                         {"retries", c.expert_backend.retries}};
  j["fusion"] = {{"unknown_policy", std::string(to_string(c.fusion.unknown_policy))},
                 {"degraded_ok", c.fusion.degraded_ok}};
  j["eval"] = {{"group_by", c.eval.group_by},
               {"failure_budget", c.eval.failure_budget},
               {"grids", c.eval.grids}};
  j["probe"] = {{"pixel_set", c.probe.pixel_set},
                {"semantic_set", c.probe.semantic_set},
                {"semantic_val", c.probe.semantic_val},
                {"semantic_test", c.probe.semantic_test},
                {"pixel_val", c.probe.pixel_val},
                {"pixel_test", c.probe.pixel_test},
                {"fixture", c.probe.fixture}};
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& config) {
  return hex16(fnv1a64(resolved_config_json(config)));
}

}  // namespace aigikit
