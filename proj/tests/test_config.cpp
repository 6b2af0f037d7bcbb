#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <aigikit/config.hpp>

#include "testutil.hpp"

using namespace aigikit;

TEST_CASE("default config carries the documented fine-tuning constants") {
  const RunConfig c = default_run_config();

  // DPO export metadata defaults.
  CHECK(c.dpo.beta == 0.05);
  CHECK(c.dpo.lora_rank == 16);
  CHECK(c.dpo.lora_alpha == 32.0);
  CHECK(c.dpo.learning_rate == 1e-6);
  CHECK(c.dpo.batch_size == 8);
  CHECK(c.dpo.epochs == 1);
  CHECK(c.dpo.prompt == "Is this image AI-generated or authentic? Answer and explain.");

  // Expert branch defaults (LoRA fields forwarded to external backends).
  CHECK(c.expert.train.learning_rate == 1e-4);
  CHECK(c.expert.train.batch_size == 16);
  CHECK(c.expert.train.epochs == 5);
  CHECK(c.expert.train.lora_rank == 8);
  CHECK(c.expert.train.lora_alpha == 1.0);
  CHECK(c.expert.threshold == 0.5);

  // Full-scale corpus targets.
  CHECK(c.pixel_set.target_reals == 11800);
  CHECK(c.semantic_set.real_count == 5000);
  CHECK(c.semantic_set.fake_count == 5000);
  CHECK(c.aigi_now.per_generator == 1000);

  // Heavy profile is registered by default.
  REQUIRE(c.profiles.count("heavy") == 1);
  CHECK(c.profiles.at("heavy").pool.size() == 5);
  CHECK(c.profiles.at("heavy").min_len == 2);
  CHECK(c.profiles.at("heavy").max_len == 4);

  CHECK(c.fusion.unknown_policy == UnknownPolicy::Real);
  CHECK_FALSE(c.fusion.degraded_ok);
}

TEST_CASE("config files overlay defaults field by field") {
  testutil::TempDir tmp("config");
  {
    std::ofstream f(tmp.path() / "c.json");
    f << R"({
      "seed": 99,
      "dpo": {"beta": 0.1},
      "expert": {"learning_rate": 2.5, "seed": 7},
      "profiles": {"mild": {"min_len": 1, "max_len": 2,
                            "pool": [{"kind": "jpeg", "range": [80, 95]},
                                     {"kind": "gaussian_blur", "range": [0.5, 1.0]}]}}
    })";
  }
  const RunConfig c = load_run_config(tmp.path() / "c.json");
  CHECK(c.seed == 99);
  CHECK(c.dpo.beta == 0.1);
  CHECK(c.dpo.lora_rank == 16);  // untouched default
  CHECK(c.expert.train.learning_rate == 2.5);
  CHECK(c.expert_seed() == 7);
  CHECK(c.profiles.count("heavy") == 1);
  REQUIRE(c.profiles.count("mild") == 1);
  CHECK(c.profiles.at("mild").pool.size() == 2);
}

TEST_CASE("the expert seed falls back to the global seed") {
  RunConfig c = default_run_config();
  c.seed = 44;
  c.expert.train.seed = 0;
  CHECK(c.expert_seed() == 44);
  c.expert.train.seed = 5;
  CHECK(c.expert_seed() == 5);
}

TEST_CASE("malformed or missing config files raise ConfigError") {
  testutil::TempDir tmp("config-bad");
  CHECK_THROWS_AS(load_run_config(tmp.path() / "nope.json"), ConfigError);
  {
    std::ofstream f(tmp.path() / "bad.json");
    f << "{not json";
  }
  CHECK_THROWS_AS(load_run_config(tmp.path() / "bad.json"), ConfigError);
}

TEST_CASE("environment variables override config fields") {
  RunConfig c = default_run_config();
  setenv("AIGIKIT_SEED", "321", 1);
  setenv("AIGIKIT_WORKERS", "3", 1);
  setenv("AIGIKIT_OUT", "/tmp/elsewhere", 1);
  setenv("AIGIKIT_BACKEND_URL", "http://127.0.0.1:9", 1);
  setenv("AIGIKIT_DEGRADED_OK", "true", 1);
  apply_env_overrides(c);
  unsetenv("AIGIKIT_SEED");
  unsetenv("AIGIKIT_WORKERS");
  unsetenv("AIGIKIT_OUT");
  unsetenv("AIGIKIT_BACKEND_URL");
  unsetenv("AIGIKIT_DEGRADED_OK");

  CHECK(c.seed == 321);
  CHECK(c.workers == 3);
  CHECK(c.paths.out_dir == "/tmp/elsewhere");
  CHECK(c.semantic_backend.endpoint == "http://127.0.0.1:9");
  CHECK(c.semantic_backend.type == "http");
  CHECK(c.fusion.degraded_ok);
}

TEST_CASE("equal configs hash equally and edits change the hash") {
  const RunConfig a = default_run_config();
  RunConfig b = default_run_config();
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(resolved_config_json(a) == resolved_config_json(b));

  b.seed += 1;
  CHECK(config_hash(a) != config_hash(b));

  b = default_run_config();
  b.dpo.beta = 0.06;
  CHECK(config_hash(a) != config_hash(b));
}
