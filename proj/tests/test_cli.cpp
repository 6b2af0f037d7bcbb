#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <aigikit/manifest.hpp>

#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

const char* cli_bin() { return std::getenv("AIGIKIT_BIN"); }

CliResult run_cli(const std::string& args) {
  CliResult result;
  const std::string cmd = std::string(cli_bin()) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    result.output.append(buf, n);
    if (n < sizeof(buf)) break;
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

/// First "run_dir <path>" line printed by a command.
fs::path parse_run_dir(const std::string& output) {
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("run_dir ", 0) == 0) return line.substr(8);
  }
  return {};
}

void write_config(const fs::path& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

}  // namespace

#define REQUIRE_CLI_BIN() \
  if (!cli_bin()) {       \
    MESSAGE("AIGIKIT_BIN not set; skipping CLI test"); \
    return;               \
  }

TEST_CASE("cli: unknown flags exit with usage code 2") {
  REQUIRE_CLI_BIN();
  CHECK(run_cli("--no-such-flag").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("build nonsense").exit_code == 2);
}

TEST_CASE("cli: build pixel makes a 2n-record manifest and rebuilds identically") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-pixel");
  testutil::write_photo_records(tmp.path() / "reals", 10, 4000);
  write_config(tmp.path() / "config.json", R"({
    "seed": 21,
    "workers": 2,
    "paths": {"reals_dir": ")" + (tmp.path() / "reals").string() + R"(",
              "out_dir": ")" + (tmp.path() / "out").string() + R"("},
    "pixel_set": {"target_reals": 0, "recon_strength": 1.0}
  })");

  const auto first = run_cli("--config " + (tmp.path() / "config.json").string() + " build pixel");
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("20 records") != std::string::npos);

  const fs::path run_dir = parse_run_dir(first.output);
  REQUIRE(fs::exists(run_dir / "pixel" / "manifest.jsonl"));
  const aigikit::CorpusManifest m = aigikit::load_manifest(run_dir / "pixel" / "manifest.jsonl");
  CHECK(m.records.size() == 20);
  CHECK(m.kind == aigikit::ManifestKind::PixelSupervision);

  const std::string bytes_before = slurp(run_dir / "pixel" / "manifest.jsonl");
  const auto second =
      run_cli("--config " + (tmp.path() / "config.json").string() + " build pixel");
  CHECK(second.exit_code == 0);
  CHECK(slurp(run_dir / "pixel" / "manifest.jsonl") == bytes_before);
}

TEST_CASE("cli: build semantic without a fakes dir is a usage error") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-sem-usage");
  testutil::write_photo_records(tmp.path() / "reals", 2, 4100);
  write_config(tmp.path() / "config.json", R"({
    "paths": {"reals_dir": ")" + (tmp.path() / "reals").string() + R"(",
              "out_dir": ")" + (tmp.path() / "out").string() + R"("}
  })");
  const auto result =
      run_cli("--config " + (tmp.path() / "config.json").string() + " build semantic");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("fakes_dir") != std::string::npos);
}

TEST_CASE("cli: detect with the stub backend and zero expert flags the tie") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-detect");
  const auto reals = testutil::write_photo_records(tmp.path() / "img", 1, 4200);
  write_config(tmp.path() / "config.json", R"({
    "paths": {"out_dir": ")" + (tmp.path() / "out").string() + R"("}
  })");

  const auto result = run_cli("--config " + (tmp.path() / "config.json").string() + " detect " +
                              reals[0].source_path);
  CHECK(result.exit_code == 0);

  std::istringstream in(result.output);
  std::string line, verdict_line;
  int json_lines = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '{') {
      ++json_lines;
      verdict_line = line;
    }
  }
  CHECK(json_lines == 1);
  CHECK(verdict_line.find("\"final\":\"synthetic\"") != std::string::npos);

  const fs::path run_dir = parse_run_dir(result.output);
  CHECK(fs::exists(run_dir / "verdicts.jsonl"));
}

TEST_CASE("cli: eval with the oracle flag reports a perfect score") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-eval");
  auto reals = testutil::write_photo_records(tmp.path() / "img", 3, 4300, "r");
  auto fakes = testutil::write_surreal_records(tmp.path() / "img", 3, 4400, "f");
  for (auto& f : fakes) f.generator = "gen-a";

  aigikit::CorpusManifest bench;
  bench.name = "bench";
  bench.kind = aigikit::ManifestKind::Benchmark;
  bench.records = reals;
  bench.records.insert(bench.records.end(), fakes.begin(), fakes.end());
  save_manifest(bench, tmp.path() / "bench.jsonl");

  write_config(tmp.path() / "config.json", R"({
    "paths": {"out_dir": ")" + (tmp.path() / "out").string() + R"("}
  })");

  const auto result = run_cli("--config " + (tmp.path() / "config.json").string() + " eval " +
                              (tmp.path() / "bench.jsonl").string() + " --oracle");
  CHECK(result.exit_code == 0);

  const fs::path run_dir = parse_run_dir(result.output);
  const std::string csv = slurp(run_dir / "report" / "results.csv");
  CHECK(csv.find(",1.0,1.0,1.0") != std::string::npos);  // tpr, tnr, ba
}

TEST_CASE("cli: train-expert and export-dpo produce their artifacts") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-train");
  testutil::write_photo_records(tmp.path() / "reals", 6, 4500);
  testutil::write_surreal_records(tmp.path() / "fakes", 6, 4600);
  write_config(tmp.path() / "config.json", R"({
    "seed": 33,
    "paths": {"reals_dir": ")" + (tmp.path() / "reals").string() + R"(",
              "fakes_dir": ")" + (tmp.path() / "fakes").string() + R"(",
              "out_dir": ")" + (tmp.path() / "out").string() + R"("},
    "pixel_set": {"target_reals": 0},
    "semantic_set": {"real_count": 0, "fake_count": 0},
    "expert": {"learning_rate": 2.0, "epochs": 60, "batch_size": 8}
  })");
  const std::string cfg = "--config " + (tmp.path() / "config.json").string();

  const auto build_pix = run_cli(cfg + " build pixel");
  REQUIRE(build_pix.exit_code == 0);
  const fs::path pixel_manifest = parse_run_dir(build_pix.output) / "pixel" / "manifest.jsonl";

  const auto train = run_cli(cfg + " train-expert " + pixel_manifest.string());
  CHECK(train.exit_code == 0);
  const fs::path model = parse_run_dir(train.output) / "expert.json";
  CHECK(fs::exists(model));

  const auto build_sem = run_cli(cfg + " build semantic");
  REQUIRE(build_sem.exit_code == 0);
  const fs::path sem_manifest = parse_run_dir(build_sem.output) / "semantic" / "manifest.jsonl";

  const auto exp = run_cli(cfg + " export-dpo " + sem_manifest.string());
  CHECK(exp.exit_code == 0);
  const fs::path run_dir = parse_run_dir(exp.output);
  CHECK(fs::exists(run_dir / "dpo.jsonl"));
  const std::string meta = slurp(run_dir / "dpo_meta.json");
  CHECK(meta.find("\"beta\": 0.05") != std::string::npos);
  CHECK(meta.find("\"lora_rank\": 16") != std::string::npos);

  // Exporting from a pixel manifest is a runtime failure, not a crash.
  const auto wrong = run_cli(cfg + " export-dpo " + pixel_manifest.string());
  CHECK(wrong.exit_code == 1);
}

TEST_CASE("cli: gen-data lays out reals, fakes, captions, and generator dirs") {
  REQUIRE_CLI_BIN();
  testutil::TempDir tmp("cli-gendata");
  write_config(tmp.path() / "config.json", R"({
    "paths": {"out_dir": ")" + (tmp.path() / "out").string() + R"("}
  })");
  const auto result = run_cli("--config " + (tmp.path() / "config.json").string() +
                              " gen-data --out " + (tmp.path() / "data").string() +
                              " --count 4 --size 32");
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(tmp.path() / "data" / "reals" / "r0000.png"));
  CHECK(fs::exists(tmp.path() / "data" / "fakes" / "f0003.png"));
  CHECK(fs::exists(tmp.path() / "data" / "captions.jsonl"));
  CHECK(fs::exists(tmp.path() / "data" / "aigi" / "gen-a" / "faithful" / "r0000.png"));
  CHECK(fs::exists(tmp.path() / "data" / "aigi" / "gen-b" / "surreal" / "r0003.png"));
}
