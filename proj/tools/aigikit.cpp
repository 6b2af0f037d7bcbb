// aigikit — corpus construction, expert training, DPO export, dual-branch
// detection, and evaluation from one reproducible config.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <aigikit/config.hpp>
#include <aigikit/corpus.hpp>
#include <aigikit/evalkit.hpp>
#include <aigikit/expert.hpp>
#include <aigikit/fusion.hpp>
#include <aigikit/image_io.hpp>
#include <aigikit/manifest.hpp>
#include <aigikit/parallel.hpp>
#include <aigikit/rng.hpp>
#include <aigikit/semantic.hpp>
#include <aigikit/synth.hpp>

namespace fs = std::filesystem;
using namespace aigikit;
using ordered_json = nlohmann::ordered_json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct CliFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> backend_url;
  bool degraded_ok = false;
};

RunConfig resolve_config(const CliFlags& flags) {
  RunConfig config;
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("AIGIKIT_CONFIG")) path = env;
  }
  if (!path.empty()) {
    config = load_run_config(path);
  } else {
    config = default_run_config();
  }
  apply_env_overrides(config);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.out) config.paths.out_dir = *flags.out;
  if (flags.backend_url) {
    config.semantic_backend.endpoint = *flags.backend_url;
    config.semantic_backend.type = "http";
  }
  if (flags.degraded_ok) config.fusion.degraded_ok = true;
  return config;
}

fs::path make_run_dir(const RunConfig& config, const std::string& command) {
  const std::string hash = config_hash(config);
  const fs::path dir = fs::path(config.paths.out_dir) / (command + "-" + hash.substr(0, 12));
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "config.json", std::ios::binary | std::ios::trunc);
    f << resolved_config_json(config);
  }
  std::cout << "config_hash " << hash << "\n";
  std::cout << "run_dir " << dir.string() << "\n";
  return dir;
}

bool is_image_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> scan_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw UsageError("not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ImageRecord> records_from_dir(const fs::path& dir, Label label,
                                          const std::string& generator = "") {
  std::vector<ImageRecord> records;
  for (const auto& p : scan_images(dir)) {
    ImageRecord r;
    r.id = p.stem().string();
    r.source_path = fs::absolute(p).string();
    r.label = label;
    r.semantic_id = r.id;
    if (!generator.empty()) r.generator = generator;
    records.push_back(std::move(r));
  }
  return records;
}

const PipelineProfile& profile_or_throw(const RunConfig& config, const std::string& name) {
  const auto it = config.profiles.find(name);
  if (it == config.profiles.end()) {
    throw ConfigError("profile not found in config: " + name);
  }
  return it->second;
}

ExpertModel expert_from_config(const RunConfig& config) {
  ExpertModel model;
  if (!config.expert.model_path.empty()) {
    model = load_expert(config.expert.model_path);
  }
  model.threshold = config.expert.threshold;
  return model;
}

std::vector<PixelScorer> pixel_scorers_from_config(const RunConfig& config) {
  std::vector<PixelScorer> scorers;
  if (config.expert_backend.type == "http") {
    ExpertBackendConfig cfg;
    cfg.endpoint = config.expert_backend.endpoint;
    cfg.timeout_ms = config.expert_backend.timeout_ms;
    cfg.retries = config.expert_backend.retries;
    cfg.threshold = config.expert.threshold;
    scorers.push_back(backend_scorer(std::make_shared<ExternalExpertBackend>(cfg)));
  } else if (config.expert_backend.type == "local") {
    scorers.push_back(expert_scorer(expert_from_config(config)));
  } else {
    throw ConfigError("unknown expert backend type: " + config.expert_backend.type);
  }
  return scorers;
}

std::unique_ptr<SemanticBackend> semantic_backend_from_config(const RunConfig& config) {
  const auto& sb = config.semantic_backend;
  if (sb.type == "stub") {
    std::map<std::string, std::string> table;
    if (!sb.fixture.empty()) table = load_stub_fixture(sb.fixture);
    return std::make_unique<StubBackend>(std::move(table), sb.default_text);
  }
  if (sb.type == "http") {
    VlmBackendConfig cfg;
    cfg.endpoint = sb.endpoint;
    cfg.model_name = sb.model;
    cfg.timeout_ms = sb.timeout_ms;
    cfg.retries = sb.retries;
    return std::make_unique<HttpVlmBackend>(cfg);
  }
  throw ConfigError("unknown semantic backend type: " + sb.type);
}

ordered_json verdict_json(const std::string& image, const FusedVerdict& v) {
  auto branch_json = [](const BranchVerdict& b) {
    ordered_json j;
    j["branch"] = std::string(to_string(b.branch));
    j["score"] = b.score;
    j["decision"] = std::string(to_string(b.decision));
    if (b.rationale) {
      j["rationale"] = *b.rationale;
    } else {
      j["rationale"] = nullptr;
    }
    return j;
  };
  ordered_json j;
  j["image"] = image;
  j["final"] = std::string(to_string(v.final));
  j["semantic"] = branch_json(v.semantic);
  j["pixels"] = ordered_json::array();
  for (const auto& p : v.pixels) j["pixels"].push_back(branch_json(p));
  if (v.audit) {
    j["audit"] = *v.audit;
  } else {
    j["audit"] = nullptr;
  }
  return j;
}

// Record-level fused detector used by eval and robustness. The semantic
// stub keys on record ids; the pixel branch scores the (possibly degraded)
// pixels locally or via the remote /score contract.
Detector fused_detector(const RunConfig& config, const SemanticBackend* backend) {
  const FusionPolicy policy{config.fusion.unknown_policy, config.fusion.degraded_ok};
  auto scorers = std::make_shared<std::vector<PixelScorer>>(pixel_scorers_from_config(config));
  return [backend, scorers, policy](const ImageRecord& record, const PixelBuffer& img) {
    return detect({record.id, &img}, backend, std::span<const PixelScorer>(*scorers),
                  std::string(kDetectionPrompt), policy)
        .final;
  };
}

// ---- commands -------------------------------------------------------------

int cmd_build(const RunConfig& config, const std::string& kind) {
  const fs::path run_dir = make_run_dir(config, "build-" + kind);
  BuildOptions opts;
  opts.seed = config.seed;
  opts.workers = config.workers;

  if (kind == "pixel") {
    if (config.paths.reals_dir.empty()) throw UsageError("build pixel needs paths.reals_dir");
    auto reals = records_from_dir(config.paths.reals_dir, Label::Real);
    if (reals.empty()) throw UsageError("no images in " + config.paths.reals_dir);
    reals = seeded_sample(std::move(reals), config.pixel_set.target_reals, config.seed,
                          "pixel/reals");
    opts.name = config.pixel_set.name;
    const PseudoReconstructor recon(config.pixel_set.recon_strength);
    const CorpusManifest m = build_pixel_set(reals, recon, run_dir / "pixel", opts);
    save_manifest(m, run_dir / "pixel" / "manifest.jsonl");
    std::cout << "built pixel supervision set: " << m.records.size() << " records ("
              << reals.size() << " pairs), seed " << config.seed << "\n";
    std::cout << "manifest " << (run_dir / "pixel" / "manifest.jsonl").string() << "\n";
    return 0;
  }

  if (kind == "semantic") {
    if (config.paths.reals_dir.empty()) throw UsageError("build semantic needs paths.reals_dir");
    if (config.paths.fakes_dir.empty()) throw UsageError("build semantic needs paths.fakes_dir");
    auto reals = records_from_dir(config.paths.reals_dir, Label::Real);
    auto fakes = records_from_dir(config.paths.fakes_dir, Label::Synthetic);
    if (reals.empty() || fakes.empty()) {
      throw UsageError("build semantic needs nonempty real and fake image directories");
    }
    reals = seeded_sample(std::move(reals), config.semantic_set.real_count, config.seed,
                          "semantic/reals");
    fakes = seeded_sample(std::move(fakes), config.semantic_set.fake_count, config.seed,
                          "semantic/fakes");
    opts.name = config.semantic_set.name;
    const auto& profile = profile_or_throw(config, config.semantic_set.profile);
    const CorpusManifest m = build_semantic_set(reals, fakes, std::nullopt, profile,
                                                run_dir / "semantic", opts);
    save_manifest(m, run_dir / "semantic" / "manifest.jsonl");
    std::cout << "built semantic supervision set: " << m.records.size() << " records ("
              << reals.size() << " real / " << fakes.size() << " synthetic), seed "
              << config.seed << "\n";
    std::cout << "manifest " << (run_dir / "semantic" / "manifest.jsonl").string() << "\n";
    return 0;
  }

  if (kind == "aigi-now") {
    if (config.paths.reals_dir.empty() || config.paths.captions.empty() ||
        config.paths.aigi_dir.empty()) {
      throw UsageError("build aigi-now needs paths.reals_dir, paths.captions, paths.aigi_dir");
    }
    const auto reals = records_from_dir(config.paths.reals_dir, Label::Real);
    const CaptionTable captions = load_captions(config.paths.captions);

    // Layout: <aigi_dir>/<generator>/{faithful,surreal}/<real_id>.png
    std::vector<ImageRecord> faithful, surreal;
    for (const auto& gen_entry : fs::directory_iterator(config.paths.aigi_dir)) {
      if (!gen_entry.is_directory()) continue;
      const std::string generator = gen_entry.path().filename().string();
      for (const char* flavor : {"faithful", "surreal"}) {
        const fs::path dir = gen_entry.path() / flavor;
        if (!fs::is_directory(dir)) continue;
        for (const auto& p : scan_images(dir)) {
          const std::string real_id = p.stem().string();
          const auto it = captions.find(real_id);
          if (it == captions.end()) {
            throw UnmatchedCaption("no caption entry for " + real_id + " (" + p.string() + ")");
          }
          ImageRecord r;
          r.id = generator + "-" + flavor[0] + "-" + real_id;
          r.source_path = fs::absolute(p).string();
          r.label = Label::Synthetic;
          r.generator = generator;
          r.semantic_id = caption_hash(std::string(flavor) == "faithful"
                                           ? it->second.caption
                                           : it->second.surreal_caption);
          (std::string(flavor) == "faithful" ? faithful : surreal).push_back(std::move(r));
        }
      }
    }

    opts.name = config.aigi_now.name;
    const auto& profile = profile_or_throw(config, config.aigi_now.profile);
    const AigiNowResult result =
        build_aigi_now(reals, captions, faithful, surreal, profile, run_dir / "aigi-now", opts,
                       config.aigi_now.per_generator);
    save_manifest(result.pixel_subset, run_dir / "aigi-now" / "pixel_manifest.jsonl");
    save_manifest(result.semantic_subset, run_dir / "aigi-now" / "semantic_manifest.jsonl");
    std::cout << "built aigi-now subsets: pixel " << result.pixel_subset.records.size()
              << " records, semantic " << result.semantic_subset.records.size()
              << " records, seed " << config.seed << "\n";
    return 0;
  }

  throw UsageError("unknown build kind: " + kind + " (expected pixel|semantic|aigi-now)");
}

int cmd_train_expert(const RunConfig& config, const std::string& manifest_path) {
  const fs::path run_dir = make_run_dir(config, "train-expert");
  const CorpusManifest manifest = load_manifest(manifest_path);

  ExpertTrainConfig train = config.expert.train;
  train.seed = config.expert_seed();
  ExpertModel model = train_expert(manifest, train, {}, config.workers);
  model.threshold = config.expert.threshold;

  save_expert(model, run_dir / "expert.json");
  ordered_json trace;
  trace["epoch_losses"] = model.epoch_losses;
  {
    std::ofstream f(run_dir / "train_trace.json", std::ios::binary | std::ios::trunc);
    f << trace.dump(2) << "\n";
  }
  std::cout << "trained expert on " << manifest.records.size() << " records, final loss "
            << (model.epoch_losses.empty() ? 0.0 : model.epoch_losses.back()) << "\n";
  std::cout << "model " << (run_dir / "expert.json").string() << "\n";
  return 0;
}

int cmd_export_dpo(const RunConfig& config, const std::string& manifest_path) {
  const fs::path run_dir = make_run_dir(config, "export-dpo");
  const CorpusManifest manifest = load_manifest(manifest_path);

  const DpoBuildResult result = build_dpo_pairs(manifest, nullptr, config.dpo.prompt);
  export_dpo_jsonl(result.pairs, run_dir / "dpo.jsonl");

  // Fine-tuning constants travel with the export so external backends train
  // with the intended settings.
  ordered_json meta;
  meta["beta"] = config.dpo.beta;
  meta["prompt"] = config.dpo.prompt;
  meta["lora_rank"] = config.dpo.lora_rank;
  meta["lora_alpha"] = config.dpo.lora_alpha;
  meta["learning_rate"] = config.dpo.learning_rate;
  meta["batch_size"] = config.dpo.batch_size;
  meta["epochs"] = config.dpo.epochs;
  meta["pairs"] = result.pairs.size();
  meta["skipped"] = result.skipped;
  {
    std::ofstream f(run_dir / "dpo_meta.json", std::ios::binary | std::ios::trunc);
    f << meta.dump(2) << "\n";
  }
  std::cout << "exported " << result.pairs.size() << " preference pairs (" << result.skipped
            << " skipped) to " << (run_dir / "dpo.jsonl").string() << "\n";
  return 0;
}

int cmd_detect(const RunConfig& config, const std::string& target) {
  const fs::path run_dir = make_run_dir(config, "detect");

  const auto backend = semantic_backend_from_config(config);
  const auto scorers = pixel_scorers_from_config(config);
  const FusionPolicy policy{config.fusion.unknown_policy, config.fusion.degraded_ok};

  std::vector<fs::path> files;
  if (fs::is_directory(target)) {
    files = scan_images(target);
  } else if (fs::exists(target)) {
    files.push_back(target);
  } else {
    throw UsageError("no such image or directory: " + target);
  }
  if (files.empty()) throw UsageError("no images found under " + target);

  std::ofstream out(run_dir / "verdicts.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& file : files) {
    const PixelBuffer img = load_image(file);
    const FusedVerdict v =
        detect({file.stem().string(), &img}, backend.get(),
               std::span<const PixelScorer>(scorers), std::string(kDetectionPrompt), policy);
    const std::string line = verdict_json(file.string(), v).dump();
    std::cout << line << "\n";
    out << line << "\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& config, const std::string& manifest_path, bool oracle_flag) {
  const fs::path run_dir = make_run_dir(config, "eval");
  const CorpusManifest manifest = load_manifest(manifest_path);

  const auto backend = semantic_backend_from_config(config);

  Detector detector;
  if (oracle_flag) {
    detector = [](const ImageRecord& r, const PixelBuffer&) { return r.label; };
  } else {
    detector = fused_detector(config, backend.get());
  }

  EvalOptions opts;
  opts.group_by = group_by_from_string(config.eval.group_by);
  opts.failure_budget = config.eval.failure_budget;
  opts.workers = config.workers;

  Report report;
  report.results = evaluate_detector(detector, manifest, opts);
  report.metadata.seed = config.seed;
  report.metadata.config_hash = config_hash(config);
  emit_report(report, run_dir / "report");

  const Aggregate agg = aggregate(report.results);
  for (const auto& r : report.results) {
    std::cout << r.benchmark << "/" << r.sub_source << " ba " << r.balanced_accuracy << " (tpr "
              << r.tpr << ", tnr " << r.tnr << ", failed " << r.n_failed << ")\n";
  }
  std::cout << "mean " << agg.mean << " +- " << agg.stddev << " over " << report.results.size()
            << " groups\n";
  std::cout << "report " << (run_dir / "report").string() << "\n";
  return 0;
}

int cmd_robustness(const RunConfig& config, const std::string& manifest_path, bool oracle_flag) {
  const fs::path run_dir = make_run_dir(config, "robustness");
  const CorpusManifest manifest = load_manifest(manifest_path);

  const auto backend = semantic_backend_from_config(config);
  Detector detector;
  if (oracle_flag) {
    detector = [](const ImageRecord& r, const PixelBuffer&) { return r.label; };
  } else {
    detector = fused_detector(config, backend.get());
  }

  EvalOptions opts;
  opts.failure_budget = config.eval.failure_budget;
  opts.workers = config.workers;

  Report report;
  report.metadata.seed = config.seed;
  report.metadata.config_hash = config_hash(config);
  for (const auto& [family, grid] : config.eval.grids) {
    report.curves.push_back(robustness_sweep(detector, manifest, family, grid, opts));
    const auto& curve = report.curves.back();
    std::cout << family << ":";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      std::cout << " " << curve.grid[i] << "=" << curve.points[i];
    }
    std::cout << "\n";
  }
  emit_report(report, run_dir / "report");
  std::cout << "report " << (run_dir / "report").string() << "\n";
  return 0;
}

int cmd_probe(const RunConfig& config) {
  const fs::path run_dir = make_run_dir(config, "probe");
  const auto& pc = config.probe;
  for (const auto& [field, value] :
       std::initializer_list<std::pair<const char*, const std::string*>>{
           {"probe.pixel_set", &pc.pixel_set},
           {"probe.semantic_set", &pc.semantic_set},
           {"probe.semantic_val", &pc.semantic_val},
           {"probe.semantic_test", &pc.semantic_test},
           {"probe.pixel_val", &pc.pixel_val},
           {"probe.pixel_test", &pc.pixel_test}}) {
    if (value->empty()) throw UsageError(std::string("missing config field: ") + field);
  }

  ProbeSets sets;
  sets.pixel = load_manifest(pc.pixel_set);
  sets.semantic = load_manifest(pc.semantic_set);

  // Mixed supervision is the concatenation of the two pure sets.
  sets.mixed.name = "mixed";
  sets.mixed.seed = config.seed;
  sets.mixed.kind = ManifestKind::MixedSupervision;
  for (const auto* src : {&sets.pixel, &sets.semantic}) {
    for (const auto& r : src->records) {
      ImageRecord copy = r;
      copy.source_path = resolve_source_path(*src, r).string();
      sets.mixed.records.push_back(std::move(copy));
    }
  }
  require_valid(sets.mixed);

  ProbeSplits splits;
  splits.semantic_val = load_manifest(pc.semantic_val);
  splits.semantic_test = load_manifest(pc.semantic_test);
  splits.pixel_val = load_manifest(pc.pixel_val);
  splits.pixel_test = load_manifest(pc.pixel_test);

  // Reference expert: trains on whatever supervision it is handed.
  ExpertTrainConfig train = config.expert.train;
  train.seed = config.expert_seed();
  const double threshold = config.expert.threshold;
  const int workers = config.workers;
  TrainerFn expert_trainer = [train, threshold, workers](const CorpusManifest& m) -> Detector {
    std::vector<const ImageRecord*> sorted;
    for (const auto& r : m.records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });
    std::vector<LabeledFeatures> samples(sorted.size());
    parallel_for(sorted.size(), workers, [&](std::size_t i) {
      const PixelBuffer img = load_image(resolve_source_path(m, *sorted[i]));
      samples[i] = LabeledFeatures{extract_residual_features(img), sorted[i]->label};
    });
    ExpertModel model = fit_expert(samples, train);
    model.threshold = threshold;
    return [model](const ImageRecord&, const PixelBuffer& img) {
      return score(model, img).decision;
    };
  };

  // Semantic model row: fixture-driven stub; training cannot grant it pixel
  // perception, mirroring a frozen-vision-tower VLM.
  std::map<std::string, std::string> fixture;
  if (!pc.fixture.empty()) fixture = load_stub_fixture(pc.fixture);
  const UnknownPolicy policy = config.fusion.unknown_policy;
  TrainerFn stub_trainer = [fixture, policy](const CorpusManifest&) -> Detector {
    const auto backend = std::make_shared<StubBackend>(fixture, "");
    return [backend, policy](const ImageRecord& r, const PixelBuffer& img) {
      return semantic_verdict(*backend, {r.id, &img}, std::string(kDetectionPrompt), policy)
          .decision;
    };
  };

  std::map<std::string, TrainerFn> trainers;
  trainers["reference-expert"] = expert_trainer;
  trainers["semantic-stub"] = stub_trainer;

  EvalOptions opts;
  opts.workers = config.workers;

  Report report;
  report.probe = alignment_probe(trainers, sets, splits, opts);
  report.metadata.seed = config.seed;
  report.metadata.config_hash = config_hash(config);
  emit_report(report, run_dir / "report");

  for (const auto& model : report.probe->models) {
    for (const auto& [set_name, cell] : report.probe->cells.at(model)) {
      std::cout << model << " x " << set_name << ": ";
      if (cell) {
        std::cout << "sem_val " << cell->semantic_val << " sem_test " << cell->semantic_test
                  << " pix_val " << cell->pixel_val << " pix_test " << cell->pixel_test << "\n";
      } else {
        std::cout << "(trainer failed)\n";
      }
    }
  }
  std::cout << "report " << (run_dir / "report").string() << "\n";
  return 0;
}

int cmd_gen_data(const RunConfig& config, const std::string& out, int count, int size,
                 const std::string& generators_csv) {
  const fs::path dir = out.empty() ? fs::path(config.paths.out_dir) / "sample-data" : fs::path(out);
  fs::create_directories(dir / "reals");
  fs::create_directories(dir / "fakes");

  std::vector<std::string> generators;
  {
    std::string tail = generators_csv;
    while (!tail.empty()) {
      const auto comma = tail.find(',');
      generators.push_back(tail.substr(0, comma));
      if (comma == std::string::npos) break;
      tail = tail.substr(comma + 1);
    }
  }

  std::ofstream captions(dir / "captions.jsonl", std::ios::binary | std::ios::trunc);
  for (int i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%04d", i);
    const std::string id(buf);
    const std::uint64_t seed = mix_seed(config.seed, "gen-data/" + id);

    const PixelBuffer real = synth_photo(seed, size, size);
    save_png(real, dir / "reals" / (id + ".png"));

    std::snprintf(buf, sizeof(buf), "f%04d", i);
    save_png(synth_surreal(seed ^ 0x5eed, size, size), dir / "fakes" / (std::string(buf) + ".png"));

    ordered_json cap;
    cap["image_id"] = id;
    cap["caption"] = "photo " + id + ": hills under a hazy sky";
    cap["surreal_caption"] = "surreal " + id + ": striped sky over floating cubes";
    captions << cap.dump() << "\n";

    // Per-generator faithful reconstructions and surreal variants.
    for (std::size_t g = 0; g < generators.size(); ++g) {
      const fs::path gen_dir = dir / "aigi" / generators[g];
      fs::create_directories(gen_dir / "faithful");
      fs::create_directories(gen_dir / "surreal");
      const double strength = 1.0 - 0.15 * static_cast<double>(g);
      save_png(pseudo_reconstruct(real, strength), gen_dir / "faithful" / (id + ".png"));
      save_png(synth_surreal(mix_seed(seed, generators[g]), size, size),
               gen_dir / "surreal" / (id + ".png"));
    }
  }
  std::cout << "wrote " << count << " sample reals/fakes";
  if (!generators.empty()) std::cout << " and " << generators.size() << " generator dirs";
  std::cout << " under " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AI-generated-image detection toolkit"};
  app.require_subcommand(1);

  CliFlags flags;
  app.add_option("--config", flags.config_path, "Config file (JSON)");
  app.add_option("--seed", flags.seed, "Override the global seed");
  app.add_option("--workers", flags.workers, "Worker threads (0 = hardware)");
  app.add_option("--out", flags.out, "Output root directory");
  app.add_option("--backend-url", flags.backend_url, "Semantic VLM backend endpoint");
  app.add_flag("--degraded-ok", flags.degraded_ok, "Permit single-branch detection");

  std::string build_kind;
  auto* build = app.add_subcommand("build", "Build a supervision set or benchmark");
  build->add_option("kind", build_kind, "pixel | semantic | aigi-now")->required();

  std::string train_manifest;
  auto* train = app.add_subcommand("train-expert", "Train the reference pixel expert");
  train->add_option("manifest", train_manifest, "Pixel supervision manifest")->required();

  std::string dpo_manifest;
  auto* export_dpo = app.add_subcommand("export-dpo", "Export DPO preference pairs");
  export_dpo->add_option("manifest", dpo_manifest, "Semantic supervision manifest")->required();

  std::string detect_target;
  auto* det = app.add_subcommand("detect", "Run dual-branch detection");
  det->add_option("image", detect_target, "Image file or directory")->required();

  std::string eval_manifest;
  bool eval_oracle = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a detector on a benchmark manifest");
  eval_cmd->add_option("manifest", eval_manifest, "Benchmark manifest")->required();
  eval_cmd->add_flag("--oracle", eval_oracle, "Use the truth-label oracle detector");

  std::string robust_manifest;
  bool robust_oracle = false;
  auto* robust = app.add_subcommand("robustness", "Sweep post-processing robustness");
  robust->add_option("manifest", robust_manifest, "Benchmark manifest")->required();
  robust->add_flag("--oracle", robust_oracle, "Use the truth-label oracle detector");

  auto* probe = app.add_subcommand("probe", "Run the supervision-alignment probe");
  (void)probe;

  std::string gen_out;
  int gen_count = 24;
  int gen_size = 64;
  std::string gen_generators = "gen-a,gen-b";
  auto* gen = app.add_subcommand("gen-data", "Synthesize a deterministic sample dataset");
  gen->add_option("--out", gen_out, "Output directory (default <out_dir>/sample-data)");
  gen->add_option("--count", gen_count, "Images per class");
  gen->add_option("--size", gen_size, "Image side length");
  gen->add_option("--generators", gen_generators, "Comma-separated generator names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig config = resolve_config(flags);
    if (build->parsed()) return cmd_build(config, build_kind);
    if (train->parsed()) return cmd_train_expert(config, train_manifest);
    if (export_dpo->parsed()) return cmd_export_dpo(config, dpo_manifest);
    if (det->parsed()) return cmd_detect(config, detect_target);
    if (eval_cmd->parsed()) return cmd_eval(config, eval_manifest, eval_oracle);
    if (robust->parsed()) return cmd_robustness(config, robust_manifest, robust_oracle);
    if (probe->parsed()) return cmd_probe(config);
    if (gen->parsed()) return cmd_gen_data(config, gen_out, gen_count, gen_size, gen_generators);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
