#include <doctest.h>

#include <fstream>

#include <aigikit/evalkit.hpp>
#include <aigikit/rng.hpp>
#include <aigikit/synth.hpp>

#include "testutil.hpp"

using namespace aigikit;
namespace fs = std::filesystem;

namespace {

CorpusManifest toy_benchmark(int n_real, int n_fake, const std::string& gen_a = "gen-a",
                             const std::string& gen_b = "") {
  CorpusManifest m;
  m.name = "toy-bench";
  m.kind = ManifestKind::Benchmark;
  for (int i = 0; i < n_real; ++i) {
    ImageRecord r;
    r.id = "r" + std::to_string(i);
    r.source_path = r.id + ".png";
    r.label = Label::Real;
    r.semantic_id = r.id;
    r.generator = std::nullopt;
    m.records.push_back(std::move(r));
  }
  for (int i = 0; i < n_fake; ++i) {
    ImageRecord r;
    r.id = "f" + std::to_string(i);
    r.source_path = r.id + ".png";
    r.label = Label::Synthetic;
    r.semantic_id = r.id;
    r.generator = (!gen_b.empty() && i % 2) ? gen_b : gen_a;
    m.records.push_back(std::move(r));
  }
  return m;
}

RecordImageLoader synthetic_loader() {
  return [](const CorpusManifest&, const ImageRecord& r) {
    return synth_photo(fnv1a64(r.id), 16, 16);
  };
}

Detector oracle() {
  return [](const ImageRecord& r, const PixelBuffer&) { return r.label; };
}

Detector anti_oracle() {
  return [](const ImageRecord& r, const PixelBuffer&) {
    return r.label == Label::Real ? Label::Synthetic : Label::Real;
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("balanced accuracy follows the confusion matrix") {
  using P = std::pair<Label, Label>;
  const Label R = Label::Real, S = Label::Synthetic;

  // Perfect predictions.
  std::vector<P> perfect = {{R, R}, {S, S}, {R, R}, {S, S}};
  CHECK(balanced_accuracy(perfect).balanced_accuracy == 1.0);

  // A constant "fake" predictor lands at one half.
  std::vector<P> constant = {{S, R}, {S, R}, {S, S}, {S, S}, {S, S}};
  const EvalResult c = balanced_accuracy(constant);
  CHECK(c.tpr == 1.0);
  CHECK(c.tnr == 0.0);
  CHECK(c.balanced_accuracy == 0.5);

  // reals [correct, wrong], fakes [correct, correct].
  std::vector<P> mixed = {{R, R}, {S, R}, {S, S}, {S, S}};
  const EvalResult m = balanced_accuracy(mixed);
  CHECK(m.tnr == 0.5);
  CHECK(m.tpr == 1.0);
  CHECK(m.balanced_accuracy == 0.75);
}

TEST_CASE("balanced accuracy needs both truth labels") {
  std::vector<std::pair<Label, Label>> only_real = {{Label::Real, Label::Real}};
  CHECK_THROWS_AS(balanced_accuracy(only_real), SingleClassInput);
}

TEST_CASE("balanced accuracy ignores class duplication") {
  SplitMix64 rng(31);
  std::vector<std::pair<Label, Label>> base;
  for (int i = 0; i < 30; ++i) {
    base.push_back({rng.next() % 2 ? Label::Synthetic : Label::Real,
                    i % 2 ? Label::Synthetic : Label::Real});
  }
  const double ba = balanced_accuracy(base).balanced_accuracy;
  for (const int k : {2, 5}) {
    std::vector<std::pair<Label, Label>> dup;
    for (const auto& pr : base) {
      const int copies = pr.second == Label::Real ? k : 1;
      for (int c = 0; c < copies; ++c) dup.push_back(pr);
    }
    CHECK(balanced_accuracy(dup).balanced_accuracy == doctest::Approx(ba).epsilon(1e-12));
  }
}

TEST_CASE("aggregation uses the population standard deviation") {
  const std::vector<double> same = {80.0, 80.0, 80.0};
  const Aggregate a = aggregate_values(same);
  CHECK(a.mean == 80.0);
  CHECK(a.stddev == 0.0);

  const std::vector<double> two = {70.0, 90.0};
  const Aggregate b = aggregate_values(two);
  CHECK(b.mean == 80.0);
  CHECK(b.stddev == 10.0);

  const std::vector<double> one = {66.0};
  CHECK(aggregate_values(one).stddev == 0.0);

  CHECK_THROWS_AS(aggregate_values({}), EmptyResults);
}

TEST_CASE("aggregation is permutation invariant") {
  std::vector<double> values = {0.3, 0.9, 0.5, 0.7};
  const Aggregate a = aggregate_values(values);
  std::reverse(values.begin(), values.end());
  const Aggregate b = aggregate_values(values);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-15));
  CHECK(a.stddev == doctest::Approx(b.stddev).epsilon(1e-15));
}

TEST_CASE("evaluation groups by generator with deterministic ordering") {
  const CorpusManifest m = toy_benchmark(8, 8, "gen-a", "gen-b");
  EvalOptions opts;
  opts.group_by = GroupBy::Generator;
  opts.loader = synthetic_loader();
  const auto results = evaluate_detector(oracle(), m, opts);
  REQUIRE(results.size() == 2);  // one per generator, reals shared
  CHECK(results[0].sub_source == "gen-a");
  CHECK(results[1].sub_source == "gen-b");
  CHECK(results[0].n_real == 8);
  CHECK(results[0].n_fake == 4);
  CHECK(results[1].n_fake == 4);
}

TEST_CASE("an oracle detector scores one and an anti-oracle zero") {
  const CorpusManifest m = toy_benchmark(6, 6);
  EvalOptions opts;
  opts.loader = synthetic_loader();
  CHECK(evaluate_detector(oracle(), m, opts).front().balanced_accuracy == 1.0);
  CHECK(evaluate_detector(anti_oracle(), m, opts).front().balanced_accuracy == 0.0);
}

TEST_CASE("detector failures respect the budget and stay out of the rates") {
  const CorpusManifest m = toy_benchmark(4, 4);
  Detector flaky = [](const ImageRecord& r, const PixelBuffer&) -> Label {
    if (r.id == "f0") throw Error("crash");
    return r.label;
  };
  EvalOptions opts;
  opts.loader = synthetic_loader();

  opts.failure_budget = 0;
  CHECK_THROWS_AS(evaluate_detector(flaky, m, opts), FailureBudgetExceeded);

  opts.failure_budget = 1;
  const auto results = evaluate_detector(flaky, m, opts);
  REQUIRE(results.size() == 1);
  CHECK(results[0].n_failed == 1);
  CHECK(results[0].n_fake == 3);  // failed record excluded from the denominator
  CHECK(results[0].balanced_accuracy == 1.0);
}

TEST_CASE("the robustness identity point reproduces plain evaluation") {
  const CorpusManifest m = toy_benchmark(5, 5);
  EvalOptions opts;
  opts.loader = synthetic_loader();

  Detector energy_detector = [](const ImageRecord&, const PixelBuffer& img) {
    return neighbor_residual_energy(img) > 0.002 ? Label::Real : Label::Synthetic;
  };

  const double plain =
      evaluate_detector(energy_detector, m, opts).front().balanced_accuracy;
  const std::vector<double> grid = {60.0};
  const RobustnessCurve curve = robustness_sweep(energy_detector, m, "jpeg", grid, opts);
  REQUIRE(curve.grid.size() == 2);
  CHECK(curve.grid[0] == "identity");
  CHECK(curve.points[0] == plain);
  CHECK(curve.points.size() == curve.grid.size());
}

TEST_CASE("an oracle detector yields a flat robustness curve at one") {
  const CorpusManifest m = toy_benchmark(4, 4);
  EvalOptions opts;
  opts.loader = synthetic_loader();
  const std::vector<double> grid = {80.0, 40.0};
  const RobustnessCurve curve = robustness_sweep(oracle(), m, "double_jpeg", grid, opts);
  for (const double p : curve.points) CHECK(p == 1.0);
}

TEST_CASE("unknown robustness families are rejected") {
  const CorpusManifest m = toy_benchmark(2, 2);
  EvalOptions opts;
  opts.loader = synthetic_loader();
  const std::vector<double> grid = {1.0};
  CHECK_THROWS_AS(robustness_sweep(oracle(), m, "sepia", grid, opts), FailureBudgetExceeded);
}

TEST_CASE("the alignment probe fills every cell and repeats identically") {
  const CorpusManifest train_set = toy_benchmark(4, 4);
  ProbeSets sets{train_set, train_set, train_set};
  ProbeSplits splits{toy_benchmark(3, 3), toy_benchmark(3, 3), toy_benchmark(3, 3),
                     toy_benchmark(3, 3)};

  std::map<std::string, TrainerFn> trainers;
  trainers["oracle"] = [](const CorpusManifest&) { return oracle(); };
  trainers["anti"] = [](const CorpusManifest&) { return anti_oracle(); };

  EvalOptions opts;
  opts.loader = synthetic_loader();

  const AlignmentProbeMatrix a = alignment_probe(trainers, sets, splits, opts);
  const AlignmentProbeMatrix b = alignment_probe(trainers, sets, splits, opts);

  REQUIRE(a.models.size() == 2);
  for (const auto& model : a.models) {
    for (const auto* set_name : kProbeSetNames) {
      REQUIRE(a.cells.at(model).at(set_name).has_value());
      CHECK(a.cells.at(model).at(set_name)->pixel_test ==
            b.cells.at(model).at(set_name)->pixel_test);
    }
    CHECK(a.dilution.at(model).size() == 4);
  }
  CHECK(a.cells.at("oracle").at("pixel")->semantic_val == 1.0);
  CHECK(a.cells.at("anti").at("mixed")->pixel_test == 0.0);
}

TEST_CASE("a failing trainer leaves an absent cell and the probe continues") {
  const CorpusManifest train_set = toy_benchmark(4, 4);
  ProbeSets sets{train_set, train_set, train_set};
  ProbeSplits splits{toy_benchmark(2, 2), toy_benchmark(2, 2), toy_benchmark(2, 2),
                     toy_benchmark(2, 2)};

  std::map<std::string, TrainerFn> trainers;
  trainers["broken"] = [](const CorpusManifest&) -> Detector { throw Error("no model"); };
  trainers["oracle"] = [](const CorpusManifest&) { return oracle(); };

  EvalOptions opts;
  opts.loader = synthetic_loader();
  const AlignmentProbeMatrix m = alignment_probe(trainers, sets, splits, opts);
  CHECK_FALSE(m.cells.at("broken").at("pixel").has_value());
  CHECK(m.cells.at("oracle").at("pixel").has_value());
}

TEST_CASE("evaluation results are identical across worker counts") {
  const CorpusManifest m = toy_benchmark(20, 20, "gen-a", "gen-b");
  Detector noisy = [](const ImageRecord& r, const PixelBuffer& img) {
    return (neighbor_residual_energy(img) > 0.0016) == (r.id[0] == 'r') ? Label::Real
                                                                        : Label::Synthetic;
  };
  EvalOptions serial;
  serial.loader = synthetic_loader();
  serial.workers = 1;
  serial.group_by = GroupBy::Generator;
  EvalOptions parallel = serial;
  parallel.workers = 8;

  const auto a = evaluate_detector(noisy, m, serial);
  const auto b = evaluate_detector(noisy, m, parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sub_source == b[i].sub_source);
    CHECK(a[i].balanced_accuracy == b[i].balanced_accuracy);
    CHECK(a[i].tpr == b[i].tpr);
  }
}

TEST_CASE("reports re-emit byte-identically and cover empty inputs") {
  testutil::TempDir tmp("report");
  Report empty;
  emit_report(empty, tmp.path() / "empty");
  const std::string skeleton = slurp(tmp.path() / "empty" / "report.json");
  CHECK(skeleton.find("\"results\": []") != std::string::npos);
  CHECK(fs::exists(tmp.path() / "empty" / "results.csv"));
  CHECK(fs::exists(tmp.path() / "empty" / "curves.csv"));

  Report report;
  EvalResult r;
  r.benchmark = "bench";
  r.sub_source = "gen-a";
  r.n_real = 10;
  r.n_fake = 10;
  r.tpr = 0.9;
  r.tnr = 0.8;
  r.balanced_accuracy = 0.85;
  report.results.push_back(r);
  RobustnessCurve c;
  c.op_family = "jpeg";
  c.grid = {"identity", "60"};
  c.points = {0.9, 0.7};
  report.curves.push_back(c);
  report.metadata.config_hash = "deadbeefdeadbeef";

  emit_report(report, tmp.path() / "a");
  emit_report(report, tmp.path() / "b");
  CHECK(slurp(tmp.path() / "a" / "report.json") == slurp(tmp.path() / "b" / "report.json"));
  CHECK(slurp(tmp.path() / "a" / "curves.csv") == slurp(tmp.path() / "b" / "curves.csv"));

  const std::string curves = slurp(tmp.path() / "a" / "curves.csv");
  CHECK(curves.find("jpeg,identity,0.9") != std::string::npos);
  CHECK(curves.find("jpeg,60,0.7") != std::string::npos);
}
