#include "aigikit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aigikit/image_io.hpp"
#include "aigikit/parallel.hpp"
#include "aigikit/rng.hpp"

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) { return ordered_json(v).dump(); }

PixelBuffer load_for_eval(const CorpusManifest& manifest, const ImageRecord& record,
                          const RecordImageLoader& loader) {
  if (loader) return loader(manifest, record);
  return load_image(resolve_source_path(manifest, record));
}

std::string group_key(const ImageRecord& r, GroupBy g) {
  switch (g) {
    case GroupBy::None: return "all";
    case GroupBy::Generator: return r.generator.value_or("unknown");
    case GroupBy::Subset: return std::string(to_string(r.subset));
  }
  return "all";
}

DegradationOp op_for(const std::string& family, double value, const ImageRecord& record) {
  DegradationOp op;
  if (family == "jpeg") {
    op.op = DegradationOp::Jpeg{static_cast<int>(std::lround(value))};
  } else if (family == "double_jpeg") {
    op.op = DegradationOp::DoubleJpeg{static_cast<int>(std::lround(value))};
  } else if (family == "resize") {
    op.op = DegradationOp::Resize{value, ResizeKernel::Bilinear};
  } else if (family == "double_resize") {
    op.op = DegradationOp::DoubleResize{value, ResizeKernel::Bilinear};
  } else if (family == "gaussian_blur") {
    op.op = DegradationOp::GaussianBlur{value};
  } else if (family == "gaussian_noise") {
    // Per-record noise seed, stable across runs.
    op.op = DegradationOp::GaussianNoise{value, mix_seed(fnv1a64("robustness"), record.id)};
  } else {
    throw Error("unknown robustness op family: " + family);
  }
  op.validate();
  return op;
}

struct RecordOutcome {
  bool failed = false;
  Label predicted = Label::Real;
};

std::vector<EvalResult> evaluate_with_transform(
    const Detector& detector, const CorpusManifest& manifest, const EvalOptions& options,
    const std::function<PixelBuffer(const ImageRecord&, PixelBuffer)>& transform) {
  std::vector<const ImageRecord*> records;
  for (const auto& r : manifest.records) records.push_back(&r);
  std::sort(records.begin(), records.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  std::vector<RecordOutcome> outcomes(records.size());
  std::vector<std::string> failures(records.size());

  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    const ImageRecord& r = *records[i];
    try {
      PixelBuffer img = load_for_eval(manifest, r, options.loader);
      if (transform) img = transform(r, std::move(img));
      outcomes[i].predicted = detector(r, img);
    } catch (const std::exception& e) {
      outcomes[i].failed = true;
      failures[i] = e.what();
    }
  });

  long total_failed = 0;
  for (const auto& o : outcomes) total_failed += o.failed ? 1 : 0;
  if (total_failed > options.failure_budget) {
    std::string first;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i].failed) {
        first = records[i]->id + ": " + failures[i];
        break;
      }
    }
    throw FailureBudgetExceeded("detector failed on " + std::to_string(total_failed) +
                                " records (budget " + std::to_string(options.failure_budget) +
                                "); first: " + first);
  }

  struct GroupTally {
    long real_total = 0, real_correct = 0;
    long fake_total = 0, fake_correct = 0;
    long failed = 0;
  };
  std::map<std::string, GroupTally> groups;

  // Generator grouping scores each generator's fakes against the shared
  // real pool, the way multi-generator benchmarks are reported.
  const bool shared_reals = options.group_by == GroupBy::Generator;
  if (shared_reals) {
    for (const auto* r : records) {
      if (r->label == Label::Synthetic) groups[group_key(*r, options.group_by)];
    }
    if (groups.empty()) groups["all"];
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const ImageRecord& r = *records[i];
    if (shared_reals && r.label == Label::Real) {
      for (auto& [key, g] : groups) {
        if (outcomes[i].failed) {
          ++g.failed;
          continue;
        }
        ++g.real_total;
        if (outcomes[i].predicted == Label::Real) ++g.real_correct;
      }
      continue;
    }
    GroupTally& g = groups[group_key(r, options.group_by)];
    if (outcomes[i].failed) {
      ++g.failed;  // excluded from the rate denominators
      continue;
    }
    if (r.label == Label::Real) {
      ++g.real_total;
      if (outcomes[i].predicted == Label::Real) ++g.real_correct;
    } else {
      ++g.fake_total;
      if (outcomes[i].predicted == Label::Synthetic) ++g.fake_correct;
    }
  }

  std::vector<EvalResult> results;
  for (const auto& [key, g] : groups) {  // std::map iteration: deterministic order
    if (g.real_total == 0 || g.fake_total == 0) {
      throw SingleClassInput("group '" + key + "' lacks samples of both labels");
    }
    EvalResult res;
    res.benchmark = manifest.name;
    res.sub_source = key;
    res.n_real = g.real_total;
    res.n_fake = g.fake_total;
    res.n_failed = g.failed;
    res.tnr = static_cast<double>(g.real_correct) / static_cast<double>(g.real_total);
    res.tpr = static_cast<double>(g.fake_correct) / static_cast<double>(g.fake_total);
    res.balanced_accuracy = (res.tpr + res.tnr) / 2.0;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::None: return "none";
    case GroupBy::Generator: return "generator";
    case GroupBy::Subset: return "subset";
  }
  return "none";
}

GroupBy group_by_from_string(std::string_view s) {
  if (s == "none") return GroupBy::None;
  if (s == "generator") return GroupBy::Generator;
  if (s == "subset") return GroupBy::Subset;
  throw Error("unknown group_by: " + std::string(s));
}

EvalResult balanced_accuracy(std::span<const std::pair<Label, Label>> pred_truth) {
  long real_total = 0, real_correct = 0, fake_total = 0, fake_correct = 0;
  for (const auto& [predicted, truth] : pred_truth) {
    if (truth == Label::Real) {
      ++real_total;
      if (predicted == Label::Real) ++real_correct;
    } else {
      ++fake_total;
      if (predicted == Label::Synthetic) ++fake_correct;
    }
  }
  if (real_total == 0 || fake_total == 0) {
    throw SingleClassInput("balanced accuracy needs at least one sample of each truth label");
  }
  EvalResult res;
  res.n_real = real_total;
  res.n_fake = fake_total;
  res.tnr = static_cast<double>(real_correct) / static_cast<double>(real_total);
  res.tpr = static_cast<double>(fake_correct) / static_cast<double>(fake_total);
  res.balanced_accuracy = (res.tpr + res.tnr) / 2.0;
  return res;
}

Aggregate aggregate_values(std::span<const double> values) {
  if (values.empty()) throw EmptyResults("aggregate over empty results");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());  // population convention
  return Aggregate{mean, std::sqrt(var)};
}

Aggregate aggregate(std::span<const EvalResult> results) {
  if (results.empty()) throw EmptyResults("aggregate over empty results");
  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(r.balanced_accuracy);
  return aggregate_values(values);
}

std::vector<EvalResult> evaluate_detector(const Detector& detector,
                                          const CorpusManifest& manifest,
                                          const EvalOptions& options) {
  return evaluate_with_transform(detector, manifest, options, nullptr);
}

RobustnessCurve robustness_sweep(const Detector& detector, const CorpusManifest& manifest,
                                 const std::string& op_family, std::span<const double> grid,
                                 const EvalOptions& options) {
  if (grid.empty()) throw Error("robustness grid is empty");

  EvalOptions overall = options;
  overall.group_by = GroupBy::None;

  RobustnessCurve curve;
  curve.op_family = op_family;

  // Untouched baseline first.
  curve.grid.push_back("identity");
  curve.points.push_back(evaluate_detector(detector, manifest, overall).front().balanced_accuracy);

  for (double value : grid) {
    const auto results = evaluate_with_transform(
        detector, manifest, overall, [&op_family, value](const ImageRecord& r, PixelBuffer img) {
          return apply_op(op_for(op_family, value, r), img);
        });
    curve.grid.push_back(fmt_double(value));
    curve.points.push_back(results.front().balanced_accuracy);
  }
  return curve;
}

AlignmentProbeMatrix alignment_probe(const std::map<std::string, TrainerFn>& trainers,
                                     const ProbeSets& sets, const ProbeSplits& splits,
                                     const EvalOptions& options) {
  AlignmentProbeMatrix matrix;

  EvalOptions overall = options;
  overall.group_by = GroupBy::None;

  const std::array<std::pair<std::string, const CorpusManifest*>, 3> set_list = {
      std::make_pair(std::string("pixel"), &sets.pixel),
      std::make_pair(std::string("semantic"), &sets.semantic),
      std::make_pair(std::string("mixed"), &sets.mixed),
  };

  auto eval_ba = [&](const Detector& detector, const CorpusManifest& split) {
    return evaluate_detector(detector, split, overall).front().balanced_accuracy;
  };

  for (const auto& [model_name, trainer] : trainers) {
    matrix.models.push_back(model_name);
    for (const auto& [set_name, set_manifest] : set_list) {
      std::optional<ProbeCell> cell;
      try {
        const Detector detector = trainer(*set_manifest);
        ProbeCell c;
        c.semantic_val = eval_ba(detector, splits.semantic_val);
        c.semantic_test = eval_ba(detector, splits.semantic_test);
        c.pixel_val = eval_ba(detector, splits.pixel_val);
        c.pixel_test = eval_ba(detector, splits.pixel_test);
        cell = c;
      } catch (const std::exception&) {
        // Trainer failure leaves the cell absent; the probe continues.
      }
      matrix.cells[model_name][set_name] = cell;
    }

    // Mixed-cell accuracy minus the matching pure-cell accuracy.
    const auto& row = matrix.cells[model_name];
    const auto& mixed = row.at("mixed");
    const auto& pure_pixel = row.at("pixel");
    const auto& pure_semantic = row.at("semantic");
    if (mixed && pure_semantic) {
      matrix.dilution[model_name]["semantic_val"] =
          mixed->semantic_val - pure_semantic->semantic_val;
      matrix.dilution[model_name]["semantic_test"] =
          mixed->semantic_test - pure_semantic->semantic_test;
    }
    if (mixed && pure_pixel) {
      matrix.dilution[model_name]["pixel_val"] = mixed->pixel_val - pure_pixel->pixel_val;
      matrix.dilution[model_name]["pixel_test"] = mixed->pixel_test - pure_pixel->pixel_test;
    }
  }
  return matrix;
}

void emit_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  ordered_json j;
  j["results"] = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json e;
    e["benchmark"] = r.benchmark;
    e["sub_source"] = r.sub_source;
    e["n_real"] = r.n_real;
    e["n_fake"] = r.n_fake;
    e["n_failed"] = r.n_failed;
    e["tpr"] = r.tpr;
    e["tnr"] = r.tnr;
    e["balanced_accuracy"] = r.balanced_accuracy;
    j["results"].push_back(std::move(e));
  }

  j["curves"] = ordered_json::array();
  for (const auto& c : report.curves) {
    ordered_json e;
    e["op_family"] = c.op_family;
    e["grid"] = c.grid;
    e["points"] = c.points;
    j["curves"].push_back(std::move(e));
  }

  if (report.probe) {
    ordered_json p;
    p["models"] = report.probe->models;
    p["sets"] = ordered_json::array({"pixel", "semantic", "mixed"});
    p["cells"] = ordered_json::object();
    for (const auto& [model, row] : report.probe->cells) {
      ordered_json jrow = ordered_json::object();
      for (const auto& [set_name, cell] : row) {
        if (cell) {
          jrow[set_name] = {{"semantic_val", cell->semantic_val},
                            {"semantic_test", cell->semantic_test},
                            {"pixel_val", cell->pixel_val},
                            {"pixel_test", cell->pixel_test}};
        } else {
          jrow[set_name] = nullptr;
        }
      }
      p["cells"][model] = std::move(jrow);
    }
    p["dilution"] = ordered_json::object();
    for (const auto& [model, row] : report.probe->dilution) {
      p["dilution"][model] = row;
    }
    j["probe_matrix"] = std::move(p);
  } else {
    j["probe_matrix"] = nullptr;
  }

  j["metadata"] = {{"std_convention", report.metadata.std_convention},
                   {"seed", report.metadata.seed},
                   {"config_hash", report.metadata.config_hash}};

  {
    std::ofstream f(dir / "report.json", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write report.json under " + dir.string());
    const std::string bytes = j.dump(2) + "\n";
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  {
    std::ostringstream csv;
    csv << "benchmark,sub_source,n_real,n_fake,n_failed,tpr,tnr,balanced_accuracy\n";
    for (const auto& r : report.results) {
      csv << r.benchmark << ',' << r.sub_source << ',' << r.n_real << ',' << r.n_fake << ','
          << r.n_failed << ',' << fmt_double(r.tpr) << ',' << fmt_double(r.tnr) << ','
          << fmt_double(r.balanced_accuracy) << '\n';
    }
    std::ofstream f(dir / "results.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write results.csv under " + dir.string());
    const std::string bytes = csv.str();
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  {
    std::ostringstream csv;
    csv << "op_family,grid,balanced_accuracy\n";
    for (const auto& c : report.curves) {
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        csv << c.op_family << ',' << c.grid[i] << ',' << fmt_double(c.points[i]) << '\n';
      }
    }
    std::ofstream f(dir / "curves.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write curves.csv under " + dir.string());
    const std::string bytes = csv.str();
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace aigikit
