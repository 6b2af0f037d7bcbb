#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aigikit/corpus.hpp"
#include "aigikit/manifest.hpp"
#include "aigikit/types.hpp"

namespace aigikit {

class SingleClassInput : public Error {
 public:
  using Error::Error;
};

class EmptyResults : public Error {
 public:
  using Error::Error;
};

class FailureBudgetExceeded : public Error {
 public:
  using Error::Error;
};

struct EvalResult {
  std::string benchmark;
  std::string sub_source;
  long n_real = 0;
  long n_fake = 0;
  long n_failed = 0;  // detector failures, excluded from the rates
  double tpr = 0.0;   // fake recall
  double tnr = 0.0;   // real recall
  double balanced_accuracy = 0.0;  // (tpr + tnr) / 2
};

/// Rates from (predicted, truth) decisions. Needs at least one sample of
/// each truth label.
EvalResult balanced_accuracy(std::span<const std::pair<Label, Label>> pred_truth);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population convention
};

Aggregate aggregate(std::span<const EvalResult> results);
Aggregate aggregate_values(std::span<const double> values);

/// A detector decides on one record given its (possibly degraded) pixels.
/// Throwing counts as a detector failure.
using Detector = std::function<Label(const ImageRecord& record, const PixelBuffer& img)>;

enum class GroupBy { None, Generator, Subset };

std::string_view to_string(GroupBy g);
GroupBy group_by_from_string(std::string_view s);

struct EvalOptions {
  GroupBy group_by = GroupBy::None;
  long failure_budget = 0;  // failures beyond this propagate
  RecordImageLoader loader;  // defaults to file loading
  int workers = 0;
};

/// One EvalResult per group value, ordered by group name. Failures are
/// counted per group and never enter the rate denominators.
std::vector<EvalResult> evaluate_detector(const Detector& detector,
                                          const CorpusManifest& manifest,
                                          const EvalOptions& options = {});

struct RobustnessCurve {
  std::string op_family;
  std::vector<std::string> grid;  // "identity" first, then parameter values
  std::vector<double> points;     // balanced accuracy per grid entry
};

/// Applies the op family at each grid value to every image (real and fake)
/// and re-evaluates. The untouched baseline is always the first grid point.
RobustnessCurve robustness_sweep(const Detector& detector, const CorpusManifest& manifest,
                                 const std::string& op_family, std::span<const double> grid,
                                 const EvalOptions& options = {});

struct ProbeCell {
  double semantic_val = 0.0;
  double semantic_test = 0.0;
  double pixel_val = 0.0;
  double pixel_test = 0.0;
};

inline constexpr const char* kProbeSetNames[] = {"pixel", "semantic", "mixed"};
inline constexpr const char* kProbeSplitNames[] = {"semantic_val", "semantic_test", "pixel_val",
                                                   "pixel_test"};

struct AlignmentProbeMatrix {
  std::vector<std::string> models;
  // cells[model][set]; a trainer failure leaves the cell absent.
  std::map<std::string, std::map<std::string, std::optional<ProbeCell>>> cells;
  // dilution[model][split] = mixed-trained accuracy minus the matching
  // pure-trained accuracy (pixel-trained for pixel splits, semantic-trained
  // for semantic splits).
  std::map<std::string, std::map<std::string, double>> dilution;
};

using TrainerFn = std::function<Detector(const CorpusManifest& training_set)>;

struct ProbeSets {
  CorpusManifest pixel;
  CorpusManifest semantic;
  CorpusManifest mixed;
};

struct ProbeSplits {
  CorpusManifest semantic_val;
  CorpusManifest semantic_test;
  CorpusManifest pixel_val;
  CorpusManifest pixel_test;
};

/// Trains every model on every supervision set and evaluates each on the
/// four fixed splits. Trainer failures leave absent cells; the probe
/// continues.
AlignmentProbeMatrix alignment_probe(const std::map<std::string, TrainerFn>& trainers,
                                     const ProbeSets& sets, const ProbeSplits& splits,
                                     const EvalOptions& options = {});

struct ReportMetadata {
  std::string std_convention = "population";
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Report {
  std::vector<EvalResult> results;
  std::vector<RobustnessCurve> curves;
  std::optional<AlignmentProbeMatrix> probe;
  ReportMetadata metadata;
};

/// Writes report.json plus results.csv / curves.csv mirrors into `dir`.
/// Byte-deterministic; empty inputs produce a valid empty skeleton.
void emit_report(const Report& report, const std::filesystem::path& dir);

}  // namespace aigikit
