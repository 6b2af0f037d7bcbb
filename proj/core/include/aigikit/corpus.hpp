#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aigikit/degrade.hpp"
#include "aigikit/manifest.hpp"
#include "aigikit/types.hpp"

namespace aigikit {

class ReconstructionFailure : public Error {
 public:
  using Error::Error;
};

class UnknownPairTarget : public Error {
 public:
  using Error::Error;
};

class UnmatchedCaption : public Error {
 public:
  using Error::Error;
};

// Fixed verdict prefixes, byte-exact including the trailing period.
inline constexpr std::string_view kSyntheticPrefix = "This is an AI-generated image.";
inline constexpr std::string_view kRealPrefix = "This is an authentic image.";

// Canonical detection prompt used for every exported preference pair.
inline constexpr std::string_view kDetectionPrompt =
    "Is this image AI-generated or authentic? Answer and explain.";

/// Surrogate for a generator autoencoder round trip: preserves content,
/// rewrites pixel statistics. Output dims always equal input dims.
class Reconstructor {
 public:
  virtual ~Reconstructor() = default;
  virtual PixelBuffer reconstruct(const PixelBuffer& img) const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic stand-in reconstructor: DoubleResize(1 - 0.5*strength,
/// bicubic) followed by Jpeg(round(98 - 30*strength)).
class PseudoReconstructor : public Reconstructor {
 public:
  explicit PseudoReconstructor(double strength);

  PixelBuffer reconstruct(const PixelBuffer& img) const override;
  std::string name() const override;

  double resize_scale() const { return 1.0 - 0.5 * strength_; }
  int jpeg_quality() const;

 private:
  double strength_;
};

PixelBuffer pseudo_reconstruct(const PixelBuffer& img, double strength);

struct PreferencePair {
  std::string image_id;
  std::string image_path;
  std::string prompt;
  std::string chosen;
  std::string rejected;
};

/// Responder hook for eliciting continuations under a verdict prefix.
/// Returns std::nullopt to signal failure; the pair is then skipped.
using DpoResponder =
    std::function<std::optional<std::string>(const ImageRecord& record, const std::string& prompt)>;

struct DpoBuildResult {
  std::vector<PreferencePair> pairs;
  int skipped = 0;
};

/// Loads an image for a record; defaults to decoding record.source_path
/// resolved against the manifest directory.
using RecordImageLoader =
    std::function<PixelBuffer(const CorpusManifest& manifest, const ImageRecord& record)>;

RecordImageLoader default_record_loader();

struct BuildOptions {
  std::string name;       // manifest name
  std::uint64_t seed = 0;
  int workers = 0;        // 0 = hardware concurrency
  RecordImageLoader loader;  // defaults to file loading
};

/// Seeded, reproducible subsample: shuffles records sorted by id with a
/// sub-seed derived from (seed, tag) and keeps the first `count` (all when
/// count <= 0 or count >= size).
std::vector<ImageRecord> seeded_sample(std::vector<ImageRecord> records, int count,
                                       std::uint64_t seed, std::string_view tag);

/// Pixel-artifact supervision: every real is paired with its reconstruction,
/// written as lossless PNG. No degradation on either side; 1:1 label balance;
/// synthetic.semantic_id = real.id.
CorpusManifest build_pixel_set(const std::vector<ImageRecord>& reals, const Reconstructor& recon,
                               const std::filesystem::path& out_dir,
                               const BuildOptions& options = {});

/// Semantic supervision: records receive randomized heavy degradation with
/// sub-seeds derived from (seed, semantic_id-or-id). With `pairing`
/// (fake_id -> real_id), paired records share one byte-identical spec;
/// without it every record is degraded independently (unpaired corpora).
CorpusManifest build_semantic_set(const std::vector<ImageRecord>& reals,
                                  const std::vector<ImageRecord>& fakes,
                                  const std::optional<std::map<std::string, std::string>>& pairing,
                                  const PipelineProfile& profile,
                                  const std::filesystem::path& out_dir,
                                  const BuildOptions& options = {});

/// One preference pair per record: chosen under the ground-truth prefix,
/// rejected under the opposite prefix. With no responder the responses are
/// the bare prefixes.
DpoBuildResult build_dpo_pairs(const CorpusManifest& manifest,
                               const DpoResponder& responder = nullptr,
                               const std::string& prompt = std::string(kDetectionPrompt));

/// JSONL with keys {image, prompt, chosen, rejected}, ordered by image_id,
/// byte-deterministic.
void export_dpo_jsonl(const std::vector<PreferencePair>& pairs,
                      const std::filesystem::path& path);

/// Parses an exported file back (image_id is not part of the wire format and
/// stays empty).
std::vector<PreferencePair> import_dpo_jsonl(const std::filesystem::path& path);

struct CaptionEntry {
  std::string caption;
  std::string surreal_caption;
};

using CaptionTable = std::map<std::string, CaptionEntry>;  // real image_id -> captions

/// JSONL ({"image_id","caption","surreal_caption"}) or CSV with the same
/// columns, chosen by extension.
CaptionTable load_captions(const std::filesystem::path& path);

/// Stable 16-hex-digit id for a caption; the semantic_id of caption-matched
/// benchmark pairs.
std::string caption_hash(std::string_view caption);

struct AigiNowResult {
  CorpusManifest pixel_subset;     // reals + faithful fakes, no degradation
  CorpusManifest semantic_subset;  // reals + surreal fakes, shared per-pair degradation
};

/// Benchmark assembly: fakes must carry generator and semantic_id equal to
/// the hash of the caption (faithful) or surreal caption (surreal) of some
/// real. per_generator_cap > 0 keeps a seeded subsample per generator.
AigiNowResult build_aigi_now(const std::vector<ImageRecord>& reals, const CaptionTable& captions,
                             const std::vector<ImageRecord>& faithful_fakes,
                             const std::vector<ImageRecord>& surreal_fakes,
                             const PipelineProfile& profile, const std::filesystem::path& out_dir,
                             const BuildOptions& options = {}, int per_generator_cap = 0);

/// Orthogonality audit over a built corpus. PixelSupervision: no record may
/// carry a degradation spec and paired images must differ. SemanticSupervision:
/// every record carries a spec and paired specs are byte-identical.
std::vector<Diagnostic> audit_orthogonality(const CorpusManifest& manifest,
                                            const RecordImageLoader& loader = {});

}  // namespace aigikit
