#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aigikit/degrade.hpp"
#include "aigikit/types.hpp"

namespace aigikit {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line) : Error(msg), line(line) {}
  int line;
};

class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& msg, std::vector<std::string> ids = {})
      : Error(msg), ids(std::move(ids)) {}
  std::vector<std::string> ids;
};

enum class ManifestKind { PixelSupervision, SemanticSupervision, MixedSupervision, Benchmark };

std::string_view to_string(ManifestKind kind);
ManifestKind manifest_kind_from_string(std::string_view s);

struct ImageRecord {
  std::string id;
  std::string source_path;  // relative paths resolve against the manifest dir
  Label label = Label::Real;
  std::string semantic_id;  // groups a real image with its matched fake
  Subset subset = Subset::Unassigned;
  std::optional<std::string> generator;
  std::optional<DegradationSpec> degradation;

  bool missing_at_load = false;  // transient; set by load_manifest
};

/// Equality over the serialized fields (transient flags excluded).
bool operator==(const ImageRecord& a, const ImageRecord& b);

struct CorpusManifest {
  std::string name;
  std::uint64_t seed = 0;
  ManifestKind kind = ManifestKind::Benchmark;
  std::vector<ImageRecord> records;

  std::string base_dir;  // transient; directory of the file this was loaded from
};

bool operator==(const CorpusManifest& a, const CorpusManifest& b);

/// Located invariant diagnostic. Validation is total: every declared
/// invariant either passes or produces one of these.
struct Diagnostic {
  std::string record_id;  // empty when the problem is manifest-level
  std::string message;
};

std::vector<Diagnostic> validate_manifest(const CorpusManifest& manifest);

/// Throws InvariantViolation carrying the offending record ids.
void require_valid(const CorpusManifest& manifest);

/// Absolute path for a record, resolving relative paths against the
/// manifest's load directory.
std::filesystem::path resolve_source_path(const CorpusManifest& manifest,
                                          const ImageRecord& record);

/// JSONL: one header line (name, seed, kind, schema_version) then one record
/// per line. Validates invariants and flags unresolvable source paths.
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Deterministic bytes: records sorted by id, fixed field order. Refuses to
/// write a manifest that violates its invariants.
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

}  // namespace aigikit
