#include "aigikit/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

ordered_json record_to_json(const ImageRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["source_path"] = r.source_path;
  j["label"] = std::string(to_string(r.label));
  j["semantic_id"] = r.semantic_id;
  j["subset"] = std::string(to_string(r.subset));
  if (r.generator) {
    j["generator"] = *r.generator;
  } else {
    j["generator"] = nullptr;
  }
  if (r.degradation) {
    j["degradation"] = ordered_json::parse(spec_to_json(*r.degradation));
  } else {
    j["degradation"] = nullptr;
  }
  return j;
}

ImageRecord record_from_json(const ordered_json& j) {
  ImageRecord r;
  r.id = j.at("id").get<std::string>();
  r.source_path = j.at("source_path").get<std::string>();
  r.label = label_from_string(j.at("label").get<std::string>());
  r.semantic_id = j.at("semantic_id").get<std::string>();
  r.subset = subset_from_string(j.at("subset").get<std::string>());
  if (j.contains("generator") && !j.at("generator").is_null()) {
    r.generator = j.at("generator").get<std::string>();
  }
  if (j.contains("degradation") && !j.at("degradation").is_null()) {
    r.degradation = spec_from_json(j.at("degradation").dump());
  }
  return r;
}

}  // namespace

std::string_view to_string(ManifestKind kind) {
  switch (kind) {
    case ManifestKind::PixelSupervision: return "pixel_supervision";
    case ManifestKind::SemanticSupervision: return "semantic_supervision";
    case ManifestKind::MixedSupervision: return "mixed_supervision";
    case ManifestKind::Benchmark: return "benchmark";
  }
  return "benchmark";
}

ManifestKind manifest_kind_from_string(std::string_view s) {
  if (s == "pixel_supervision") return ManifestKind::PixelSupervision;
  if (s == "semantic_supervision") return ManifestKind::SemanticSupervision;
  if (s == "mixed_supervision") return ManifestKind::MixedSupervision;
  if (s == "benchmark") return ManifestKind::Benchmark;
  throw Error("unknown manifest kind: " + std::string(s));
}

bool operator==(const ImageRecord& a, const ImageRecord& b) {
  return record_to_json(a) == record_to_json(b);
}

bool operator==(const CorpusManifest& a, const CorpusManifest& b) {
  if (a.name != b.name || a.seed != b.seed || a.kind != b.kind ||
      a.records.size() != b.records.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (!(a.records[i] == b.records[i])) return false;
  }
  return true;
}

std::vector<Diagnostic> validate_manifest(const CorpusManifest& manifest) {
  std::vector<Diagnostic> out;

  std::set<std::string> seen;
  for (const auto& r : manifest.records) {
    if (r.id.empty()) out.push_back({r.id, "record with empty id"});
    if (!seen.insert(r.id).second) {
      out.push_back({r.id, "duplicate record id"});
    }
  }

  if (manifest.kind == ManifestKind::PixelSupervision) {
    // Pairing must be a bijection on synthetic records.
    std::map<std::string, int> real_by_sid;
    for (const auto& r : manifest.records) {
      if (r.label == Label::Real) real_by_sid[r.semantic_id]++;
    }
    std::map<std::string, int> syn_by_sid;
    for (const auto& r : manifest.records) {
      if (r.label != Label::Synthetic) continue;
      syn_by_sid[r.semantic_id]++;
      const auto it = real_by_sid.find(r.semantic_id);
      if (it == real_by_sid.end()) {
        out.push_back({r.id, "synthetic record pairs with no real record (semantic_id=" +
                                 r.semantic_id + ")"});
      } else if (it->second > 1) {
        out.push_back({r.id, "synthetic record pairs with " + std::to_string(it->second) +
                                 " real records (semantic_id=" + r.semantic_id + ")"});
      }
    }
    for (const auto& [sid, n] : syn_by_sid) {
      if (n > 1) {
        out.push_back({"", "semantic_id " + sid + " shared by " + std::to_string(n) +
                               " synthetic records"});
      }
    }
  }

  if (manifest.kind == ManifestKind::SemanticSupervision) {
    // Paired records (same semantic_id on both labels) must carry
    // byte-identical degradation specs.
    std::map<std::string, std::string> real_spec, fake_spec;
    std::map<std::string, std::string> real_id, fake_id;
    for (const auto& r : manifest.records) {
      const std::string spec = r.degradation ? spec_to_json(*r.degradation) : std::string();
      if (r.label == Label::Real) {
        real_spec[r.semantic_id] = spec;
        real_id[r.semantic_id] = r.id;
      } else {
        fake_spec[r.semantic_id] = spec;
        fake_id[r.semantic_id] = r.id;
      }
    }
    for (const auto& [sid, spec] : real_spec) {
      auto it = fake_spec.find(sid);
      if (it != fake_spec.end() && it->second != spec) {
        out.push_back({fake_id[sid], "paired records disagree on degradation spec (semantic_id=" +
                                         sid + ", real=" + real_id[sid] + ")"});
      }
    }
  }

  return out;
}

void require_valid(const CorpusManifest& manifest) {
  const auto diags = validate_manifest(manifest);
  if (diags.empty()) return;
  std::vector<std::string> ids;
  std::string msg = "manifest invariant violations:";
  for (const auto& d : diags) {
    ids.push_back(d.record_id);
    msg += "\n  [" + d.record_id + "] " + d.message;
  }
  throw InvariantViolation(msg, std::move(ids));
}

std::filesystem::path resolve_source_path(const CorpusManifest& manifest,
                                          const ImageRecord& record) {
  std::filesystem::path p(record.source_path);
  if (p.is_absolute() || manifest.base_dir.empty()) return p;
  return std::filesystem::path(manifest.base_dir) / p;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  CorpusManifest manifest;
  manifest.base_dir = path.has_parent_path() ? path.parent_path().string() : std::string(".");

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("manifest parse error at line " + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
    try {
      if (!header_seen) {
        manifest.name = j.at("name").get<std::string>();
        manifest.seed = j.at("seed").get<std::uint64_t>();
        manifest.kind = manifest_kind_from_string(j.at("kind").get<std::string>());
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
          throw Error("unsupported schema_version");
        }
        header_seen = true;
      } else {
        manifest.records.push_back(record_from_json(j));
      }
    } catch (const InvariantViolation&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("manifest parse error at line " + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
  }
  if (!header_seen && line_no > 0) {
    throw ParseError("manifest has content but no header line", 1);
  }

  // Flag unresolvable source paths; validation stays total.
  for (auto& r : manifest.records) {
    std::error_code ec;
    r.missing_at_load = !std::filesystem::exists(resolve_source_path(manifest, r), ec);
  }

  require_valid(manifest);
  return manifest;
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  require_valid(manifest);

  std::vector<const ImageRecord*> sorted;
  sorted.reserve(manifest.records.size());
  for (const auto& r : manifest.records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  ordered_json header;
  header["name"] = manifest.name;
  header["seed"] = manifest.seed;
  header["kind"] = std::string(to_string(manifest.kind));
  header["schema_version"] = kSchemaVersion;

  std::ostringstream out;
  out << header.dump() << '\n';
  for (const ImageRecord* r : sorted) {
    out << record_to_json(*r).dump() << '\n';
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open manifest for writing: " + path.string());
  const std::string bytes = out.str();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("manifest write failed: " + path.string());
}

}  // namespace aigikit
