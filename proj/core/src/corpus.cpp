#include "aigikit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aigikit/image_io.hpp"
#include "aigikit/parallel.hpp"
#include "aigikit/rng.hpp"

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

PixelBuffer load_record_image(const CorpusManifest& manifest, const ImageRecord& record,
                              const RecordImageLoader& loader) {
  if (loader) return loader(manifest, record);
  return load_image(resolve_source_path(manifest, record));
}

std::vector<ImageRecord> sorted_by_id(std::vector<ImageRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  return records;
}

void require_label(const std::vector<ImageRecord>& records, Label expected, const char* what) {
  for (const auto& r : records) {
    if (r.label != expected) {
      throw Error(std::string(what) + " record " + r.id + " is not labeled " +
                  std::string(to_string(expected)));
    }
  }
}

// Minimal quoted-field CSV line splitter.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

RecordImageLoader default_record_loader() {
  return [](const CorpusManifest& m, const ImageRecord& r) {
    return load_image(resolve_source_path(m, r));
  };
}

PseudoReconstructor::PseudoReconstructor(double strength) : strength_(strength) {
  if (!(strength > 0.0) || strength > 1.0) {
    throw Error("pseudo reconstructor strength must be in (0,1]");
  }
}

int PseudoReconstructor::jpeg_quality() const {
  return static_cast<int>(std::lround(98.0 - 30.0 * strength_));
}

PixelBuffer PseudoReconstructor::reconstruct(const PixelBuffer& img) const {
  const PixelBuffer smoothed = double_resize(img, resize_scale(), ResizeKernel::Bicubic);
  return jpeg_compress(smoothed, jpeg_quality());
}

std::string PseudoReconstructor::name() const {
  std::ostringstream s;
  s << "pseudo-recon-" << strength_;
  return s.str();
}

PixelBuffer pseudo_reconstruct(const PixelBuffer& img, double strength) {
  return PseudoReconstructor(strength).reconstruct(img);
}

std::vector<ImageRecord> seeded_sample(std::vector<ImageRecord> records, int count,
                                       std::uint64_t seed, std::string_view tag) {
  records = sorted_by_id(std::move(records));
  if (count <= 0 || static_cast<std::size_t>(count) >= records.size()) return records;
  SplitMix64 rng(mix_seed(seed, tag));
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(i, static_cast<std::int64_t>(records.size()) - 1));
    std::swap(records[static_cast<std::size_t>(i)], records[j]);
  }
  records.resize(static_cast<std::size_t>(count));
  return sorted_by_id(std::move(records));
}

CorpusManifest build_pixel_set(const std::vector<ImageRecord>& reals, const Reconstructor& recon,
                               const std::filesystem::path& out_dir,
                               const BuildOptions& options) {
  require_label(reals, Label::Real, "pixel set real");

  CorpusManifest manifest;
  manifest.name = options.name.empty() ? "pixel" : options.name;
  manifest.seed = options.seed;
  manifest.kind = ManifestKind::PixelSupervision;
  manifest.base_dir = out_dir.string();

  const auto inputs = sorted_by_id(reals);
  std::filesystem::create_directories(out_dir / "images");

  std::vector<ImageRecord> real_records(inputs.size());
  std::vector<ImageRecord> fake_records(inputs.size());

  parallel_for(inputs.size(), options.workers, [&](std::size_t i) {
    const ImageRecord& src = inputs[i];
    PixelBuffer img;
    PixelBuffer reconstructed;
    try {
      img = load_record_image(manifest, src, options.loader);
      reconstructed = recon.reconstruct(img);
    } catch (const std::exception& e) {
      throw ReconstructionFailure("reconstruction failed for " + src.id + ": " + e.what());
    }
    if (!reconstructed.same_dims(img)) {
      throw ReconstructionFailure("reconstructor changed dimensions for " + src.id);
    }

    // Lossless container so no extra compression artifacts leak in.
    const std::string rel = "images/" + src.id + "_recon.png";
    save_png(reconstructed, out_dir / rel);

    ImageRecord real = src;
    real.semantic_id = src.id;
    real.subset = Subset::PixelSet;
    real.degradation.reset();

    ImageRecord fake;
    fake.id = src.id + "_recon";
    fake.source_path = rel;
    fake.label = Label::Synthetic;
    fake.semantic_id = src.id;
    fake.subset = Subset::PixelSet;
    fake.generator = recon.name();

    real_records[i] = std::move(real);
    fake_records[i] = std::move(fake);
  });

  manifest.records.reserve(2 * inputs.size());
  for (auto& r : real_records) manifest.records.push_back(std::move(r));
  for (auto& r : fake_records) manifest.records.push_back(std::move(r));
  require_valid(manifest);
  return manifest;
}

CorpusManifest build_semantic_set(const std::vector<ImageRecord>& reals,
                                  const std::vector<ImageRecord>& fakes,
                                  const std::optional<std::map<std::string, std::string>>& pairing,
                                  const PipelineProfile& profile,
                                  const std::filesystem::path& out_dir,
                                  const BuildOptions& options) {
  require_label(reals, Label::Real, "semantic set real");
  require_label(fakes, Label::Synthetic, "semantic set fake");
  profile.validate();

  CorpusManifest manifest;
  manifest.name = options.name.empty() ? "semantic" : options.name;
  manifest.seed = options.seed;
  manifest.kind = ManifestKind::SemanticSupervision;
  manifest.base_dir = out_dir.string();

  auto all = sorted_by_id(reals);
  {
    auto f = sorted_by_id(fakes);
    all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
  }

  // Resolve each record's pair group, then derive one sub-seed per group so
  // paired records share a byte-identical spec.
  if (pairing) {
    std::map<std::string, const ImageRecord*> real_by_id;
    for (const auto& r : all) {
      if (r.label == Label::Real) real_by_id[r.id] = &r;
    }
    std::map<std::string, std::string> group_of;  // record id -> group key
    for (const auto& [fake_id, real_id] : *pairing) {
      const auto it = real_by_id.find(real_id);
      if (it == real_by_id.end()) {
        throw UnknownPairTarget("pairing for " + fake_id + " names unknown real " + real_id);
      }
      const std::string group =
          it->second->semantic_id.empty() ? it->second->id : it->second->semantic_id;
      group_of[fake_id] = group;
      group_of[real_id] = group;
    }
    for (auto& r : all) {
      const auto it = group_of.find(r.id);
      r.semantic_id = it != group_of.end() ? it->second : r.id;
    }
  } else {
    for (auto& r : all) r.semantic_id = r.id;  // unpaired: per-record specs
  }

  std::filesystem::create_directories(out_dir / "images");

  std::vector<ImageRecord> out_records(all.size());
  parallel_for(all.size(), options.workers, [&](std::size_t i) {
    const ImageRecord& src = all[i];
    const std::uint64_t sub_seed = mix_seed(options.seed, "pair/" + src.semantic_id);
    const DegradationSpec spec = sample_heavy_pipeline(sub_seed, profile);

    const PixelBuffer img = load_record_image(manifest, src, options.loader);
    const PixelBuffer degraded = apply_spec(spec, img);
    const std::string rel = "images/" + src.id + ".png";
    save_png(degraded, out_dir / rel);

    ImageRecord rec = src;
    rec.source_path = rel;
    rec.subset = Subset::SemanticSet;
    rec.degradation = spec;
    out_records[i] = std::move(rec);
  });

  manifest.records = std::move(out_records);
  require_valid(manifest);
  return manifest;
}

DpoBuildResult build_dpo_pairs(const CorpusManifest& manifest, const DpoResponder& responder,
                               const std::string& prompt) {
  if (manifest.kind != ManifestKind::SemanticSupervision) {
    throw Error("DPO pairs are built from a semantic_supervision manifest");
  }

  DpoBuildResult result;
  std::vector<const ImageRecord*> sorted;
  for (const auto& r : manifest.records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->id < b->id; });

  for (const ImageRecord* r : sorted) {
    const bool is_fake = r->label == Label::Synthetic;
    const std::string correct(is_fake ? kSyntheticPrefix : kRealPrefix);
    const std::string wrong(is_fake ? kRealPrefix : kSyntheticPrefix);

    std::string chosen = correct;
    std::string rejected = wrong;
    if (responder) {
      // Continuations are elicited under each prefix.
      const auto chosen_cont = responder(*r, prompt + "\n" + correct);
      const auto rejected_cont = responder(*r, prompt + "\n" + wrong);
      if (!chosen_cont || !rejected_cont) {
        ++result.skipped;
        continue;
      }
      if (!chosen_cont->empty()) chosen += " " + *chosen_cont;
      if (!rejected_cont->empty()) rejected += " " + *rejected_cont;
    }

    PreferencePair pair;
    pair.image_id = r->id;
    pair.image_path = resolve_source_path(manifest, *r).string();
    pair.prompt = prompt;
    pair.chosen = std::move(chosen);
    pair.rejected = std::move(rejected);
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

void export_dpo_jsonl(const std::vector<PreferencePair>& pairs,
                      const std::filesystem::path& path) {
  std::vector<const PreferencePair*> sorted;
  for (const auto& p : pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const PreferencePair* a, const PreferencePair* b) {
              return a->image_id < b->image_id;
            });

  std::ostringstream out;
  for (const PreferencePair* p : sorted) {
    ordered_json j;
    j["image"] = p->image_path;
    j["prompt"] = p->prompt;
    j["chosen"] = p->chosen;
    j["rejected"] = p->rejected;
    out << j.dump() << '\n';
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open DPO export for writing: " + path.string());
  const std::string bytes = out.str();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("DPO export write failed: " + path.string());
}

std::vector<PreferencePair> import_dpo_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open DPO export: " + path.string());
  std::vector<PreferencePair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      PreferencePair p;
      p.image_path = j.at("image").get<std::string>();
      p.prompt = j.at("prompt").get<std::string>();
      p.chosen = j.at("chosen").get<std::string>();
      p.rejected = j.at("rejected").get<std::string>();
      pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ParseError("DPO export parse error at line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
  }
  return pairs;
}

std::string caption_hash(std::string_view caption) { return hex16(fnv1a64(caption)); }

CaptionTable load_captions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open caption table: " + path.string());
  CaptionTable table;
  std::string line;
  int line_no = 0;

  if (path.extension() == ".csv") {
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto fields = split_csv_line(line);
      if (header.empty()) {
        header = fields;
        continue;
      }
      if (fields.size() < 3) {
        throw ParseError("caption CSV needs 3 columns at line " + std::to_string(line_no),
                         line_no);
      }
      table[fields[0]] = CaptionEntry{fields[1], fields[2]};
    }
    return table;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      table[j.at("image_id").get<std::string>()] =
          CaptionEntry{j.at("caption").get<std::string>(),
                       j.at("surreal_caption").get<std::string>()};
    } catch (const std::exception& e) {
      throw ParseError("caption table parse error at line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
  }
  return table;
}

AigiNowResult build_aigi_now(const std::vector<ImageRecord>& reals, const CaptionTable& captions,
                             const std::vector<ImageRecord>& faithful_fakes,
                             const std::vector<ImageRecord>& surreal_fakes,
                             const PipelineProfile& profile, const std::filesystem::path& out_dir,
                             const BuildOptions& options, int per_generator_cap) {
  require_label(reals, Label::Real, "benchmark real");
  require_label(faithful_fakes, Label::Synthetic, "faithful fake");
  require_label(surreal_fakes, Label::Synthetic, "surreal fake");
  profile.validate();

  {
    std::set<std::string> faithful_ids, overlap;
    for (const auto& f : faithful_fakes) faithful_ids.insert(f.id);
    for (const auto& s : surreal_fakes) {
      if (faithful_ids.count(s.id)) overlap.insert(s.id);
    }
    if (!overlap.empty()) {
      throw InvariantViolation("fake ids appear in both benchmark subsets",
                               {overlap.begin(), overlap.end()});
    }
  }

  // Caption hashes anchor the pairing: faithful fakes match on the original
  // caption, surreal fakes on the surreal variant.
  std::map<std::string, const ImageRecord*> real_by_faithful_hash;
  std::map<std::string, const ImageRecord*> real_by_surreal_hash;
  std::map<std::string, const ImageRecord*> real_by_id;
  for (const auto& r : reals) real_by_id[r.id] = &r;
  for (const auto& [id, entry] : captions) {
    const auto it = real_by_id.find(id);
    if (it == real_by_id.end()) continue;
    real_by_faithful_hash[caption_hash(entry.caption)] = it->second;
    real_by_surreal_hash[caption_hash(entry.surreal_caption)] = it->second;
  }

  auto match = [](const std::map<std::string, const ImageRecord*>& table,
                  const ImageRecord& fake) -> const ImageRecord* {
    const auto it = table.find(fake.semantic_id);
    if (it == table.end()) {
      throw UnmatchedCaption("fake " + fake.id + " has semantic_id " + fake.semantic_id +
                             " matching no real caption hash");
    }
    return it->second;
  };

  auto select_per_generator = [&](std::vector<ImageRecord> fakes,
                                  std::string_view tag) -> std::vector<ImageRecord> {
    if (per_generator_cap <= 0) return sorted_by_id(std::move(fakes));
    std::map<std::string, std::vector<ImageRecord>> by_gen;
    for (auto& f : fakes) by_gen[f.generator.value_or("")].push_back(std::move(f));
    std::vector<ImageRecord> kept;
    for (auto& [gen, group] : by_gen) {
      auto chosen = seeded_sample(std::move(group), per_generator_cap, options.seed,
                                  std::string(tag) + "/" + gen);
      kept.insert(kept.end(), std::make_move_iterator(chosen.begin()),
                  std::make_move_iterator(chosen.end()));
    }
    return sorted_by_id(std::move(kept));
  };

  const auto faithful = select_per_generator(faithful_fakes, "aigi-now/faithful");
  const auto surreal = select_per_generator(surreal_fakes, "aigi-now/surreal");

  AigiNowResult result;

  // Pixel subset: reals + faithful fakes, untouched.
  {
    CorpusManifest& m = result.pixel_subset;
    m.name = (options.name.empty() ? std::string("aigi-now") : options.name) + "-pixel";
    m.seed = options.seed;
    m.kind = ManifestKind::Benchmark;
    m.base_dir = out_dir.string();

    std::set<std::string> used_real_ids;
    std::vector<ImageRecord> rec_fakes;
    for (const auto& f : faithful) {
      const ImageRecord* real = match(real_by_faithful_hash, f);
      ImageRecord fake = f;
      fake.subset = Subset::PixelSet;
      fake.degradation.reset();
      rec_fakes.push_back(std::move(fake));
      used_real_ids.insert(real->id);
    }
    for (const auto& id : used_real_ids) {
      ImageRecord real = *real_by_id.at(id);
      real.semantic_id = caption_hash(captions.at(id).caption);
      real.subset = Subset::PixelSet;
      real.degradation.reset();
      m.records.push_back(std::move(real));
    }
    for (auto& f : rec_fakes) m.records.push_back(std::move(f));
    require_valid(m);
  }

  // Semantic subset: reals + surreal fakes, shared per-pair degradation.
  {
    CorpusManifest& m = result.semantic_subset;
    m.name = (options.name.empty() ? std::string("aigi-now") : options.name) + "-semantic";
    m.seed = options.seed;
    m.kind = ManifestKind::Benchmark;
    m.base_dir = out_dir.string();

    std::filesystem::create_directories(out_dir / "semantic");

    std::set<std::string> used_real_ids;
    for (const auto& f : surreal) {
      used_real_ids.insert(match(real_by_surreal_hash, f)->id);
    }

    struct Job {
      ImageRecord rec;
      DegradationSpec spec;
      const CorpusManifest* source = nullptr;  // manifest context for loading
    };
    std::vector<Job> jobs;
    CorpusManifest input_ctx;  // empty base_dir: input paths resolve as written
    for (const auto& id : used_real_ids) {
      Job job;
      job.rec = *real_by_id.at(id);
      job.rec.semantic_id = caption_hash(captions.at(id).surreal_caption);
      job.spec = sample_heavy_pipeline(mix_seed(options.seed, "pair/" + job.rec.semantic_id),
                                       profile);
      jobs.push_back(std::move(job));
    }
    for (const auto& f : surreal) {
      Job job;
      job.rec = f;
      job.spec =
          sample_heavy_pipeline(mix_seed(options.seed, "pair/" + f.semantic_id), profile);
      jobs.push_back(std::move(job));
    }

    std::vector<ImageRecord> out_records(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
      const Job& job = jobs[i];
      const PixelBuffer img = load_record_image(input_ctx, job.rec, options.loader);
      const PixelBuffer degraded = apply_spec(job.spec, img);
      const std::string rel = "semantic/" + job.rec.id + ".png";
      save_png(degraded, out_dir / rel);

      ImageRecord rec = job.rec;
      rec.source_path = rel;
      rec.subset = Subset::SemanticSet;
      rec.degradation = job.spec;
      out_records[i] = std::move(rec);
    });

    m.records = std::move(out_records);
    require_valid(m);
  }

  return result;
}

std::vector<Diagnostic> audit_orthogonality(const CorpusManifest& manifest,
                                            const RecordImageLoader& loader) {
  std::vector<Diagnostic> out;

  if (manifest.kind == ManifestKind::PixelSupervision) {
    std::map<std::string, const ImageRecord*> real_by_sid;
    for (const auto& r : manifest.records) {
      if (r.degradation) {
        out.push_back({r.id, "pixel supervision record carries a degradation spec"});
      }
      if (r.label == Label::Real) real_by_sid[r.semantic_id] = &r;
    }
    for (const auto& r : manifest.records) {
      if (r.label != Label::Synthetic) continue;
      const auto it = real_by_sid.find(r.semantic_id);
      if (it == real_by_sid.end()) {
        out.push_back({r.id, "synthetic record has no paired real"});
        continue;
      }
      try {
        const PixelBuffer fake = load_record_image(manifest, r, loader);
        const PixelBuffer real = load_record_image(manifest, *it->second, loader);
        if (!fake.same_dims(real) || mean_abs_diff(fake, real) <= 0.0) {
          out.push_back({r.id, "reconstruction is identical to its real counterpart"});
        }
      } catch (const std::exception& e) {
        out.push_back({r.id, std::string("pair image check failed: ") + e.what()});
      }
    }
  } else if (manifest.kind == ManifestKind::SemanticSupervision) {
    std::map<std::string, std::string> real_spec, fake_spec;
    for (const auto& r : manifest.records) {
      if (!r.degradation) {
        out.push_back({r.id, "semantic supervision record lacks a degradation spec"});
        continue;
      }
      auto& side = r.label == Label::Real ? real_spec : fake_spec;
      side[r.semantic_id] = spec_to_json(*r.degradation);
    }
    for (const auto& [sid, spec] : real_spec) {
      const auto it = fake_spec.find(sid);
      if (it != fake_spec.end() && it->second != spec) {
        out.push_back({sid, "paired records carry different degradation specs"});
      }
    }
  } else {
    out.push_back({"", "orthogonality audit applies to supervision manifests only"});
  }

  return out;
}

}  // namespace aigikit
