#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <aigikit/image_io.hpp>
#include <aigikit/manifest.hpp>
#include <aigikit/synth.hpp>
#include <aigikit/types.hpp>

namespace testutil {

namespace fs = std::filesystem;

inline fs::path test_data_dir() { return fs::path(AIGIKIT_TEST_DATA_DIR); }

inline aigikit::PixelBuffer load_test_photo() {
  return aigikit::load_image(test_data_dir() / "photo_256.png");
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("aigikit-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline aigikit::PixelBuffer constant_image(int w, int h, std::uint8_t v) {
  return aigikit::PixelBuffer(w, h, v);
}

inline aigikit::PixelBuffer checkerboard(int w, int h) {
  aigikit::PixelBuffer img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v = ((x + y) % 2 == 0) ? 0 : 255;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = v;
    }
  }
  return img;
}

inline aigikit::PixelBuffer rotate90(const aigikit::PixelBuffer& img) {
  aigikit::PixelBuffer out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(img.height - 1 - y, x, c) = img.at(x, y, c);
      }
    }
  }
  return out;
}

/// Writes n synthesized photos into dir and returns Real-labeled records
/// with absolute source paths.
inline std::vector<aigikit::ImageRecord> write_photo_records(const fs::path& dir, int n,
                                                             std::uint64_t seed,
                                                             const std::string& prefix = "r",
                                                             int size = 64) {
  fs::create_directories(dir);
  std::vector<aigikit::ImageRecord> records;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%04d", prefix.c_str(), i);
    const std::string id(buf);
    const fs::path p = dir / (id + ".png");
    aigikit::save_png(aigikit::synth_photo(seed + static_cast<std::uint64_t>(i), size, size), p);
    aigikit::ImageRecord rec;
    rec.id = id;
    rec.source_path = p.string();
    rec.label = aigikit::Label::Real;
    rec.semantic_id = id;
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<aigikit::ImageRecord> write_surreal_records(const fs::path& dir, int n,
                                                               std::uint64_t seed,
                                                               const std::string& prefix = "f",
                                                               int size = 64) {
  fs::create_directories(dir);
  std::vector<aigikit::ImageRecord> records;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%04d", prefix.c_str(), i);
    const std::string id(buf);
    const fs::path p = dir / (id + ".png");
    aigikit::save_png(aigikit::synth_surreal(seed + static_cast<std::uint64_t>(i), size, size), p);
    aigikit::ImageRecord rec;
    rec.id = id;
    rec.source_path = p.string();
    rec.label = aigikit::Label::Synthetic;
    rec.semantic_id = id;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace testutil
