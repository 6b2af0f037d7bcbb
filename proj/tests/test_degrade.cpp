#include <doctest.h>

#include <set>

#include <aigikit/degrade.hpp>
#include <aigikit/rng.hpp>

#include "testutil.hpp"

using namespace aigikit;

TEST_CASE("jpeg at quality 100 keeps a constant image within one level") {
  const PixelBuffer img = testutil::constant_image(64, 64, 137);
  CHECK(max_abs_diff(img, jpeg_compress(img, 100)) <= 1);
}

TEST_CASE("jpeg preserves dimensions for awkward sizes") {
  const PixelBuffer img = testutil::constant_image(37, 53, 200);
  const PixelBuffer out = jpeg_compress(img, 40);
  CHECK(out.width == 37);
  CHECK(out.height == 53);
}

TEST_CASE("quality 10 hurts the test photo more than quality 95") {
  const PixelBuffer photo = testutil::load_test_photo();
  const double mad10 = mean_abs_diff(photo, jpeg_compress(photo, 10));
  const double mad95 = mean_abs_diff(photo, jpeg_compress(photo, 95));
  CHECK(mad10 > mad95);
}

TEST_CASE("jpeg rejects out-of-range quality") {
  const PixelBuffer img = testutil::constant_image(16, 16, 0);
  CHECK_THROWS(jpeg_compress(img, 0));
  CHECK_THROWS(jpeg_compress(img, 101));
}

TEST_CASE("double jpeg equals two sequential passes") {
  const PixelBuffer photo = testutil::load_test_photo();
  const PixelBuffer direct = double_jpeg(photo, 60);
  const PixelBuffer chained = jpeg_compress(jpeg_compress(photo, 60), 60);
  CHECK(pixel_hash(direct) == pixel_hash(chained));
}

TEST_CASE("double jpeg is deterministic across runs") {
  const PixelBuffer photo = testutil::load_test_photo();
  CHECK(pixel_hash(double_jpeg(photo, 60)) == pixel_hash(double_jpeg(photo, 60)));
  const PixelBuffer flat = testutil::constant_image(32, 32, 90);
  CHECK(max_abs_diff(flat, double_jpeg(flat, 100)) <= 1);
}

TEST_CASE("resize at scale 1.0 is bit-identical for every kernel") {
  const PixelBuffer photo = testutil::load_test_photo();
  for (const auto k : {ResizeKernel::Nearest, ResizeKernel::Bilinear, ResizeKernel::Bicubic}) {
    CHECK(pixel_hash(resize(photo, 1.0, k)) == pixel_hash(photo));
  }
}

TEST_CASE("nearest halving of a 2x2 constant image keeps the color") {
  const PixelBuffer img = testutil::constant_image(2, 2, 201);
  const PixelBuffer out = resize(img, 0.5, ResizeKernel::Nearest);
  CHECK(out.width == 1);
  CHECK(out.height == 1);
  CHECK(out.at(0, 0, 0) == 201);
}

TEST_CASE("resize rounds output dimensions") {
  const PixelBuffer img = testutil::constant_image(100, 100, 5);
  const PixelBuffer out = resize(img, 0.4, ResizeKernel::Bilinear);
  CHECK(out.width == 40);
  CHECK(out.height == 40);
}

TEST_CASE("resize refuses degenerate outputs") {
  const PixelBuffer img = testutil::constant_image(8, 8, 5);
  CHECK_THROWS_AS(resize(img, 0.01, ResizeKernel::Bilinear), DegenerateOutput);
}

TEST_CASE("double resize restores the exact input dimensions") {
  const PixelBuffer img = testutil::constant_image(333, 217, 66);
  const PixelBuffer out = double_resize(img, 0.4, ResizeKernel::Bilinear);
  CHECK(out.width == 333);
  CHECK(out.height == 217);
}

TEST_CASE("double resize at scale 1.0 is bit-identical") {
  const PixelBuffer photo = testutil::load_test_photo();
  CHECK(pixel_hash(double_resize(photo, 1.0, ResizeKernel::Bicubic)) == pixel_hash(photo));
}

TEST_CASE("double resize keeps constants constant within rounding") {
  const PixelBuffer img = testutil::constant_image(41, 29, 111);
  for (const auto k : {ResizeKernel::Nearest, ResizeKernel::Bilinear, ResizeKernel::Bicubic}) {
    for (const double s : {0.3, 0.5, 0.8}) {
      CHECK(max_abs_diff(img, double_resize(img, s, k)) <= 1);
    }
  }
}

TEST_CASE("blur leaves a constant image untouched") {
  const PixelBuffer img = testutil::constant_image(48, 32, 77);
  CHECK(pixel_hash(gaussian_blur(img, 1.6)) == pixel_hash(img));
}

TEST_CASE("noise replays bit-identically from its seed") {
  const PixelBuffer photo = testutil::load_test_photo();
  CHECK(pixel_hash(gaussian_noise(photo, 4.0, 31337)) ==
        pixel_hash(gaussian_noise(photo, 4.0, 31337)));
  CHECK(pixel_hash(gaussian_noise(photo, 4.0, 31337)) !=
        pixel_hash(gaussian_noise(photo, 4.0, 31338)));
}

TEST_CASE("noise sample mean stays near the input mean") {
  const double sigma = 8.0;
  const PixelBuffer img = testutil::constant_image(256, 256, 128);
  const PixelBuffer noisy = gaussian_noise(img, sigma, 4242);
  double total = 0.0;
  for (const auto v : noisy.data) total += v;
  const double mean = total / static_cast<double>(noisy.data.size());
  CHECK(std::abs(mean - 128.0) <= 3.0 * sigma / 256.0);
}

TEST_CASE("heavy pipeline sampling is a pure function of seed and profile") {
  const PipelineProfile profile = default_heavy_profile();
  const DegradationSpec a = sample_heavy_pipeline(123, profile);
  const DegradationSpec b = sample_heavy_pipeline(123, profile);
  CHECK(a == b);
  CHECK(spec_to_json(a) == spec_to_json(b));
  CHECK_FALSE(sample_heavy_pipeline(124, profile) == a);
}

TEST_CASE("default heavy profile emits 2 to 4 ops") {
  const PipelineProfile profile = default_heavy_profile();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto spec = sample_heavy_pipeline(seed, profile);
    CHECK(spec.ops.size() >= 2);
    CHECK(spec.ops.size() <= 4);
  }
}

TEST_CASE("sampling 10k specs covers every op kind in the pool") {
  const PipelineProfile profile = default_heavy_profile();
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    for (const auto& op : sample_heavy_pipeline(seed, profile).ops) {
      seen.insert(std::string(op.kind()));
    }
  }
  CHECK(seen.size() == profile.pool.size());
}

TEST_CASE("empty pools and bad ranges are rejected") {
  PipelineProfile p;
  CHECK_THROWS_AS(sample_heavy_pipeline(1, p), EmptyPool);
  p = default_heavy_profile();
  p.max_len = 99;
  CHECK_THROWS_AS(sample_heavy_pipeline(1, p), ProfileError);
}

TEST_CASE("an empty spec is the identity") {
  const PixelBuffer photo = testutil::load_test_photo();
  DegradationSpec spec;
  CHECK(pixel_hash(apply_spec(spec, photo)) == pixel_hash(photo));
}

TEST_CASE("identity resize plus q100 jpeg keeps a constant image within one level") {
  const PixelBuffer img = testutil::constant_image(40, 40, 93);
  DegradationSpec spec;
  spec.ops.push_back({DegradationOp::Resize{1.0, ResizeKernel::Bilinear}});
  spec.ops.push_back({DegradationOp::Jpeg{100}});
  CHECK(max_abs_diff(img, apply_spec(spec, img)) <= 1);
}

TEST_CASE("replaying a sampled spec is bit-identical") {
  const PixelBuffer photo = testutil::load_test_photo();
  const PipelineProfile profile = default_heavy_profile();
  for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
    const auto spec = sample_heavy_pipeline(seed, profile);
    CHECK(pixel_hash(apply_spec(spec, photo)) == pixel_hash(apply_spec(spec, photo)));
  }
}

TEST_CASE("dimension contracts hold for dimension-preserving ops") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = static_cast<int>(rng.uniform_int(8, 90));
    const int h = static_cast<int>(rng.uniform_int(8, 90));
    const PixelBuffer img = synth_photo(rng.next(), w, h);
    for (const PixelBuffer& out :
         {jpeg_compress(img, 35), double_jpeg(img, 70),
          double_resize(img, 0.4, ResizeKernel::Bicubic), gaussian_blur(img, 1.2),
          gaussian_noise(img, 3.0, rng.next())}) {
      CHECK(out.width == w);
      CHECK(out.height == h);
    }
  }
}

TEST_CASE("every heavy op at its harshest setting shifts residual energy by over 5%") {
  const PixelBuffer photo = testutil::load_test_photo();
  const double base = neighbor_residual_energy(photo);
  REQUIRE(base > 0.0);
  auto rel_change = [&](const PixelBuffer& img) {
    return std::abs(neighbor_residual_energy(img) - base) / base;
  };
  CHECK(rel_change(jpeg_compress(photo, 30)) > 0.05);
  CHECK(rel_change(double_jpeg(photo, 30)) > 0.05);
  CHECK(rel_change(double_resize(photo, 0.3, ResizeKernel::Bilinear)) > 0.05);
  CHECK(rel_change(gaussian_blur(photo, 2.0)) > 0.05);
  CHECK(rel_change(gaussian_noise(photo, 8.0, 5)) > 0.05);
}

TEST_CASE("spec json round-trips exactly") {
  const auto spec = sample_heavy_pipeline(99, default_heavy_profile());
  const std::string j = spec_to_json(spec);
  CHECK(spec_from_json(j) == spec);
  CHECK(spec_to_json(spec_from_json(j)) == j);
}

TEST_CASE("op parameter validation catches out-of-range values") {
  DegradationOp op;
  op.op = DegradationOp::DoubleResize{1.5, ResizeKernel::Bilinear};
  CHECK_THROWS(op.validate());
  op.op = DegradationOp::GaussianBlur{-1.0};
  CHECK_THROWS(op.validate());
  op.op = DegradationOp::Resize{4.5, ResizeKernel::Nearest};
  CHECK_THROWS(op.validate());
}
