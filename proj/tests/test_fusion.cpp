#include <doctest.h>

#include <aigikit/corpus.hpp>
#include <aigikit/fusion.hpp>
#include <aigikit/rng.hpp>

#include "testutil.hpp"

using namespace aigikit;

namespace {

BranchVerdict semantic_says(Label decision) {
  BranchVerdict v;
  v.branch = BranchKind::Semantic;
  v.decision = decision;
  v.score = decision == Label::Synthetic ? 1.0 : 0.0;
  return v;
}

BranchVerdict pixel_says(Label decision) {
  BranchVerdict v;
  v.branch = BranchKind::PixelExpert;
  v.decision = decision;
  v.score = decision == Label::Synthetic ? 0.9 : 0.1;
  return v;
}

struct FailingBackend : SemanticBackend {
  std::string verdict_text(const ImageRef&, const std::string&) const override {
    throw BackendUnavailable("offline");
  }
  std::string name() const override { return "failing"; }
};

}  // namespace

TEST_CASE("fusion reproduces the or-rule truth table") {
  CHECK(fuse(semantic_says(Label::Real), pixel_says(Label::Real)).final == Label::Real);
  CHECK(fuse(semantic_says(Label::Real), pixel_says(Label::Synthetic)).final ==
        Label::Synthetic);
  CHECK(fuse(semantic_says(Label::Synthetic), pixel_says(Label::Real)).final ==
        Label::Synthetic);
  CHECK(fuse(semantic_says(Label::Synthetic), pixel_says(Label::Synthetic)).final ==
        Label::Synthetic);
}

TEST_CASE("both inputs survive fusion for audit") {
  const auto fused = fuse(semantic_says(Label::Real), pixel_says(Label::Synthetic));
  CHECK(fused.semantic.decision == Label::Real);
  CHECK(fused.pixel().decision == Label::Synthetic);
  CHECK(fused.pixels.size() == 1);
}

TEST_CASE("mismatched branch roles are rejected") {
  CHECK_THROWS_AS(fuse(pixel_says(Label::Real), pixel_says(Label::Real)), RoleMismatch);
  CHECK_THROWS_AS(fuse(semantic_says(Label::Real), semantic_says(Label::Real)), RoleMismatch);
  CHECK_THROWS_AS(fuse(semantic_says(Label::Real), std::span<const BranchVerdict>{}),
                  RoleMismatch);
}

TEST_CASE("flipping any branch toward synthetic never flips the result back") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Label s = rng.next() % 2 ? Label::Synthetic : Label::Real;
    const Label p = rng.next() % 2 ? Label::Synthetic : Label::Real;
    const Label before = fuse(semantic_says(s), pixel_says(p)).final;
    const Label after_s = fuse(semantic_says(Label::Synthetic), pixel_says(p)).final;
    const Label after_p = fuse(semantic_says(s), pixel_says(Label::Synthetic)).final;
    if (before == Label::Synthetic) {
      CHECK(after_s == Label::Synthetic);
      CHECK(after_p == Label::Synthetic);
    }
  }
}

TEST_CASE("multi-expert fusion ors over every pixel verdict") {
  const std::vector<BranchVerdict> all_real = {pixel_says(Label::Real), pixel_says(Label::Real)};
  const std::vector<BranchVerdict> one_flags = {pixel_says(Label::Real),
                                                pixel_says(Label::Synthetic)};
  CHECK(fuse(semantic_says(Label::Real), std::span(all_real)).final == Label::Real);
  CHECK(fuse(semantic_says(Label::Real), std::span(one_flags)).final == Label::Synthetic);

  // Order of pixel experts does not matter.
  const std::vector<BranchVerdict> reversed = {one_flags[1], one_flags[0]};
  CHECK(fuse(semantic_says(Label::Real), std::span(one_flags)).final ==
        fuse(semantic_says(Label::Real), std::span(reversed)).final);
}

TEST_CASE("detect composes the documented branch rules") {
  // Stub says real; zero-weight expert scores 0.5, tie flags Synthetic.
  const StubBackend stub({}, std::string(kRealPrefix));
  const PixelBuffer img = testutil::constant_image(16, 16, 128);
  const std::vector<ExpertModel> experts(1);

  const FusedVerdict v = detect({"img", &img}, &stub, experts, "prompt");
  CHECK(v.semantic.decision == Label::Real);
  CHECK(v.pixel().decision == Label::Synthetic);
  CHECK(v.final == Label::Synthetic);
  CHECK_FALSE(v.audit.has_value());
}

TEST_CASE("branch failures propagate unless degraded mode permits fallback") {
  const FailingBackend failing;
  const PixelBuffer img = testutil::constant_image(16, 16, 128);
  const std::vector<ExpertModel> experts(1);

  FusionPolicy strict;
  strict.degraded_ok = false;
  CHECK_THROWS_AS(detect({"img", &img}, &failing, experts, "p", strict), DetectionError);

  FusionPolicy relaxed;
  relaxed.degraded_ok = true;
  const FusedVerdict v = detect({"img", &img}, &failing, experts, "p", relaxed);
  CHECK(v.final == Label::Synthetic);  // zero model tie
  REQUIRE(v.audit.has_value());
  CHECK(v.audit->find("degraded") != std::string::npos);

  // No branches at all is an error even in degraded mode.
  CHECK_THROWS_AS(detect({"img", &img}, nullptr, std::span<const ExpertModel>{}, "p", relaxed),
                  DetectionError);
}
