#include <gtest/gtest.h>

#include "cmvc/error.hpp"
#include "cmvc/eval.hpp"
#include "cmvc/pipeline.hpp"
#include "cmvc/synthetic.hpp"

namespace cmvc {
namespace {

TextSidecar texts(std::size_t keyframes) {
  TextSidecar t;
  for (std::size_t k = 0; k < keyframes; ++k) t.keyframe_text[k] = "scene " + std::to_string(k);
  for (std::size_t j = 0; j + 1 < keyframes; ++j) t.clip_text[j] = "motion " + std::to_string(j);
  return t;
}

EncodeConfig config(std::size_t n, StreamMode mode = StreamMode::it2v) {
  EncodeConfig cfg;
  cfg.mode = mode;
  cfg.n_keyframes = n;
  cfg.text = texts(n);
  return cfg;
}

TEST(Pipeline, It2vTwoKeyframesLayout) {
  const auto v = make_synthetic_video({.width = 32, .height = 32, .frames = 10});
  const auto s = demux(encode(v, config(2)));
  ASSERT_EQ(s.clips.size(), 1u);
  EXPECT_EQ(s.clips[0].start_index, 0);
  EXPECT_EQ(s.clips[0].end_index, 9);
  EXPECT_EQ(s.clips[0].count(SectionTag::kimg), 2u);
  EXPECT_EQ(s.clips[0].count(SectionTag::mtxt), 1u);
  EXPECT_EQ(s.clips[0].count(SectionTag::wgts), 0u);
  EXPECT_EQ(s.header.frame_count, 10);
  EXPECT_EQ(s.header.mode, StreamMode::it2v);
}

TEST(Pipeline, OptimizerAddsWeightSection) {
  const auto v = make_synthetic_video({.width = 32, .height = 32, .frames = 10});
  auto cfg = config(2);
  cfg.optimizer = OptimizerConfig{};
  cfg.optimizer->training_steps = 5;
  const auto out = encode_detailed(v, cfg);
  const auto s = demux(out.stream);
  ASSERT_EQ(s.clips[0].count(SectionTag::wgts), 1u);
  EXPECT_EQ(decode_weights(s.clips[0].payloads(SectionTag::wgts)[0]).size(), 8u);
  ASSERT_EQ(out.optimization.size(), 1u);
  EXPECT_EQ(out.rate.total_bits, 8 * out.stream.size());
}

TEST(Pipeline, Tt2vLayout) {
  const auto v = make_synthetic_video({.width = 16, .height = 16, .frames = 12});
  const auto s = demux(encode(v, config(3, StreamMode::tt2v)));
  ASSERT_EQ(s.clips.size(), 2u);
  std::size_t ktxt = 0, mtxt = 0;
  for (const auto& c : s.clips) {
    ktxt += c.count(SectionTag::ktxt);
    mtxt += c.count(SectionTag::mtxt);
    EXPECT_EQ(c.count(SectionTag::kimg), 0u);
  }
  EXPECT_EQ(ktxt, 3u);
  EXPECT_EQ(mtxt, 2u);
  EXPECT_EQ(decode_text(s.clips[1].payloads(SectionTag::ktxt).back()), "scene 2");
}

TEST(Pipeline, DecodeKeepsGeometryAndKeyframes) {
  const auto v = make_synthetic_video({.width = 24, .height = 20, .planes = 3, .frames = 11});
  const auto out = encode_detailed(v, config(3));
  const auto d = decode(out.stream, {});
  EXPECT_EQ(d.width(), 24);
  EXPECT_EQ(d.height(), 20);
  EXPECT_EQ(d.planes(), 3);
  EXPECT_EQ(d.frame_count(), 11u);
  for (std::size_t k : out.keyframes.indices) {
    EXPECT_EQ(d.frame(k), decode_keyframe(encode_keyframe(v.frame(k), QualityFactor::medium)));
  }
}

TEST(Pipeline, OptimizedWeightsDoNotHurtPsnr) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto v = make_synthetic_video({.width = 32, .height = 32, .frames = 11, .segment = 5, .seed = seed});
    auto cfg = config(3);
    cfg.strategy = SelectionStrategy::uniform;
    const double base = psnr(decode(encode(v, cfg), {}), v);
    cfg.optimizer = OptimizerConfig{};
    cfg.optimizer->learning_rate = 0.5;
    cfg.optimizer->training_steps = 200;
    const double tuned = psnr(decode(encode(v, cfg), {}), v);
    EXPECT_GE(tuned, base - 1e-9) << "seed " << seed;
  }
}

TEST(Pipeline, Tt2vDecodeIsDeterministic) {
  const auto v = make_synthetic_video({.width = 16, .height = 8, .frames = 9});
  const auto bytes = encode(v, config(4, StreamMode::tt2v));
  const auto a = decode(bytes, {});
  const auto b = decode(bytes, BackendSpec::parse("latent"));
  EXPECT_EQ(a.frame_count(), 9u);
  for (std::size_t f = 0; f < 9; ++f) EXPECT_EQ(a.frame(f), b.frame(f));
}

TEST(Pipeline, BitrateGrowsWithKeyframesAndQuality) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto v = make_synthetic_video({.width = 48, .height = 48, .frames = 16, .seed = seed});
    std::size_t prev = 0;
    for (std::size_t n : {2u, 3u, 4u}) {
      const auto size = encode(v, config(n)).size();
      EXPECT_GT(size, prev);
      prev = size;
    }
    prev = 0;
    for (auto q : {QualityFactor::low, QualityFactor::medium, QualityFactor::high}) {
      auto cfg = config(3);
      cfg.quality = q;
      const auto size = encode(v, cfg).size();
      EXPECT_GT(size, prev);
      prev = size;
    }
  }
}

TEST(Pipeline, MissingTextIsConfigError) {
  const auto v = make_synthetic_video({.width = 16, .height = 16, .frames = 8});
  auto cfg = config(3, StreamMode::tt2v);
  cfg.text.keyframe_text.erase(2);
  try {
    encode(v, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  cfg = config(3);
  cfg.text.clip_text.erase(1);
  EXPECT_THROW(encode(v, cfg), Error);
}

TEST(Pipeline, WeightCountMismatchIsMalformed) {
  const auto v = make_synthetic_video({.width = 16, .height = 16, .frames = 6});
  auto s = demux(encode(v, config(2)));
  s.clips[0].sections.push_back({SectionTag::wgts, encode_weights(linear_schedule(3))});
  const auto bytes = mux(s.header, s.clips);
  try {
    decode(bytes, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::malformed_stream);
  }
}

TEST(Pipeline, JobsDoNotChangeOutput) {
  const auto v = make_synthetic_video({.width = 24, .height = 24, .frames = 20});
  auto cfg = config(5);
  cfg.optimizer = OptimizerConfig{};
  cfg.optimizer->training_steps = 20;
  const auto one = encode(v, cfg);
  cfg.jobs = 4;
  const auto four = encode(v, cfg);
  EXPECT_EQ(one, four);
  const auto d1 = decode(one, {}, 1);
  const auto d4 = decode(one, {}, 4);
  for (std::size_t f = 0; f < d1.frame_count(); ++f) EXPECT_EQ(d1.frame(f), d4.frame(f));
}

TEST(Sidecar, Parsing) {
  const auto t = TextSidecar::parse("\n[keyframe 0]\na red car\n\n[clip 0]\nthe car drives\nto the left  \n\n[keyframe 1]\n");
  EXPECT_EQ(t.keyframe_text.at(0), "a red car");
  EXPECT_EQ(t.clip_text.at(0), "the car drives\nto the left");
  EXPECT_EQ(t.keyframe_text.at(1), "");
  EXPECT_THROW(TextSidecar::parse("stray\n[clip 0]\nx\n"), Error);
  EXPECT_THROW(TextSidecar::parse("[clip 0]\nx\n[clip 0]\ny\n"), Error);
  EXPECT_THROW(TextSidecar::load("/nonexistent/sidecar.txt"), Error);
}

}  // namespace
}  // namespace cmvc
