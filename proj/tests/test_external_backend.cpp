#include <gtest/gtest.h>
#include <unistd.h>

#include "cmvc/error.hpp"
#include "cmvc/external_backend.hpp"
#include "oracles.hpp"

namespace cmvc {
namespace {

const std::string kBackend = BLEND_BACKEND_PATH;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::contract;
}

TEST(Wire, HelloFrameBytes) {
  const auto bytes = wire::frame_message({{"type", "hello"}, {"version", 1}});
  const std::string body = R"({"type":"hello","version":1})";
  ASSERT_EQ(body.size(), 0x1Cu);
  std::vector<std::uint8_t> expected = {0x00, 0x00, 0x00, 0x1C};
  expected.insert(expected.end(), body.begin(), body.end());
  EXPECT_EQ(bytes, expected);
}

TEST(Wire, GenerateMessageFields) {
  const GenerationRequest req{Frame(3, 2, 1, 0), Frame(3, 2, 1, 9), "zoom", {{0.25, 0.75}, {0.5, 0.5}}, 2};
  const auto m = wire::generate_message(req);
  EXPECT_EQ(m["type"], "generate");
  EXPECT_EQ(m["width"], 3);
  EXPECT_EQ(m["height"], 2);
  EXPECT_EQ(m["planes"], 1);
  EXPECT_EQ(m["count"], 2);
  EXPECT_EQ(m["motion_text"], "zoom");
  EXPECT_EQ(m["weights_i"], (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(m["weights_l"], (std::vector<double>{0.5, 0.5}));
}

TEST(Wire, PipeRoundTripAndErrors) {
  int fds[2];
  ASSERT_EQ(::pipe(fds), 0);
  ASSERT_TRUE(wire::send_message(fds[1], {{"type", "bye"}}));
  const auto m = wire::receive_message(fds[0]);
  ASSERT_TRUE(m);
  EXPECT_EQ((*m)["type"], "bye");

  const std::vector<std::uint8_t> junk = {0, 0, 0, 3, 'a', 'b', 'c'};
  ASSERT_TRUE(wire::write_all(fds[1], junk));
  EXPECT_EQ(kind_of([&] { wire::receive_message(fds[0]); }), ErrorKind::protocol_violation);

  const std::vector<std::uint8_t> huge = {0xff, 0xff, 0xff, 0xff};
  ASSERT_TRUE(wire::write_all(fds[1], huge));
  EXPECT_EQ(kind_of([&] { wire::receive_message(fds[0]); }), ErrorKind::protocol_violation);

  ::close(fds[1]);
  EXPECT_FALSE(wire::receive_message(fds[0]));
  ::close(fds[0]);
}

TEST(External, BlendsLikeTheLinearBackend) {
  ExternalBackend ext(kBackend);
  const Frame zeros(4, 4, 1, 0);
  const Frame hundreds(4, 4, 1, 100);
  auto out = ext.generate({zeros, hundreds, "", {{0.5}, {0.5}}, 1});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], Frame(4, 4, 1, 50));

  const Frame left(4, 4, 1, 0x11);
  out = ext.generate({left, hundreds, "", {{1.0}, {1.0}}, 1});
  EXPECT_EQ(out[0], left);
}

TEST(External, RandomRequestsMatchLinear) {
  SplitMix64 rng(7);
  ExternalBackend ext(kBackend);
  LinearBackend linear;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng.next() % 24);
    const int h = 1 + static_cast<int>(rng.next() % 24);
    const int planes = rng.next() % 2 ? 3 : 1;
    const auto a = oracle::random_frame(rng, w, h, planes);
    const auto b = oracle::random_frame(rng, w, h, planes);
    const std::size_t count = rng.next() % 5;
    GenerationRequest req{a, b, "text", {}, count};
    for (std::size_t t = 0; t < count; ++t) {
      req.weights.wi.push_back(rng.next_unit());
      req.weights.wl.push_back(rng.next_unit());
    }
    EXPECT_EQ(ext.generate(req), linear.generate(req));
  }
}

TEST(External, RenderReturnsSingleFrame) {
  ExternalBackend ext(kBackend);
  const auto px = ext.render(Frame(2, 2, 1, 10), Frame(2, 2, 1, 30), "", 0.5, 0.5, 0, 3);
  EXPECT_EQ(px, (std::vector<double>(4, 20.0)));
}

TEST(External, HandshakeFailures) {
  EXPECT_EQ(kind_of([&] { ExternalBackend(kBackend + " --version 2"); }), ErrorKind::backend_unavailable);
  EXPECT_EQ(kind_of([&] { ExternalBackend(kBackend + " --silent"); }), ErrorKind::backend_unavailable);
  EXPECT_EQ(kind_of([&] { ExternalBackend("/nonexistent/cmvc-backend"); }), ErrorKind::backend_unavailable);
}

TEST(External, ReplyFailures) {
  const GenerationRequest req{Frame(2, 2, 1, 0), Frame(2, 2, 1, 8), "", {{0.5}, {0.5}}, 1};
  {
    ExternalBackend ext(kBackend + " --wrong-count");
    EXPECT_EQ(kind_of([&] { ext.generate(req); }), ErrorKind::protocol_violation);
  }
  {
    ExternalBackend ext(kBackend + " --fail");
    EXPECT_EQ(kind_of([&] { ext.generate(req); }), ErrorKind::backend_unavailable);
  }
}

TEST(External, MakeBackendSpawnsProcess) {
  auto b = make_backend(BackendSpec::parse("external:" + kBackend));
  EXPECT_EQ(b->name(), "external");
  const auto out = b->generate({Frame(1, 1, 1, 0), Frame(1, 1, 1, 255), "", {{0.0}, {0.0}}, 1});
  EXPECT_EQ(out[0].samples()[0], 255);
}

}  // namespace
}  // namespace cmvc
