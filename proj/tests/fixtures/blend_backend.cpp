// Test-only external generation backend speaking the stdio protocol.
// Blends keyframes per sample (half-up rounding), like the in-process linear backend.
//
//   blend_backend [--version N] [--wrong-count] [--fail] [--silent]

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <nlohmann/json.hpp>
#include <vector>

#include "cmvc/external_backend.hpp"

using nlohmann::json;
namespace wire = cmvc::wire;

int main(int argc, char** argv) {
  int version = wire::kProtocolVersion;
  bool wrong_count = false;
  bool fail_requests = false;
  bool silent = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--version") && i + 1 < argc) version = std::atoi(argv[++i]);
    if (!std::strcmp(argv[i], "--wrong-count")) wrong_count = true;
    if (!std::strcmp(argv[i], "--fail")) fail_requests = true;
    if (!std::strcmp(argv[i], "--silent")) silent = true;
  }
  if (silent) return 0;

  const int in = STDIN_FILENO;
  const int out = STDOUT_FILENO;
  auto hello = wire::receive_message(in);
  if (!hello || (*hello)["type"] != "hello") return 1;
  wire::send_message(out, {{"type", "hello"}, {"version", version}});
  if ((*hello)["version"] != version) return 1;

  for (;;) {
    const auto msg = wire::receive_message(in);
    if (!msg || (*msg)["type"] == "bye") return 0;
    if ((*msg)["type"] != "generate") {
      wire::send_message(out, {{"type", "error"}, {"message", "unknown message"}});
      continue;
    }
    const std::size_t size = (*msg)["width"].get<std::size_t>() * (*msg)["height"].get<std::size_t>() *
                             (*msg)["planes"].get<std::size_t>();
    std::vector<std::uint8_t> left(size), right(size);
    if (!wire::read_exact(in, left) || !wire::read_exact(in, right)) return 1;
    if (fail_requests) {
      wire::send_message(out, {{"type", "error"}, {"message", "requested failure"}});
      continue;
    }
    const auto wi = (*msg)["weights_i"].get<std::vector<double>>();
    const std::size_t count = (*msg)["count"].get<std::size_t>();
    const std::size_t sent = wrong_count ? count + 1 : count;
    wire::send_message(out, {{"type", "frames"}, {"count", sent}});
    for (std::size_t t = 0; t < sent; ++t) {
      const double w = t < wi.size() ? wi[t] : 0.0;
      std::vector<std::uint8_t> frame(size);
      for (std::size_t i = 0; i < size; ++i) {
        const double v = std::floor(w * left[i] + (1.0 - w) * right[i] + 0.5);
        frame[i] = static_cast<std::uint8_t>(v < 0 ? 0 : v > 255 ? 255 : v);
      }
      wire::write_all(out, frame);
    }
  }
}
