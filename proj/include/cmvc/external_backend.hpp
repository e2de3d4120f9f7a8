#pragma once

#include <sys/types.h>

#include <cstdint>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmvc/backends.hpp"

namespace cmvc {

/// Framing for the external generation protocol: every message is a 4-byte
/// big-endian length followed by a UTF-8 JSON object; binary frame payloads
/// follow their announcing message as raw bytes.
namespace wire {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxMessageBytes = 16u << 20;

std::vector<std::uint8_t> frame_message(const nlohmann::json& message);

/// Blocking helpers over file descriptors. Return false on EOF or I/O error.
bool write_all(int fd, std::span<const std::uint8_t> bytes);
bool read_exact(int fd, std::span<std::uint8_t> bytes);

bool send_message(int fd, const nlohmann::json& message);
/// nullopt on EOF/I/O error; throws protocol_violation on an unparsable message.
std::optional<nlohmann::json> receive_message(int fd);

nlohmann::json generate_message(const GenerationRequest& request);

}  // namespace wire

/// Generation backend served by a child process over its stdin/stdout.
/// One request is in flight at a time per instance.
class ExternalBackend final : public GenerationBackend {
 public:
  /// Spawns `/bin/sh -c command` and performs the hello handshake.
  explicit ExternalBackend(std::string command);
  ~ExternalBackend() override;

  ExternalBackend(const ExternalBackend&) = delete;
  ExternalBackend& operator=(const ExternalBackend&) = delete;

  std::vector<Frame> generate(const GenerationRequest& request) override;
  /// Issues a one-frame generate request and returns its samples as reals.
  std::vector<double> render(const Frame& left, const Frame& right, std::string_view motion_text, double wi,
                             double wl, std::size_t t, std::size_t count) override;
  std::string_view name() const noexcept override { return "external"; }

 private:
  void shutdown() noexcept;

  std::string command_;
  pid_t child_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::mutex mutex_;
};

}  // namespace cmvc
