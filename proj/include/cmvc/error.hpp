#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmvc {

enum class ErrorKind {
  contract,            // caller violated a precondition
  malformed_input,     // raw video file of the wrong size
  too_short,           // fewer than two frames
  malformed_payload,   // a section payload failed to decode
  unsupported_stream,  // bad magic or version
  corrupt_stream,      // CRC mismatch
  malformed_stream,    // truncated or structurally invalid container
  no_overlap,          // BD-Rate curves share no distortion range
  backend_unavailable,
  protocol_violation,
  numerical_failure,
  config,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::contract, message);
}

}  // namespace cmvc
