#include "cmvc/external_backend.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>

#include "cmvc/error.hpp"

namespace cmvc {

namespace wire {

std::vector<std::uint8_t> frame_message(const nlohmann::json& message) {
  const std::string body = message.dump();
  const auto n = static_cast<std::uint32_t>(body.size());
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                   static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

bool write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

bool read_exact(int fd, std::span<std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::read(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_message(int fd, const nlohmann::json& message) { return write_all(fd, frame_message(message)); }

std::optional<nlohmann::json> receive_message(int fd) {
  std::uint8_t len[4];
  if (!read_exact(fd, len)) return std::nullopt;
  const std::uint32_t n = (std::uint32_t(len[0]) << 24) | (std::uint32_t(len[1]) << 16) | (std::uint32_t(len[2]) << 8) | len[3];
  if (n > kMaxMessageBytes) fail(ErrorKind::protocol_violation, "message length " + std::to_string(n) + " too large");
  std::vector<std::uint8_t> body(n);
  if (!read_exact(fd, body)) return std::nullopt;
  auto parsed = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) fail(ErrorKind::protocol_violation, "message is not a JSON object");
  return parsed;
}

nlohmann::json generate_message(const GenerationRequest& request) {
  return {{"type", "generate"},
          {"width", request.left.width()},
          {"height", request.left.height()},
          {"planes", request.left.planes()},
          {"count", request.intermediate_count},
          {"motion_text", request.motion_text},
          {"weights_i", request.weights.wi},
          {"weights_l", request.weights.wl}};
}

}  // namespace wire

ExternalBackend::ExternalBackend(std::string command) : command_(std::move(command)) {
  // A dead child must surface as a failed write, not a fatal signal.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) fail(ErrorKind::backend_unavailable, "pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail(ErrorKind::backend_unavailable, "pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    fail(ErrorKind::backend_unavailable, "fork() failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  child_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    if (!wire::send_message(to_child_, {{"type", "hello"}, {"version", wire::kProtocolVersion}})) {
      fail(ErrorKind::backend_unavailable, "could not send hello to '" + command_ + "'");
    }
    const auto reply = wire::receive_message(from_child_);
    if (!reply) fail(ErrorKind::backend_unavailable, "no hello reply from '" + command_ + "'");
    if (reply->value("type", "") != "hello" || reply->value("version", -1) != wire::kProtocolVersion) {
      fail(ErrorKind::backend_unavailable, "handshake rejected by '" + command_ + "': " + reply->dump());
    }
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalBackend::~ExternalBackend() { shutdown(); }

void ExternalBackend::shutdown() noexcept {
  if (to_child_ >= 0) {
    try {
      wire::send_message(to_child_, {{"type", "bye"}});
    } catch (...) {
    }
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (child_ > 0) {
    int status = 0;
    while (::waitpid(child_, &status, 0) < 0 && errno == EINTR) {
    }
    child_ = -1;
  }
}

std::vector<Frame> ExternalBackend::generate(const GenerationRequest& request) {
  validate_request(request);
  std::lock_guard lock(mutex_);
  if (to_child_ < 0) fail(ErrorKind::backend_unavailable, "backend process is not running");

  if (!wire::send_message(to_child_, wire::generate_message(request)) ||
      !wire::write_all(to_child_, request.left.samples()) || !wire::write_all(to_child_, request.right.samples())) {
    fail(ErrorKind::backend_unavailable, "backend '" + command_ + "' stopped reading");
  }
  const auto reply = wire::receive_message(from_child_);
  if (!reply) fail(ErrorKind::backend_unavailable, "backend '" + command_ + "' closed the connection");
  const std::string type = reply->value("type", "");
  if (type == "error") {
    fail(ErrorKind::backend_unavailable, "backend error: " + reply->value("message", std::string("(no message)")));
  }
  if (type != "frames") fail(ErrorKind::protocol_violation, "unexpected reply type '" + type + "'");
  const auto count_it = reply->find("count");
  if (count_it == reply->end() || !count_it->is_number_unsigned()) {
    fail(ErrorKind::protocol_violation, "frames reply without a valid count");
  }
  const auto count = count_it->get<std::size_t>();
  if (count != request.intermediate_count) {
    fail(ErrorKind::protocol_violation, "backend returned " + std::to_string(count) + " frames, expected " +
                                            std::to_string(request.intermediate_count));
  }
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<std::uint8_t> px(request.left.sample_count());
    if (!wire::read_exact(from_child_, px)) fail(ErrorKind::protocol_violation, "truncated frame payload");
    frames.emplace_back(request.left.width(), request.left.height(), request.left.planes(), std::move(px));
  }
  return frames;
}

std::vector<double> ExternalBackend::render(const Frame& left, const Frame& right, std::string_view motion_text,
                                            double wi, double wl, std::size_t, std::size_t) {
  GenerationRequest req{left, right, std::string(motion_text), WeightTrack{{std::clamp(wi, 0.0, 1.0)}, {std::clamp(wl, 0.0, 1.0)}}, 1};
  const auto frames = generate(req);
  return std::vector<double>(frames.front().samples().begin(), frames.front().samples().end());
}

}  // namespace cmvc
