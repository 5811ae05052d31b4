#include "forge/scorer/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <deque>
#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <unordered_map>

#include "forge/scorer/sidecar.hpp"

namespace forge::scorer {

namespace {

using Clock = std::chrono::steady_clock;

void close_fd(int& fd) noexcept {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

SubprocessScorer::SubprocessScorer(const std::string& command, SubprocessOptions options)
    : options_(options) {
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SpawnFailure("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw SpawnFailure("pipe failed");
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw SpawnFailure("pipe failed");
  }

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
      ::close(fd);
    throw SpawnFailure("fork failed");
  }
  if (pid_ == 0) {
    // Own process group, so shutdown also reaches whatever the shell started.
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  int child_errno = 0;
  const auto n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  ::close(err_pipe[0]);
  if (n == sizeof child_errno) {
    shutdown();
    throw SpawnFailure("cannot exec scorer '" + command + "': " + std::strerror(child_errno));
  }
  set_nonblocking(to_child_);
  set_nonblocking(from_child_);
}

SubprocessScorer::SubprocessScorer(SubprocessScorer&& other) noexcept
    : options_(other.options_),
      pid_(std::exchange(other.pid_, -1)),
      to_child_(std::exchange(other.to_child_, -1)),
      from_child_(std::exchange(other.from_child_, -1)),
      buffer_(std::move(other.buffer_)) {}

SubprocessScorer::~SubprocessScorer() { shutdown(); }

void SubprocessScorer::shutdown() noexcept {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ <= 0) return;
  int status = 0;
  for (int i = 0; i < 100; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) != 0) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(-pid_, SIGKILL);
  ::waitpid(pid_, &status, 0);
  pid_ = -1;
}

std::vector<ScoreResponse> SubprocessScorer::score(std::span<const ScoreRequest> requests) {
  if (pid_ <= 0) throw ScorerFailure("scorer process is not running");
  std::vector<ScoreResponse> out(requests.size());
  std::unordered_map<std::uint64_t, std::size_t> slot;  // id -> request index, in flight
  std::deque<std::pair<std::uint64_t, Clock::time_point>> deadlines;
  slot.reserve(requests.size());

  std::size_t next = 0;      // next request to write
  std::size_t answered = 0;
  std::string pending;       // bytes of the request being written
  std::size_t pending_off = 0;

  while (answered < requests.size()) {
    const bool want_write =
        pending_off < pending.size() || (next < requests.size() && slot.size() < options_.max_in_flight);
    if (pending_off >= pending.size() && want_write) {
      const auto& req = requests[next];
      if (!slot.emplace(req.id, next).second)
        throw ScorerFailure("duplicate request id " + std::to_string(req.id));
      deadlines.emplace_back(req.id, Clock::now() + options_.timeout);
      pending = encode_request(req) + "\n";
      pending_off = 0;
      ++next;
    }

    pollfd fds[2] = {{from_child_, POLLIN, 0}, {to_child_, POLLOUT, 0}};
    const nfds_t nfds = pending_off < pending.size() ? 2 : 1;

    while (!deadlines.empty() && !slot.contains(deadlines.front().first)) deadlines.pop_front();
    int wait_ms = -1;
    if (!deadlines.empty()) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadlines.front().second - Clock::now());
      if (left.count() <= 0) throw Timeout(deadlines.front().first);
      wait_ms = static_cast<int>(left.count()) + 1;
    }
    const int rc = ::poll(fds, nfds, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ScorerFailure("poll failed");
    }
    if (rc == 0) continue;

    if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto n = ::write(to_child_, pending.data() + pending_off, pending.size() - pending_off);
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)
        throw ScorerFailure("scorer closed its input");
      if (n > 0) pending_off += static_cast<std::size_t>(n);
    }

    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const auto n = ::read(from_child_, buf, sizeof buf);
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) throw ScorerFailure("read failed");
      if (n == 0) throw ProtocolViolation("", "scorer closed its output with requests pending");
      if (n > 0) buffer_.append(buf, static_cast<std::size_t>(n));
      std::size_t pos;
      while ((pos = buffer_.find('\n')) != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ScoreResponse resp = decode_response(line);
        auto it = slot.find(resp.id);
        if (it == slot.end()) throw ProtocolViolation(line, "unexpected id");
        if (requests[it->second].kind != resp.kind)
          throw ProtocolViolation(line, "wrong response kind");
        out[it->second] = std::move(resp);
        slot.erase(it);
        ++answered;
      }
    }
  }
  return out;
}

std::unique_ptr<Scorer> open_scorer(const std::string& spec, SubprocessOptions options) {
  struct stat st {};
  if (::stat(spec.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(spec.c_str(), X_OK) != 0)
    return std::make_unique<SidecarScorer>(SidecarScorer::from_file(spec));
  return std::make_unique<SubprocessScorer>(spec, options);
}

}  // namespace forge::scorer
