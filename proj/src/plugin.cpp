#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "lemur/error.hpp"
#include "lemur/harness.hpp"

namespace lemur::harness {
namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

}  // namespace

void validate(const PluginDescriptor& p) {
  if (p.command.empty() || p.command.front().empty()) throw std::invalid_argument("plugin command is empty");
  if (p.in_shape.empty() || p.out_shape.empty()) throw std::invalid_argument("plugin shapes must be non-empty");
  for (int d : p.in_shape) {
    if (d <= 0) throw std::invalid_argument("in_shape entries must be positive");
  }
  for (int d : p.out_shape) {
    if (d <= 0) throw std::invalid_argument("out_shape entries must be positive");
  }
  if (p.epoch_timeout.count() <= 0) throw std::invalid_argument("epoch timeout must be positive");
}

struct PluginSession::Impl {
  PluginDescriptor descriptor;
  pid_t pid = -1;
  Fd to_child;
  Fd from_child;
  std::string buffer;
  bool eof = false;

  ~Impl() {
    to_child.reset();
    from_child.reset();
    if (pid > 0) {
      // Give a well-behaved plugin a moment to exit on end of input.
      const auto deadline = Clock::now() + std::chrono::milliseconds(200);
      int status = 0;
      while (::waitpid(pid, &status, WNOHANG) == 0) {
        if (Clock::now() >= deadline) {
          ::kill(pid, SIGKILL);
          ::waitpid(pid, &status, 0);
          break;
        }
        ::usleep(2000);
      }
    }
  }
};

PluginSession::PluginSession(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
PluginSession::PluginSession(PluginSession&&) noexcept = default;
PluginSession& PluginSession::operator=(PluginSession&&) noexcept = default;
PluginSession::~PluginSession() = default;

const PluginDescriptor& PluginSession::descriptor() const { return impl_->descriptor; }

PluginSession PluginSession::launch(const PluginDescriptor& p) {
  validate(p);
  ::signal(SIGPIPE, SIG_IGN);
  auto [child_in, host_out] = make_pipe();
  auto [host_in, child_out] = make_pipe();
  auto [err_read, err_write] = make_pipe();

  std::vector<std::string> args = p.command;
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t parent = ::getpid();
  const pid_t pid = ::fork();
  if (pid < 0) throw SpawnError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::prctl(PR_SET_PDEATHSIG, SIGKILL);
    if (::getppid() != parent) ::_exit(127);
    ::dup2(child_in.get(), STDIN_FILENO);
    ::dup2(child_out.get(), STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_write.get(), &err, sizeof err);
    ::_exit(127);
  }
  err_write.reset();
  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(err_read.get(), &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  if (got == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    throw SpawnError("cannot start plugin '" + p.command.front() + "': " + std::strerror(exec_errno));
  }

  auto impl = std::make_unique<Impl>();
  impl->descriptor = p;
  impl->pid = pid;
  impl->to_child = std::move(host_out);
  impl->from_child = std::move(host_in);
  return PluginSession(std::move(impl));
}

bool PluginSession::alive() {
  if (impl_->pid <= 0) return false;
  int status = 0;
  const pid_t r = ::waitpid(impl_->pid, &status, WNOHANG);
  if (r == impl_->pid) {
    impl_->pid = -1;
    return false;
  }
  return r == 0;
}

void PluginSession::send(const nlohmann::json& message) {
  const std::string line = message.dump() + "\n";
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(impl_->to_child.get(), line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TrialFailed(std::string("plugin stopped reading: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

nlohmann::json PluginSession::receive(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    const auto nl = impl_->buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = impl_->buffer.substr(0, nl);
      impl_->buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("event") || !j["event"].is_string()) {
        throw ProtocolError("plugin sent a line that is not a protocol event: " + line.substr(0, 200));
      }
      return j;
    }
    if (impl_->eof) {
      if (!impl_->buffer.empty()) throw ProtocolError("plugin output ended inside a line");
      throw TrialFailed("plugin exited");
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw Timeout("no plugin event within " + std::to_string(timeout.count()) + " ms");
    pollfd pfd{impl_->from_child.get(), POLLIN, 0};
    const int r = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1'000'000)));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("poll: ") + std::strerror(errno));
    }
    if (r == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(impl_->from_child.get(), chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ProtocolError(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) {
      impl_->eof = true;
      continue;
    }
    impl_->buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

std::set<std::string> handshake(PluginSession& session) {
  const auto timeout = session.descriptor().epoch_timeout;
  auto exchange = [&](const nlohmann::json& message) {
    try {
      session.send(message);
      return session.receive(timeout);
    } catch (const TrialFailed& e) {
      throw ProtocolError(std::string("plugin exited during handshake: ") + e.what());
    }
  };
  const nlohmann::json ack = exchange({{"cmd", "hello"}, {"version", kProtocolVersion}});
  if (ack["event"] != "hello_ack") throw ProtocolError("expected hello_ack, got " + ack.dump());
  if (!ack.contains("version") || !ack["version"].is_number_integer() || ack["version"] != kProtocolVersion) {
    throw ProtocolError("plugin protocol version mismatch: " + ack.dump());
  }
  const nlohmann::json reply = exchange({{"cmd", "supported_hyperparameters"}});
  if (reply["event"] != "hyperparameters" || !reply.contains("names") || !reply["names"].is_array()) {
    throw ProtocolError("expected hyperparameters, got " + reply.dump());
  }
  std::set<std::string> names;
  for (const auto& n : reply["names"]) {
    if (!n.is_string()) throw ProtocolError("hyperparameter names must be strings");
    names.insert(n.get<std::string>());
  }
  return names;
}

SearchSpace restrict_space(const SearchSpace& space, const std::set<std::string>& supported) {
  SearchSpace out;
  for (const std::string& name : supported) {
    if (name == "transform") continue;
    auto it = space.find(name);
    if (it == space.end()) {
      throw UnsupportedSpace("plugin supports hyperparameter '" + name + "' which the search space lacks");
    }
    out.insert(*it);
  }
  if (auto it = space.find("transform"); it != space.end()) out.insert(*it);
  return out;
}

}  // namespace lemur::harness
