#include "csel/oracle.hpp"

#include <cerrno>
#include <charconv>
#include <csignal>
#include <cstring>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace csel {

ProcessBackend::ProcessBackend(const std::string& command) : command_(command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw OracleError("pipe: " + std::string(std::strerror(errno)));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw OracleError("pipe: " + std::string(std::strerror(errno)));
  }
  // A dead child must surface as a write error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::string sh = "/bin/sh";
  std::string flag = "-c";
  std::vector<char*> argv = {sh.data(), flag.data(), command_.data(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    pid_ = -1;
    throw OracleError("failed to spawn oracle command: " + std::string(std::strerror(rc)));
  }
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw OracleError("fdopen failed for oracle pipes");
  }
}

ProcessBackend::~ProcessBackend() {
  if (to_child_ != nullptr) std::fclose(to_child_);
  if (from_child_ != nullptr) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

int ProcessBackend::wait_child() {
  if (pid_ <= 0) return 0;
  int status = 0;
  while (waitpid(pid_, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  pid_ = -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

double ProcessBackend::fetch(Index i) {
  if (to_child_ == nullptr) throw OracleError("oracle process already finished");
  if (std::fprintf(to_child_, "%lld\n", static_cast<long long>(i)) < 0 || std::fflush(to_child_) != 0) {
    throw OracleError("oracle process closed its input");
  }
  char buf[256];
  if (std::fgets(buf, sizeof buf, from_child_) == nullptr) {
    std::fclose(to_child_);
    to_child_ = nullptr;
    const int code = wait_child();
    throw OracleError("oracle process produced no reply for index " + std::to_string(i) +
                      " (exit status " + std::to_string(code) + ")");
  }
  std::string_view line(buf);
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
  if (ec != std::errc() || ptr != line.data() + line.size() || line.empty()) {
    throw OracleError("unparsable oracle reply '" + std::string(line) + "'");
  }
  return value;
}

void ProcessBackend::finish() {
  if (to_child_ != nullptr) {
    std::fclose(to_child_);
    to_child_ = nullptr;
  }
  const int code = wait_child();
  if (code != 0) {
    throw OracleError("oracle process exited with status " + std::to_string(code));
  }
}

LossOracle::LossOracle(std::unique_ptr<LossBackend> backend, Index n, Index budget)
    : backend_(std::move(backend)), n_(n), budget_(budget) {
  if (n_ < 1) throw DataError("oracle over an empty dataset");
  if (budget_ < 0) throw DataError("oracle budget must be non-negative");
}

LossOracle::LossOracle(LossOracle&& other) noexcept
    : backend_(std::move(other.backend_)),
      n_(other.n_),
      budget_(other.budget_),
      cache_(std::move(other.cache_)) {}

LossOracle LossOracle::from_table(LossTable table, Index budget) {
  const Index n = table.size();
  return LossOracle(std::make_unique<TableBackend>(std::move(table)), n, budget);
}

LossOracle LossOracle::from_command(const std::string& command, Index n, Index budget) {
  return LossOracle(std::make_unique<ProcessBackend>(command), n, budget);
}

double LossOracle::query(Index i) {
  std::lock_guard lock(mutex_);
  if (i < 0 || i >= n_) {
    throw DataError("oracle query index " + std::to_string(i) + " out of range");
  }
  if (auto it = cache_.find(i); it != cache_.end()) return it->second;
  if (static_cast<Index>(cache_.size()) >= budget_) {
    throw BudgetExhausted("loss oracle budget of " + std::to_string(budget_) +
                          " queries exhausted (index " + std::to_string(i) + ")");
  }
  const double value = backend_->fetch(i);
  if (!std::isfinite(value) || value < 0.0) {
    throw OracleError("oracle returned invalid loss for index " + std::to_string(i));
  }
  cache_.emplace(i, value);
  return value;
}

Index LossOracle::queries_used() const {
  std::lock_guard lock(mutex_);
  return static_cast<Index>(cache_.size());
}

std::optional<double> LossOracle::cached(Index i) const {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(i); it != cache_.end()) return it->second;
  return std::nullopt;
}

void LossOracle::finish() {
  std::lock_guard lock(mutex_);
  backend_->finish();
}

}  // namespace csel
