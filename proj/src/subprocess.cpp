#include "qplace/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace qplace {

namespace {

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

using Clock = std::chrono::steady_clock;

int remaining_ms(std::optional<Clock::time_point> deadline) {
  if (!deadline) return -1;
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

}  // namespace

SubprocessResult run_subprocess(const std::string& command, const std::string& stdin_data,
                                std::optional<int> timeout_ms) {
  // A write into a pipe whose reader died must come back as EPIPE, not kill us.
  static const auto ignore_sigpipe = [] { return signal(SIGPIPE, SIG_IGN); }();
  (void)ignore_sigpipe;

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
    throw std::runtime_error("run_subprocess: pipe() failed");

  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("run_subprocess: fork() failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
      close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  set_nonblocking(in_pipe[1]);
  set_nonblocking(out_pipe[0]);
  set_nonblocking(err_pipe[0]);

  std::optional<Clock::time_point> deadline;
  if (timeout_ms) deadline = Clock::now() + std::chrono::milliseconds(*timeout_ms);

  SubprocessResult result;
  std::size_t written = 0;
  bool stdin_open = true, stdout_open = true, stderr_open = true;
  char buf[4096];

  while (stdin_open || stdout_open || stderr_open) {
    if (stdin_open && written >= stdin_data.size()) {
      close(in_pipe[1]);
      stdin_open = false;
      continue;
    }

    pollfd fds[3];
    int nfds = 0;
    int idx_in = -1, idx_out = -1, idx_err = -1;
    if (stdin_open) { idx_in = nfds; fds[nfds++] = {in_pipe[1], POLLOUT, 0}; }
    if (stdout_open) { idx_out = nfds; fds[nfds++] = {out_pipe[0], POLLIN, 0}; }
    if (stderr_open) { idx_err = nfds; fds[nfds++] = {err_pipe[0], POLLIN, 0}; }

    const int rc = poll(fds, nfds, remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) {  // deadline hit
      kill(pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      if (stdin_open) close(in_pipe[1]);
      if (stdout_open) close(out_pipe[0]);
      if (stderr_open) close(err_pipe[0]);
      result.timed_out = true;
      result.exit_code = -1;
      return result;
    }

    if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w =
          write(in_pipe[1], stdin_data.data() + written, stdin_data.size() - written);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        close(in_pipe[1]);  // consumer is gone; EPIPE and friends
        stdin_open = false;
      }
      if (stdin_open && written >= stdin_data.size()) {
        close(in_pipe[1]);
        stdin_open = false;
      }
    }
    if (idx_out >= 0 && (fds[idx_out].revents & (POLLIN | POLLHUP))) {
      const ssize_t r = read(out_pipe[0], buf, sizeof buf);
      if (r > 0) {
        result.out.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR)) {
        close(out_pipe[0]);
        stdout_open = false;
      }
    }
    if (idx_err >= 0 && (fds[idx_err].revents & (POLLIN | POLLHUP))) {
      const ssize_t r = read(err_pipe[0], buf, sizeof buf);
      if (r > 0) {
        result.err.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (r < 0 && errno != EAGAIN && errno != EINTR)) {
        close(err_pipe[0]);
        stderr_open = false;
      }
    }
  }

  // Streams are closed; wait for the exit status, still honoring the deadline.
  int status = 0;
  for (;;) {
    const pid_t done = waitpid(pid, &status, deadline ? WNOHANG : 0);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (deadline && remaining_ms(deadline) == 0) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      result.exit_code = -1;
      return result;
    }
    if (deadline) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exit_code = 128 + WTERMSIG(status);
  return result;
}

}  // namespace qplace
