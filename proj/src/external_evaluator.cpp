// Copyright 2026 The carbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "carbo/external_evaluator.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "carbo/errors.hpp"

namespace carbo {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Child {
  pid_t pid = -1;
  int out_fd = -1;
  std::string buffer;
  bool done = false;
  bool timed_out = false;
  Clock::time_point start;
  double wall = 0.0;
};

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;  // child closed stdin; its response decides the outcome
    }
    off += static_cast<std::size_t>(n);
  }
}

Child spawn(const std::vector<std::string>& argv, const std::string& request) {
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw EvaluatorUnavailable(std::string("pipe failed: ") + std::strerror(errno));
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  Child c;
  c.start = Clock::now();
  c.pid = ::fork();
  if (c.pid < 0) {
    throw EvaluatorUnavailable(std::string("fork failed: ") + std::strerror(errno));
  }
  if (c.pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    const int e = errno;
    [[maybe_unused]] ssize_t ignored = ::write(err_pipe[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(err_pipe[0], &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::waitpid(c.pid, nullptr, 0);
    throw EvaluatorUnavailable("cannot run '" + argv[0] + "': " + std::strerror(exec_errno));
  }
  write_all(in_pipe[1], request);
  ::close(in_pipe[1]);
  c.out_fd = out_pipe[0];
  return c;
}

void reap(Child& c, Clock::time_point deadline) {
  if (c.out_fd >= 0) {
    ::close(c.out_fd);
    c.out_fd = -1;
  }
  while (true) {
    const pid_t r = ::waitpid(c.pid, nullptr, WNOHANG);
    if (r == c.pid || (r < 0 && errno != EINTR)) return;
    if (Clock::now() >= deadline) {
      ::kill(c.pid, SIGKILL);
      ::waitpid(c.pid, nullptr, 0);
      return;
    }
    ::usleep(1000);
  }
}

}  // namespace

std::string_view to_string(CostSource source) {
  return source == CostSource::kReported ? "reported" : "wall-clock";
}

CostSource parse_cost_source(std::string_view text) {
  if (text == "reported") return CostSource::kReported;
  if (text == "wall-clock") return CostSource::kWallClock;
  throw ConfigError("unknown cost source '" + std::string(text) +
                    "' (expected reported or wall-clock)");
}

EvalResult parse_response(const std::string& line, std::uint64_t id,
                          double wall_seconds, CostSource source) {
  EvalResult r;
  r.cost = wall_seconds;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    r.error = "malformed response";
    return r;
  }
  if (!j.is_object()) {
    r.error = "response is not an object";
    return r;
  }
  if (!j.contains("id") || !j["id"].is_number_integer() ||
      j["id"].get<std::uint64_t>() != id) {
    r.error = "response id does not match request " + std::to_string(id);
    return r;
  }
  if (source == CostSource::kReported && j.contains("cost") && j["cost"].is_number()) {
    const double c = j["cost"].get<double>();
    if (c > 0.0 && std::isfinite(c)) r.cost = c;
  }
  if (!j.contains("objective") || !j["objective"].is_number()) {
    r.error = j.contains("error") && j["error"].is_string()
                  ? j["error"].get<std::string>()
                  : "response has no numeric objective";
    return r;
  }
  const double y = j["objective"].get<double>();
  if (!std::isfinite(y)) {
    r.error = "non-finite objective";
    return r;
  }
  r.objective = y;
  return r;
}

ExternalEvaluator::ExternalEvaluator(ExternalProblem problem)
    : problem_(std::move(problem)) {
  if (problem_.command.empty()) throw ConfigError("external problem: empty command");
  if (!(problem_.timeout_seconds > 0.0)) {
    throw ConfigError("external problem: timeout must be positive");
  }
  ignore_sigpipe();
}

std::vector<EvalResult> ExternalEvaluator::evaluate_batch(
    std::span<const Point> points, std::span<const std::uint64_t> seeds) {
  (void)seeds;
  const auto timeout = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(problem_.timeout_seconds));
  std::vector<Child> children;
  std::vector<std::uint64_t> ids;
  children.reserve(points.size());
  try {
    for (const auto& p : points) {
      const std::uint64_t id = next_id_++;
      json req;
      req["id"] = id;
      req["params"] = to_json(p.raw);
      children.push_back(spawn(problem_.command, req.dump() + "\n"));
      ids.push_back(id);
    }
  } catch (...) {
    for (auto& c : children) {
      ::kill(c.pid, SIGKILL);
      reap(c, Clock::now());
    }
    throw;
  }

  std::size_t pending = children.size();
  while (pending > 0) {
    std::vector<pollfd> fds;
    std::vector<std::size_t> which;
    auto next_deadline = Clock::time_point::max();
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (children[i].done) continue;
      fds.push_back({children[i].out_fd, POLLIN, 0});
      which.push_back(i);
      next_deadline = std::min(next_deadline, children[i].start + timeout);
    }
    const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(
        next_deadline - Clock::now());
    const int ms = static_cast<int>(std::max<std::int64_t>(0, wait.count()) + 1);
    const int rc = ::poll(fds.data(), fds.size(), ms);
    if (rc < 0 && errno != EINTR) {
      throw EvaluatorUnavailable(std::string("poll failed: ") + std::strerror(errno));
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
      Child& c = children[which[k]];
      bool finished = false;
      if (fds[k].revents & (POLLIN | POLLHUP | POLLERR)) {
        char buf[4096];
        const ssize_t n = ::read(c.out_fd, buf, sizeof buf);
        if (n > 0) {
          c.buffer.append(buf, static_cast<std::size_t>(n));
          finished = c.buffer.find('\n') != std::string::npos;
        } else if (n == 0 || errno != EINTR) {
          finished = true;
        }
      }
      if (!finished && Clock::now() >= c.start + timeout) {
        c.timed_out = true;
        ::kill(c.pid, SIGKILL);
        finished = true;
      }
      if (finished) {
        c.wall = seconds_since(c.start);
        c.done = true;
        --pending;
      }
    }
  }

  std::vector<EvalResult> out(children.size());
  for (std::size_t i = 0; i < children.size(); ++i) {
    Child& c = children[i];
    reap(c, Clock::now() + std::chrono::seconds(1));
    if (c.timed_out) {
      out[i].cost = c.wall;
      out[i].error = "timed out after " + std::to_string(problem_.timeout_seconds) + " s";
      continue;
    }
    const auto nl = c.buffer.find('\n');
    if (nl == std::string::npos && c.buffer.empty()) {
      out[i].cost = c.wall;
      out[i].error = "evaluator exited without a response";
      continue;
    }
    out[i] = parse_response(c.buffer.substr(0, nl), ids[i], c.wall, problem_.cost_source);
  }
  return out;
}

}  // namespace carbo
