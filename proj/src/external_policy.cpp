// Copyright 2026 The minidrive Authors
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

#include "minidrive/policy.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace minidrive
{

using nlohmann::json;

namespace
{

void write_all(int fd, const std::string & data)
{
  size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw PolicyError(std::string("cannot write to policy process: ") + std::strerror(errno));
    }
    done += static_cast<size_t>(n);
  }
}

}  // namespace

ExternalPolicy::ExternalPolicy(const std::string & command, ExternalPolicyOptions options)
: options_(options)
{
  // A dead child must surface as a write error, not kill the simulator.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw PolicyError("pipe() failed");
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw PolicyError("pipe() failed");
  }
  pid_ = ::fork();
  if (pid_ < 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw PolicyError("fork() failed");
  }
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    const std::string reply = exchange(make_hello_request());
    json msg;
    try {
      msg = json::parse(reply);
    } catch (const json::parse_error &) {
      throw PolicyError("malformed hello response: " + reply);
    }
    if (
      !msg.is_object() || msg.value("type", std::string()) != "hello" ||
      !msg.contains("schema_version") || msg["schema_version"] != kProtocolSchemaVersion) {
      throw PolicyError("policy process rejected the hello handshake: " + reply);
    }
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalPolicy::~ExternalPolicy() { shutdown(); }

void ExternalPolicy::shutdown()
{
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment, then kill.
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(500);
    int status = 0;
    while (::waitpid(pid_, &status, WNOHANG) == 0) {
      if (std::chrono::steady_clock::now() > deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    pid_ = -1;
  }
}

std::string ExternalPolicy::exchange(const std::string & request_line)
{
  if (broken_ || to_child_ < 0) {
    throw PolicyError("policy session is no longer usable");
  }
  try {
    write_all(to_child_, request_line + "\n");
  } catch (...) {
    broken_ = true;
    throw;
  }

  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      broken_ = true;
      throw PolicyError(
        "policy process timed out after " + std::to_string(options_.timeout.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) {
        continue;
      }
      broken_ = true;
      throw PolicyError("poll() failed on policy process");
    }
    if (ready == 0) {
      continue;
    }
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      broken_ = true;
      throw PolicyError("read() failed on policy process");
    }
    if (n == 0) {
      broken_ = true;
      throw PolicyError("policy process closed its output");
    }
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

Decision ExternalPolicy::decide(const Observation & obs)
{
  obs.validate();
  const std::uint64_t id = next_id_++;
  const std::string reply = exchange(make_decide_request(obs, id, options_.rasters));
  return parse_decision_response(reply, id);
}

}  // namespace minidrive
