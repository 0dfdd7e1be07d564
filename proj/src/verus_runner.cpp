#include "vcot/verus_runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <charconv>
#include <cstdlib>
#include <cstring>

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::pipeline {

namespace fs = std::filesystem;

namespace {

bool executable(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

// Replaces every occurrence of `from` in `s`.
void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

struct ChildResult {
  std::string output;
  int exit_code = -1;
  bool timed_out = false;
};

ChildResult run_child(const fs::path& binary, const std::vector<std::string>& args, const fs::path& cwd, int timeout_seconds) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));

  std::vector<char*> argv;
  std::string bin = binary.string();
  argv.push_back(bin.data());
  std::vector<std::string> owned = args;
  for (auto& a : owned) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (::chdir(cwd.c_str()) != 0) ::_exit(126);
    ::execv(bin.c_str(), argv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);

  ChildResult result;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
  char buf[8192];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1000)));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) continue;
    auto n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
  }
  if (result.timed_out) ::kill(-pid, SIGKILL);
  ::close(fds[0]);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

}  // namespace

fs::path resolve_verus_binary(const std::string& configured) {
  if (!configured.empty()) {
    if (!executable(configured)) throw VerusUnavailable("verus binary '" + configured + "' is missing or not executable");
    return configured;
  }
  if (const char* env = std::getenv("VERUS_BIN"); env && *env) {
    if (!executable(env)) throw VerusUnavailable(std::string("VERUS_BIN='") + env + "' is missing or not executable");
    return env;
  }
  if (const char* path = std::getenv("PATH")) {
    std::string_view rest = path;
    while (!rest.empty()) {
      auto colon = rest.find(':');
      auto dir = rest.substr(0, colon);
      if (!dir.empty() && executable(fs::path(dir) / "verus")) return fs::path(dir) / "verus";
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
  }
  throw VerusUnavailable("no verus binary: set verus.binary in the config, VERUS_BIN, or put verus on PATH");
}

VerusDiagnostics parse_verus_output(std::string_view output, int exit_code, VerusMode mode) {
  VerusDiagnostics d;
  d.mode = mode;
  d.raw_output = std::string(output);
  auto lines = split_lines(output);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto t = trim(lines[i]);
    if (!t.starts_with("error")) continue;
    auto colon = t.find(": ");
    if (colon == std::string_view::npos) continue;
    auto head = t.substr(0, colon);
    if (head != "error" && !(head.starts_with("error[") && head.back() == ']')) continue;
    auto message = std::string(trim(t.substr(colon + 2)));
    if (message.starts_with("aborting due to")) continue;

    VerusError e;
    e.message = message;
    if (head.size() > 5) e.code = std::string(head.substr(6, head.size() - 7));
    // location: the first ` --> file:line:col` before the next diagnostic
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      auto l = trim(lines[j]);
      if (l.starts_with("error") || l.starts_with("warning")) break;
      if (!l.starts_with("-->")) continue;
      auto loc = trim(l.substr(3));
      auto c1 = loc.find(':');
      if (c1 == std::string_view::npos) break;
      auto num = loc.substr(c1 + 1);
      num = num.substr(0, num.find(':'));
      std::uint32_t line = 0;
      if (std::from_chars(num.data(), num.data() + num.size(), line).ec == std::errc{}) e.line = line;
      break;
    }
    d.errors.push_back(std::move(e));
  }
  if (exit_code != 0 && d.errors.empty())
    d.errors.push_back({0, "verus exited with status " + std::to_string(exit_code), std::nullopt, false});
  d.verified = exit_code == 0 && d.errors.empty();
  return d;
}

SubprocessVerus::SubprocessVerus(VerusSettings settings) : settings_(std::move(settings)) {
  if (settings_.timeout_seconds <= 0) throw ConfigError("verus timeout must be positive");
  binary_ = resolve_verus_binary(settings_.binary);
}

VerusDiagnostics SubprocessVerus::run(std::string_view source, VerusMode mode) {
  std::string tmpl = (fs::temp_directory_path() / "vcot-verus-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw Error(std::string("mkdtemp: ") + std::strerror(errno));
  fs::path dir = tmpl;
  struct Cleanup {
    fs::path d;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  } cleanup{dir};

  write_new_file(dir / "candidate.rs", source);
  std::vector<std::string> args = settings_.extra_args;
  if (mode == VerusMode::SyntaxOnly) args.push_back("--no-verify");
  args.push_back("candidate.rs");

  auto child = run_child(binary_, args, dir, settings_.timeout_seconds);
  if (child.exit_code == 127 && child.output.empty())
    throw VerusUnavailable("could not execute " + binary_.string());
  replace_all(child.output, dir.string() + "/", "");
  replace_all(child.output, dir.string(), ".");

  if (child.timed_out) {
    VerusDiagnostics d;
    d.mode = mode;
    d.raw_output = child.output;
    d.errors.push_back({0, "verus timed out after " + std::to_string(settings_.timeout_seconds) + " s", std::nullopt, true});
    return d;
  }
  return parse_verus_output(child.output, child.exit_code, mode);
}

}  // namespace vcot::pipeline
