#include "hpcwatch/capture.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fcntl.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace hpcwatch {

namespace {

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

bool contains(std::string_view haystack, std::string_view needle) { return haystack.find(needle) != std::string_view::npos; }

class TempPath {
public:
    explicit TempPath(const char* stem)
    {
        auto pattern = (std::filesystem::temp_directory_path() / (std::string(stem) + "-XXXXXX")).string();
        int fd = ::mkstemp(pattern.data());
        if (fd < 0) throw Error("cannot create temporary file");
        ::close(fd);
        path_ = pattern;
    }
    ~TempPath()
    {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempPath(const TempPath&) = delete;
    TempPath& operator=(const TempPath&) = delete;

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct SpawnResult {
    int status = 0;
    std::string stderr_text;
};

SpawnResult run(const std::vector<std::string>& argv, bool ignore_sigint)
{
    TempPath err("hpcwatch-stderr");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err.path().c_str(), O_WRONLY | O_TRUNC, 0600);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    sigset_t defaults;
    sigemptyset(&defaults);
    sigaddset(&defaults, SIGINT);
    posix_spawnattr_setsigdefault(&attr, &defaults);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGDEF);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    // perf stops on ^C; we must survive it to convert the output.
    struct sigaction old_action {};
    struct sigaction ignore {};
    ignore.sa_handler = SIG_IGN;
    if (ignore_sigint) sigaction(SIGINT, &ignore, &old_action);

    pid_t child = 0;
    int rc = posix_spawn(&child, args[0], &actions, &attr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);

    SpawnResult result;
    if (rc != 0) {
        if (ignore_sigint) sigaction(SIGINT, &old_action, nullptr);
        throw CaptureError(CaptureError::Kind::ProfilerMissing, "profiler not found: " + argv[0]);
    }
    while (waitpid(child, &result.status, 0) < 0 && errno == EINTR) {
    }
    if (ignore_sigint) sigaction(SIGINT, &old_action, nullptr);
    result.stderr_text = slurp(err.path());
    return result;
}

}  // namespace

std::optional<std::string> normalize_perf_line(std::string_view line)
{
    auto body = trim(line);
    if (body.empty()) return std::nullopt;
    if (body.front() == '#') return std::string(body);

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = body.find(',', start);
        fields.push_back(trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (fields.size() == 3) return std::string(body);  // already time,count,event
    if (fields.size() < 4 || fields[3].empty()) return std::nullopt;
    return std::string(fields[0]) + ',' + std::string(fields[1]) + ',' + std::string(fields[3]);
}

void normalize_perf_output(std::istream& in, std::ostream& out)
{
    std::string line;
    while (std::getline(in, line))
        if (auto converted = normalize_perf_line(line)) out << *converted << '\n';
}

std::optional<std::string> find_executable(const std::string& name)
{
    auto runnable = [](const std::string& p) { return ::access(p.c_str(), X_OK) == 0 && !std::filesystem::is_directory(p); };
    if (name.empty()) return std::nullopt;
    if (name.find('/') != std::string::npos) return runnable(name) ? std::optional(name) : std::nullopt;
    const char* path = std::getenv("PATH");
    if (!path) return std::nullopt;
    std::string_view dirs(path);
    std::size_t start = 0;
    while (start <= dirs.size()) {
        auto colon = dirs.find(':', start);
        auto dir = dirs.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
        auto candidate = (dir.empty() ? std::string(".") : std::string(dir)) + "/" + name;
        if (runnable(candidate)) return candidate;
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    return std::nullopt;
}

void capture(const CaptureRequest& request)
{
    if (request.events.empty()) throw Error("no events to capture");
    if (request.interval_ms == 0) throw Error("interval must be > 0 ms");
    if (request.out_path.empty()) throw Error("no output file given");
    if (request.pid.has_value() == !request.command.empty()) throw Error("give exactly one of a pid or a command");

    auto profiler = find_executable(request.profiler);
    if (!profiler) throw CaptureError(CaptureError::Kind::ProfilerMissing, "profiler not found: " + request.profiler);

    if (request.pid) {
        if (*request.pid <= 0 || (::kill(static_cast<pid_t>(*request.pid), 0) != 0 && errno == ESRCH))
            throw CaptureError(CaptureError::Kind::TargetNotFound, "target not found: pid " + std::to_string(*request.pid));
    } else if (!find_executable(request.command.front())) {
        throw CaptureError(CaptureError::Kind::TargetNotFound, "target not found: " + request.command.front());
    }

    std::string events;
    for (const auto& e : request.events) events += (events.empty() ? "" : ",") + e.name();

    TempPath raw("hpcwatch-perf");
    std::vector<std::string> argv = {*profiler, "stat", "-I", std::to_string(request.interval_ms), "-x", ",", "-e", events,
                                     "-o", raw.path()};
    if (request.pid) {
        argv.insert(argv.end(), {"-p", std::to_string(*request.pid)});
    } else {
        argv.push_back("--");
        argv.insert(argv.end(), request.command.begin(), request.command.end());
    }

    auto result = run(argv, request.pid.has_value());
    const bool ok = WIFEXITED(result.status) && WEXITSTATUS(result.status) == 0;
    const bool interrupted = WIFSIGNALED(result.status) && WTERMSIG(result.status) == SIGINT;
    if (!ok && !interrupted) {
        const auto& msg = result.stderr_text;
        if (contains(msg, "ermission") || contains(msg, "perf_event_paranoid") || contains(msg, "Access to performance monitoring"))
            throw CaptureError(CaptureError::Kind::PermissionDenied, "permission denied: " + std::string(trim(msg)));
        if (contains(msg, "No such process") || contains(msg, "No such file"))
            throw CaptureError(CaptureError::Kind::TargetNotFound, "target not found: " + std::string(trim(msg)));
        throw CaptureError(CaptureError::Kind::ProfilerFailed, "profiler failed: " + std::string(trim(msg)));
    }

    std::ifstream in(raw.path());
    std::ofstream out(request.out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + request.out_path);
    normalize_perf_output(in, out);
    if (!out) throw Error("cannot write " + request.out_path);
}

}  // namespace hpcwatch
