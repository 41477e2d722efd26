#pragma once

// Live capture through an external interval profiler (perf stat -I -x,).
// This is the only host-dependent part of the tool.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpcwatch/error.hpp"
#include "hpcwatch/events.hpp"

namespace hpcwatch {

class CaptureError : public Error {
public:
    enum class Kind { ProfilerMissing, PermissionDenied, TargetNotFound, ProfilerFailed };

    CaptureError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct CaptureRequest {
    std::string profiler = "perf";
    std::optional<long> pid;
    std::vector<std::string> command;
    std::vector<EventKind> events;
    unsigned interval_ms = 100;
    std::string out_path;
};

/// One line of `perf stat -I N -x,` output ("time,count,unit,event,...") as an
/// ingest line "time,count,event". Comments pass through; blank lines and
/// lines with too few fields give nullopt.
std::optional<std::string> normalize_perf_line(std::string_view line);

void normalize_perf_output(std::istream& in, std::ostream& out);

/// Path of an executable: `name` itself if it contains '/', else the first
/// match on PATH.
std::optional<std::string> find_executable(const std::string& name);

/// Runs the profiler and writes the normalized trace to request.out_path.
/// Throws CaptureError for environment problems, Error for bad requests.
void capture(const CaptureRequest& request);

}  // namespace hpcwatch
