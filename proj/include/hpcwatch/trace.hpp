#pragma once

// Interval-counter traces: one line per readout, "seconds,delta,event",
// with '#' comment lines (e.g. the "# started on ..." header perf writes).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hpcwatch/events.hpp"

namespace hpcwatch {

/// Delta reported by perf as "<not counted>" is kept as std::nullopt.
using Delta = std::optional<std::uint64_t>;

inline constexpr std::string_view kNotCounted = "<not counted>";

struct Sample {
    double timestamp = 0.0;  // seconds since trace start
    Delta delta;
    EventKind event;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct CommentLine {};
struct BlankLine {};

struct LineError {
    std::size_t line_no = 0;
    std::string reason;

    friend bool operator==(const LineError&, const LineError&) = default;
};

using ParsedLine = std::variant<Sample, CommentLine, BlankLine, LineError>;

/// Classifies and parses one physical line. `event_hint` supplies the event
/// name for two-field "seconds,delta" lines; without it such lines are errors.
ParsedLine parse_line(std::string_view line, std::size_t line_no,
                      const std::optional<EventKind>& event_hint = std::nullopt);

/// Formats a sample back into the ingest line format (no terminator).
std::string format_sample(const Sample& sample);

struct CounterSeries {
    EventKind event;
    std::vector<Sample> samples;
    double nominal_interval = 0.0;  // median gap between samples, 0 if < 2 samples

    void update_nominal_interval();
};

struct Trace {
    std::vector<CounterSeries> series;
    std::string origin;

    const CounterSeries* find(std::string_view event) const;
    std::size_t sample_count() const;
};

struct ParseDiagnostics {
    std::size_t lines_read = 0;
    std::size_t samples_parsed = 0;
    std::size_t comments_skipped = 0;
    std::size_t blank_lines = 0;
    std::vector<LineError> malformed;
    std::size_t not_counted = 0;
};

struct ParseResult {
    Trace trace;
    ParseDiagnostics diagnostics;
};

/// Reads every line of `in`. Per-line failures go into the diagnostics; a
/// sample whose timestamp does not advance its series is one of them.
ParseResult parse_stream(std::istream& in, const std::optional<EventKind>& event_hint = std::nullopt,
                         std::string origin = {});

/// Opens and parses a file. Throws Error if it cannot be read.
ParseResult parse_file(const std::string& path, const std::optional<EventKind>& event_hint = std::nullopt);

/// Union of single-or-multi-event traces; throws Error on a repeated event.
Trace merge_traces(std::span<const Trace> traces);

/// Every event on a shared grid of `tick_interval` seconds; tick i sits at
/// i * tick_interval.
struct AlignedTrace {
    double tick_interval = 0.0;
    std::size_t tick_count = 0;
    std::vector<EventKind> events;
    std::vector<std::vector<Delta>> values;  // [event][tick]

    double tick_time(std::size_t tick) const { return static_cast<double>(tick) * tick_interval; }
    /// Index into `events`, or nullopt.
    std::optional<std::size_t> index_of(std::string_view event) const;
};

/// Nearest-tick rounding; samples sharing a tick add up; empty slots are missing.
/// Throws Error if tick_interval <= 0 or a series is empty.
AlignedTrace align(const Trace& trace, double tick_interval);

/// Back to a Trace with one sample per non-missing slot, at the tick time.
Trace to_trace(const AlignedTrace& aligned);

/// One event per stream, in sample order.
void write_series(std::ostream& out, const CounterSeries& series);

/// All events interleaved by timestamp (series order breaks ties).
void write_trace(std::ostream& out, const Trace& trace);

}  // namespace hpcwatch
