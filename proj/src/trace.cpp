#include "hpcwatch/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

namespace {

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n\v\f";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool parse_seconds(std::string_view text, double& out)
{
    if (text.empty()) return false;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out, std::chars_format::general);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool is_missing_marker(std::string_view text)
{
    // perf prints either marker when a counter was never scheduled.
    return text == kNotCounted || text == "<not supported>";
}

LineError error_at(std::size_t line_no, std::string reason)
{
    return LineError{line_no, std::move(reason)};
}

}  // namespace

ParsedLine parse_line(std::string_view line, std::size_t line_no, const std::optional<EventKind>& event_hint)
{
    auto body = trim(line);
    if (body.empty()) return BlankLine{};
    if (body.front() == '#') return CommentLine{};

    auto fields = split_fields(body);
    if (fields.size() < 2 || (fields.size() == 2 && !event_hint)) return error_at(line_no, "too few fields");

    Sample sample;
    if (!parse_seconds(fields[0], sample.timestamp)) return error_at(line_no, "non-numeric timestamp");
    if (sample.timestamp < 0.0) return error_at(line_no, "negative timestamp");

    auto delta_text = fields[1];
    if (is_missing_marker(delta_text)) {
        sample.delta = std::nullopt;
    } else {
        if (!delta_text.empty() && delta_text.front() == '-') {
            std::uint64_t ignored = 0;
            auto rest = delta_text.substr(1);
            auto [p, e] = std::from_chars(rest.data(), rest.data() + rest.size(), ignored);
            if (e != std::errc::invalid_argument && p == rest.data() + rest.size() && !rest.empty())
                return error_at(line_no, "negative delta");
            return error_at(line_no, "non-numeric delta");
        }
        std::uint64_t value = 0;
        const char* end = delta_text.data() + delta_text.size();
        auto [ptr, ec] = std::from_chars(delta_text.data(), end, value);
        if (ec == std::errc::result_out_of_range) return error_at(line_no, "delta out of range");
        if (ec != std::errc{} || ptr != end || delta_text.empty()) return error_at(line_no, "non-numeric delta");
        sample.delta = value;
    }

    if (fields.size() >= 3) {
        if (fields[2].empty()) return error_at(line_no, "missing event name");
        sample.event = EventKind(std::string(fields[2]));
    } else {
        sample.event = *event_hint;
    }
    return sample;
}

std::string format_sample(const Sample& sample)
{
    char head[64];
    std::snprintf(head, sizeof head, "%.9f,", sample.timestamp);
    std::string out = head;
    if (sample.delta) {
        char num[32];
        std::snprintf(num, sizeof num, "%" PRIu64, *sample.delta);
        out += num;
    } else {
        out += kNotCounted;
    }
    out += ',';
    out += sample.event.name();
    return out;
}

void CounterSeries::update_nominal_interval()
{
    if (samples.size() < 2) {
        nominal_interval = 0.0;
        return;
    }
    std::vector<double> gaps;
    gaps.reserve(samples.size() - 1);
    for (std::size_t i = 1; i < samples.size(); ++i) gaps.push_back(samples[i].timestamp - samples[i - 1].timestamp);
    std::sort(gaps.begin(), gaps.end());
    auto mid = gaps.size() / 2;
    nominal_interval = gaps.size() % 2 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
}

const CounterSeries* Trace::find(std::string_view event) const
{
    for (const auto& s : series)
        if (s.event.name() == event) return &s;
    return nullptr;
}

std::size_t Trace::sample_count() const
{
    std::size_t n = 0;
    for (const auto& s : series) n += s.samples.size();
    return n;
}

ParseResult parse_stream(std::istream& in, const std::optional<EventKind>& event_hint, std::string origin)
{
    ParseResult result;
    result.trace.origin = std::move(origin);
    auto& diag = result.diagnostics;
    std::map<std::string, std::size_t> slot;  // event name -> index in series

    std::string line;
    while (std::getline(in, line)) {
        ++diag.lines_read;
        auto parsed = parse_line(line, diag.lines_read, event_hint);
        if (std::holds_alternative<BlankLine>(parsed)) {
            ++diag.blank_lines;
        } else if (std::holds_alternative<CommentLine>(parsed)) {
            ++diag.comments_skipped;
        } else if (auto* err = std::get_if<LineError>(&parsed)) {
            diag.malformed.push_back(std::move(*err));
        } else {
            auto& sample = std::get<Sample>(parsed);
            auto [it, inserted] = slot.try_emplace(sample.event.name(), result.trace.series.size());
            if (inserted) result.trace.series.push_back(CounterSeries{sample.event, {}, 0.0});
            auto& series = result.trace.series[it->second];
            if (!series.samples.empty() && sample.timestamp <= series.samples.back().timestamp) {
                diag.malformed.push_back(error_at(diag.lines_read, "non-increasing timestamp"));
                continue;
            }
            ++diag.samples_parsed;
            if (!sample.delta) ++diag.not_counted;
            series.samples.push_back(std::move(sample));
        }
    }
    if (in.bad()) throw Error("read error in " + result.trace.origin);
    for (auto& s : result.trace.series) s.update_nominal_interval();
    return result;
}

ParseResult parse_file(const std::string& path, const std::optional<EventKind>& event_hint)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_stream(in, event_hint, path);
}

Trace merge_traces(std::span<const Trace> traces)
{
    Trace merged;
    std::set<std::string> seen;
    for (const auto& t : traces) {
        for (const auto& s : t.series) {
            if (!seen.insert(s.event.name()).second) throw Error("duplicate event across inputs: " + s.event.name());
            merged.series.push_back(s);
        }
        if (!t.origin.empty()) {
            if (!merged.origin.empty()) merged.origin += ';';
            merged.origin += t.origin;
        }
    }
    return merged;
}

std::optional<std::size_t> AlignedTrace::index_of(std::string_view event) const
{
    for (std::size_t i = 0; i < events.size(); ++i)
        if (events[i].name() == event) return i;
    return std::nullopt;
}

AlignedTrace align(const Trace& trace, double tick_interval)
{
    if (!(tick_interval > 0.0) || !std::isfinite(tick_interval)) throw Error("tick interval must be positive");

    AlignedTrace out;
    out.tick_interval = tick_interval;
    std::vector<std::vector<std::pair<std::size_t, Delta>>> mapped;
    std::size_t max_tick = 0;
    for (const auto& s : trace.series) {
        if (s.samples.empty()) throw Error("cannot align empty series " + s.event.name());
        auto& m = mapped.emplace_back();
        for (const auto& sample : s.samples) {
            auto tick = static_cast<std::size_t>(std::llround(sample.timestamp / tick_interval));  // keep in sync with tick_of()
            max_tick = std::max(max_tick, tick);
            m.emplace_back(tick, sample.delta);
        }
        out.events.push_back(s.event);
    }
    out.tick_count = trace.series.empty() ? 0 : max_tick + 1;
    for (const auto& m : mapped) {
        auto& row = out.values.emplace_back(out.tick_count);
        for (const auto& [tick, delta] : m) {
            if (!delta) continue;
            row[tick] = row[tick].value_or(0) + *delta;
        }
    }
    return out;
}

Trace to_trace(const AlignedTrace& aligned)
{
    Trace out;
    for (std::size_t e = 0; e < aligned.events.size(); ++e) {
        CounterSeries series{aligned.events[e], {}, 0.0};
        for (std::size_t t = 0; t < aligned.tick_count; ++t) {
            if (aligned.values[e][t]) series.samples.push_back(Sample{aligned.tick_time(t), aligned.values[e][t], aligned.events[e]});
        }
        series.update_nominal_interval();
        out.series.push_back(std::move(series));
    }
    return out;
}

void write_series(std::ostream& out, const CounterSeries& series)
{
    for (const auto& s : series.samples) out << format_sample(s) << '\n';
}

void write_trace(std::ostream& out, const Trace& trace)
{
    std::vector<const Sample*> all;
    all.reserve(trace.sample_count());
    for (const auto& s : trace.series)
        for (const auto& sample : s.samples) all.push_back(&sample);
    // stable: equal timestamps keep series order
    std::stable_sort(all.begin(), all.end(), [](const Sample* a, const Sample* b) { return a->timestamp < b->timestamp; });
    for (const auto* s : all) out << format_sample(*s) << '\n';
}

}  // namespace hpcwatch
