#pragma once

// Streaming attack-factor detector.
//
// Each counter keeps a ring of its last `window` deltas. Once a counter has
// seen `warmup` deltas, every new delta scores the point lag(k) positions
// behind it, so the scored point has neighbours on both sides in time. The
// attack factor of a tick is the mean LOF over the counters that scored it;
// an alert fires when it strictly exceeds the threshold.

#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hpcwatch/events.hpp"
#include "hpcwatch/lof.hpp"
#include "hpcwatch/trace.hpp"

namespace hpcwatch {

struct DetectorConfig {
    std::size_t k = 5;
    double delta_threshold = 1.5;
    std::size_t window = 50;
    double tick_interval = 0.100;
    std::vector<EventKind> counters = default_counters();
    std::size_t top_n = 5;
    std::optional<std::size_t> warmup;  // unset means 2k + 2

    static std::vector<EventKind> default_counters();

    std::size_t effective_warmup() const { return warmup.value_or(2 * k + 2); }

    /// Throws Error naming the first violated constraint.
    void validate() const;
};

/// floor(k / 2) + 1
inline std::size_t lag(const DetectorConfig& config) { return config.k / 2 + 1; }

struct WindowState {
    EventKind event;
    std::deque<std::pair<std::size_t, double>> ring;  // (tick, delta), arrival order
    std::size_t count = 0;                             // deltas pushed so far

    explicit WindowState(EventKind e) : event(std::move(e)) {}
};

struct ScoredPoint {
    std::size_t tick = 0;
    double lof = 0.0;
};

/// Pushes one real-valued delta at `tick`.
std::optional<ScoredPoint> push_value(WindowState& state, std::size_t tick, double value, const DetectorConfig& config);

/// Throws Error on event mismatch; a missing delta is a no-op.
std::optional<ScoredPoint> push_sample(WindowState& state, const Sample& sample, const DetectorConfig& config);

using PerCounterLof = std::vector<std::pair<EventKind, double>>;

struct AttackFactorPoint {
    std::size_t tick = 0;       // newest tick when evaluated
    std::size_t eval_tick = 0;  // tick - lag
    double f = 0.0;
    PerCounterLof per_counter_lof;
    std::size_t contributing = 0;
};

struct Alert {
    std::size_t eval_tick = 0;
    double eval_time = 0.0;
    double f = 0.0;
    double threshold = 0.0;
    PerCounterLof per_counter_lof;
};

struct CounterScores {
    EventKind event;
    std::map<std::size_t, double> scores;  // eval tick -> lof
};

/// Mean over counters with a score at tick - lag(config); nullopt when none has one.
std::optional<AttackFactorPoint> evaluate_tick(std::span<const CounterScores> states, std::size_t tick,
                                               const DetectorConfig& config);

std::optional<Alert> threshold_check(const AttackFactorPoint& point, const DetectorConfig& config);

/// Output of one step of the streaming driver, in eval-tick order.
struct DetectorOutput {
    std::vector<AttackFactorPoint> points;
    std::vector<Alert> alerts;
};

/// Drives per-counter windows and evaluates a tick once no active counter can
/// still score it (each has lag deltas past it, gaps excluded). Counters are active from construction
/// (`declared`) or from their first sample. Samples of unconfigured events
/// are ignored. Per counter, ticks must strictly increase.
class StreamingDetector {
public:
    explicit StreamingDetector(DetectorConfig config, std::vector<EventKind> declared = {});

    /// Scores and evaluates as far as the data allows. Throws Error if the
    /// sample's tick does not advance its counter.
    DetectorOutput push(const Sample& sample);
    DetectorOutput push_value(const EventKind& event, std::size_t tick, std::optional<double> value);

    /// Evaluates everything still pending.
    DetectorOutput finish();

    const DetectorConfig& config() const { return config_; }
    /// Latest tick seen per counter, nullopt before the first one.
    std::optional<std::size_t> latest_tick(const EventKind& event) const;

private:
    struct Counter {
        WindowState window;
        CounterScores scores;
        std::optional<std::size_t> latest;
    };

    Counter* counter_for(const EventKind& event);
    DetectorOutput drain(bool all);

    DetectorConfig config_;
    std::vector<Counter> counters_;  // config order
    std::optional<std::size_t> evaluated_through_;
};

struct Outlier {
    std::size_t tick = 0;
    double time = 0.0;
    double value = 0.0;
    double lof = 0.0;
    std::size_t rank = 0;  // 1-based
};

/// Batch LOF over a counter's whole series, for reports and plots.
struct CounterOutliers {
    EventKind event;
    std::vector<std::size_t> ticks;  // tick of each non-missing point
    std::vector<double> values;
    std::vector<LofResult> lofs;     // empty if too few points
    std::vector<Outlier> top;
};

struct OfflineResult {
    std::vector<EventKind> counters;
    std::vector<AttackFactorPoint> points;
    std::vector<Alert> alerts;
    std::vector<CounterOutliers> outliers;
};

/// Configured counters present in the trace, in config order.
std::vector<EventKind> select_counters(const AlignedTrace& trace, const DetectorConfig& config);

/// Throws Error if no configured counter is present.
OfflineResult run_offline(const AlignedTrace& trace, const DetectorConfig& config);

/// Nearest grid tick, the same rounding align() uses.
inline std::size_t tick_of(double timestamp, double tick_interval)
{
    return static_cast<std::size_t>(std::llround(timestamp / tick_interval));
}

}  // namespace hpcwatch
