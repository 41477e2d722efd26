#pragma once

// Seeded synthetic interval traces with an optional injected attack, and
// scoring of detector alerts against the injection.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hpcwatch/detector.hpp"
#include "hpcwatch/events.hpp"
#include "hpcwatch/trace.hpp"

namespace hpcwatch {

/// exp(N(mu, sigma)) per tick, rounded to an integer count.
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

struct AttackSpec {
    double at = 0.0;          // seconds
    double magnitude = 20.0;  // >= 1
    std::size_t width = 2;    // ticks
    std::vector<EventKind> affected;  // empty means every counter
};

struct SynthConfig {
    std::uint64_t seed = 7;
    double duration = 60.0;
    double tick_interval = 0.100;
    std::vector<EventKind> counters = DetectorConfig::default_counters();
    std::vector<LogNormal> baseline;  // per counter; empty means default_baseline()
    std::optional<AttackSpec> attack;

    std::size_t tick_count() const;
    std::vector<LogNormal> effective_baseline() const;
    /// Throws Error on the first violated constraint.
    void validate() const;
};

/// Baseline used when a counter has none configured. Candidate counters get
/// magnitudes roughly in line with their event class; others a generic one.
LogNormal default_baseline(const EventKind& event);

struct GroundTruth {
    std::optional<std::size_t> attack_tick;
    std::vector<EventKind> affected;
};

struct SynthResult {
    Trace trace;
    GroundTruth truth;
};

SynthResult generate_trace(const SynthConfig& config);

struct EvalMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::optional<std::int64_t> detection_latency;  // ticks, only on detection

    friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

/// Alerts within +-tolerance ticks of the attack form the single true
/// positive; the earliest sets the latency. Everything else is a false positive.
EvalMetrics evaluate(std::span<const Alert> alerts, const GroundTruth& truth, std::size_t tolerance);

/// mt19937_64 with fixed uniform and Box-Muller normal mappings. The standard
/// distributions are implementation-defined and would make traces differ
/// between toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();  // [0, 1)
    double normal(double mu, double sigma);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace hpcwatch
