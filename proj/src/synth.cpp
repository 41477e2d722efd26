#include "hpcwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal(double mu, double sigma)
{
    if (spare_) {
        double z = *spare_;
        spare_.reset();
        return mu + sigma * z;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return mu + sigma * r * std::cos(theta);
}

LogNormal default_baseline(const EventKind& event)
{
    // Medians loosely follow how often each event fires per 100ms of a busy
    // server loop. Not measured values.
    static const std::map<std::string, double, std::less<>> medians = {
        {"iTLB-load-misses", 2.0e3}, {"dTLB-loads", 4.0e6},     {"bus-cycles", 1.5e6},
        {"LLC-store-misses", 6.0e3}, {"LLC-loads", 9.0e4},      {"LLC-load-misses", 1.2e4},
    };
    constexpr double kSigma = 0.25;
    auto it = medians.find(event.name());
    return LogNormal{std::log(it == medians.end() ? 1.0e5 : it->second), kSigma};
}

std::size_t SynthConfig::tick_count() const
{
    return static_cast<std::size_t>(std::llround(duration / tick_interval));
}

std::vector<LogNormal> SynthConfig::effective_baseline() const
{
    if (!baseline.empty()) return baseline;
    std::vector<LogNormal> out;
    for (const auto& c : counters) out.push_back(default_baseline(c));
    return out;
}

void SynthConfig::validate() const
{
    if (!(duration > 0.0) || !std::isfinite(duration)) throw Error("duration must be > 0");
    if (!(tick_interval > 0.0) || !std::isfinite(tick_interval)) throw Error("tick interval must be > 0");
    if (counters.empty()) throw Error("no counters to generate");
    if (tick_count() == 0) throw Error("duration shorter than one tick");
    if (!baseline.empty() && baseline.size() != counters.size())
        throw Error("baseline list must match the counter list");
    for (const auto& b : effective_baseline()) {
        if (!(b.sigma > 0.0) || !std::isfinite(b.sigma)) throw Error("log-normal sigma must be > 0");
        if (!std::isfinite(b.mu)) throw Error("log-normal mu must be finite");
    }
    if (attack) {
        if (!(attack->magnitude >= 1.0) || !std::isfinite(attack->magnitude)) throw Error("attack magnitude must be >= 1");
        if (!(attack->at >= 0.0)) throw Error("attack time must be >= 0");
        if (attack->width < 1) throw Error("attack width must be >= 1 tick");
        auto first = static_cast<std::size_t>(std::llround(attack->at / tick_interval));
        if (first + attack->width > tick_count()) throw Error("attack runs past the end of the trace");
        for (const auto& a : attack->affected)
            if (std::find(counters.begin(), counters.end(), a) == counters.end())
                throw Error("attack affects unknown counter " + a.name());
    }
}

SynthResult generate_trace(const SynthConfig& config)
{
    config.validate();
    const auto ticks = config.tick_count();
    const auto baseline = config.effective_baseline();

    SynthResult out;
    std::size_t attack_first = 0;
    if (config.attack) {
        attack_first = static_cast<std::size_t>(std::llround(config.attack->at / config.tick_interval));
        out.truth.attack_tick = attack_first;
        out.truth.affected = config.attack->affected.empty() ? config.counters : config.attack->affected;
    }

    Rng rng(config.seed);
    for (std::size_t c = 0; c < config.counters.size(); ++c) {
        const auto& event = config.counters[c];
        const bool hit = config.attack && std::find(out.truth.affected.begin(), out.truth.affected.end(), event) !=
                                              out.truth.affected.end();
        CounterSeries series{event, {}, 0.0};
        series.samples.reserve(ticks);
        for (std::size_t t = 0; t < ticks; ++t) {
            double value = std::exp(rng.normal(baseline[c].mu, baseline[c].sigma));
            if (hit && t >= attack_first && t < attack_first + config.attack->width) value *= config.attack->magnitude;
            auto count = static_cast<std::uint64_t>(std::max(0.0, std::round(value)));
            series.samples.push_back(Sample{static_cast<double>(t) * config.tick_interval, count, event});
        }
        series.update_nominal_interval();
        out.trace.series.push_back(std::move(series));
    }
    out.trace.origin = "synth:seed=" + std::to_string(config.seed);
    return out;
}

EvalMetrics evaluate(std::span<const Alert> alerts, const GroundTruth& truth, std::size_t tolerance)
{
    EvalMetrics m;
    if (!truth.attack_tick) {
        m.false_positives = alerts.size();
        return m;
    }
    const auto attack = static_cast<std::int64_t>(*truth.attack_tick);
    const auto tol = static_cast<std::int64_t>(tolerance);
    for (const auto& a : alerts) {
        auto offset = static_cast<std::int64_t>(a.eval_tick) - attack;
        if (offset >= -tol && offset <= tol) {
            if (!m.detection_latency || offset < *m.detection_latency) m.detection_latency = offset;
        } else {
            ++m.false_positives;
        }
    }
    if (m.detection_latency)
        m.true_positives = 1;
    else
        m.false_negatives = 1;
    return m;
}

}  // namespace hpcwatch
