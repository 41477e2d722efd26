#include "hpcwatch/detector.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

std::vector<EventKind> DetectorConfig::default_counters()
{
    std::vector<EventKind> out;
    for (auto name : kCandidateEvents) out.emplace_back(std::string(name));
    return out;
}

void DetectorConfig::validate() const
{
    if (k < 2) throw Error("k must be >= 2");
    if (window < k + 2) throw Error("window must be >= k + 2");
    if (!(delta_threshold > 1.0) || !std::isfinite(delta_threshold)) throw Error("delta threshold must be > 1");
    if (!(tick_interval > 0.0) || !std::isfinite(tick_interval)) throw Error("tick interval must be > 0");
    if (counters.empty()) throw Error("counter list is empty");
    if (top_n < 1) throw Error("top must be >= 1");
    if (effective_warmup() < k + 1) throw Error("warmup must be >= k + 1");
    std::set<std::string> names;
    for (const auto& c : counters)
        if (!names.insert(c.name()).second) throw Error("counter listed twice: " + c.name());
}

std::optional<ScoredPoint> push_value(WindowState& state, std::size_t tick, double value, const DetectorConfig& config)
{
    state.ring.emplace_back(tick, value);
    if (state.ring.size() > config.window) state.ring.pop_front();
    ++state.count;
    if (state.count < config.effective_warmup()) return std::nullopt;

    std::vector<double> values;
    values.reserve(state.ring.size());
    for (const auto& [t, v] : state.ring) values.push_back(v);
    const auto position = state.ring.size() - 1 - lag(config);
    return ScoredPoint{state.ring[position].first, lof(PointSet(std::move(values)), position, config.k)};
}

std::optional<ScoredPoint> push_sample(WindowState& state, const Sample& sample, const DetectorConfig& config)
{
    if (sample.event != state.event)
        throw Error("sample event " + sample.event.name() + " pushed to window of " + state.event.name());
    if (!sample.delta) return std::nullopt;
    return push_value(state, tick_of(sample.timestamp, config.tick_interval), static_cast<double>(*sample.delta),
                      config);
}

std::optional<AttackFactorPoint> evaluate_tick(std::span<const CounterScores> states, std::size_t tick,
                                               const DetectorConfig& config)
{
    const auto lag_ticks = lag(config);
    if (tick < lag_ticks) return std::nullopt;

    AttackFactorPoint point;
    point.tick = tick;
    point.eval_tick = tick - lag_ticks;
    double sum = 0.0;
    for (const auto& s : states) {
        auto it = s.scores.find(point.eval_tick);
        if (it == s.scores.end()) continue;
        point.per_counter_lof.emplace_back(s.event, it->second);
        sum += it->second;
    }
    point.contributing = point.per_counter_lof.size();
    if (point.contributing == 0) return std::nullopt;
    point.f = sum / static_cast<double>(point.contributing);
    return point;
}

std::optional<Alert> threshold_check(const AttackFactorPoint& point, const DetectorConfig& config)
{
    if (!(point.f > config.delta_threshold)) return std::nullopt;
    return Alert{point.eval_tick, static_cast<double>(point.eval_tick) * config.tick_interval, point.f,
                 config.delta_threshold, point.per_counter_lof};
}

StreamingDetector::StreamingDetector(DetectorConfig config, std::vector<EventKind> declared)
    : config_(std::move(config))
{
    config_.validate();
    for (const auto& e : declared) counter_for(e);
}

StreamingDetector::Counter* StreamingDetector::counter_for(const EventKind& event)
{
    auto rank = [this](const EventKind& e) {
        return std::find(config_.counters.begin(), config_.counters.end(), e) - config_.counters.begin();
    };
    const auto r = rank(event);
    if (r == static_cast<std::ptrdiff_t>(config_.counters.size())) return nullptr;
    auto it = std::find_if(counters_.begin(), counters_.end(), [&](const Counter& c) { return rank(c.window.event) >= r; });
    if (it != counters_.end() && it->window.event == event) return &*it;
    it = counters_.insert(it, Counter{WindowState(event), CounterScores{event, {}}, std::nullopt});
    return &*it;
}

std::optional<std::size_t> StreamingDetector::latest_tick(const EventKind& event) const
{
    for (const auto& c : counters_)
        if (c.window.event == event) return c.latest;
    return std::nullopt;
}

DetectorOutput StreamingDetector::push(const Sample& sample)
{
    std::optional<double> value;
    if (sample.delta) value = static_cast<double>(*sample.delta);
    return push_value(sample.event, tick_of(sample.timestamp, config_.tick_interval), value);
}

DetectorOutput StreamingDetector::push_value(const EventKind& event, std::size_t tick, std::optional<double> value)
{
    auto* counter = counter_for(event);
    if (!counter) return {};
    if (counter->latest && tick <= *counter->latest)
        throw Error("tick " + std::to_string(tick) + " does not advance " + event.name());
    counter->latest = tick;
    if (value) {
        if (auto scored = hpcwatch::push_value(counter->window, tick, *value, config_)) {
            if (!evaluated_through_ || scored->tick > *evaluated_through_) counter->scores.scores[scored->tick] = scored->lof;
        }
    }
    return drain(false);
}

DetectorOutput StreamingDetector::finish() { return drain(true); }

DetectorOutput StreamingDetector::drain(bool all)
{
    const auto lag_ticks = lag(config_);
    std::optional<std::size_t> frontier;  // highest eval tick no counter can still score
    if (!all) {
        for (const auto& c : counters_) {
            if (!c.latest) return {};
            // The next push scores the ring entry lag from the end; anything
            // older is final. Missing deltas leave gaps, so go by ring ticks.
            const auto& ring = c.window.ring;
            std::size_t open = *c.latest + 1;
            if (!ring.empty()) open = ring[ring.size() >= lag_ticks ? ring.size() - lag_ticks : 0].first;
            if (open == 0) return {};
            frontier = frontier ? std::min(*frontier, open - 1) : open - 1;
        }
        if (!frontier) return {};
    }

    std::set<std::size_t> pending;
    for (const auto& c : counters_)
        for (const auto& [t, _] : c.scores.scores)
            if (all || t <= *frontier) pending.insert(t);

    DetectorOutput out;
    if (pending.empty()) return out;
    std::vector<CounterScores> scores;
    scores.reserve(counters_.size());
    for (const auto& c : counters_) scores.push_back(c.scores);
    for (auto t : pending) {
        auto point = evaluate_tick(scores, t + lag_ticks, config_);
        if (!point) continue;
        if (auto alert = threshold_check(*point, config_)) out.alerts.push_back(std::move(*alert));
        out.points.push_back(std::move(*point));
    }
    evaluated_through_ = *pending.rbegin();
    for (auto& c : counters_) {
        auto& m = c.scores.scores;
        m.erase(m.begin(), m.upper_bound(*evaluated_through_));
    }
    return out;
}

std::vector<EventKind> select_counters(const AlignedTrace& trace, const DetectorConfig& config)
{
    std::vector<EventKind> out;
    for (const auto& c : config.counters)
        if (trace.index_of(c.name())) out.push_back(c);
    return out;
}

OfflineResult run_offline(const AlignedTrace& trace, const DetectorConfig& config)
{
    config.validate();
    OfflineResult result;
    result.counters = select_counters(trace, config);
    if (result.counters.empty()) {
        std::string available;
        for (const auto& e : trace.events) available += (available.empty() ? "" : ", ") + e.name();
        throw Error("no configured counter in trace; available: " + (available.empty() ? "(none)" : available));
    }

    std::vector<std::size_t> rows;
    for (const auto& c : result.counters) rows.push_back(*trace.index_of(c.name()));

    StreamingDetector detector(config, result.counters);
    auto collect = [&](DetectorOutput&& step) {
        for (auto& p : step.points) result.points.push_back(std::move(p));
        for (auto& a : step.alerts) result.alerts.push_back(std::move(a));
    };
    for (std::size_t t = 0; t < trace.tick_count; ++t) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& slot = trace.values[rows[i]][t];
            std::optional<double> value;
            if (slot) value = static_cast<double>(*slot);
            collect(detector.push_value(result.counters[i], t, value));
        }
    }
    collect(detector.finish());

    for (std::size_t i = 0; i < rows.size(); ++i) {
        CounterOutliers co;
        co.event = result.counters[i];
        for (std::size_t t = 0; t < trace.tick_count; ++t) {
            if (const auto& slot = trace.values[rows[i]][t]) {
                co.ticks.push_back(t);
                co.values.push_back(static_cast<double>(*slot));
            }
        }
        if (co.values.size() >= config.k + 1) {
            co.lofs = lof_all(PointSet(co.values), config.k);
            auto top = top_n_outliers(co.lofs, config.top_n);
            for (std::size_t r = 0; r < top.size(); ++r) {
                auto idx = top[r];
                co.top.push_back(Outlier{co.ticks[idx], trace.tick_time(co.ticks[idx]), co.values[idx], co.lofs[idx].lof, r + 1});
            }
        }
        result.outliers.push_back(std::move(co));
    }
    return result;
}

}  // namespace hpcwatch
