#pragma once

#include <array>
#include <string>
#include <string_view>

namespace hpcwatch {

/// The 24 generic hardware events most CPUs expose under the same perf name.
inline constexpr std::array<std::string_view, 24> kKnownEvents = {
    "cpu-cycles",       "instructions",          "cache-references", "cache-misses",
    "branches",         "branch-misses",         "bus-cycles",       "ref-cycles",
    "L1-dcache-loads",  "L1-dcache-stores",      "L1-icache-loads",  "L1-icache-load-misses",
    "LLC-loads",        "LLC-load-misses",       "LLC-stores",       "LLC-store-misses",
    "dTLB-loads",       "dTLB-load-misses",      "dTLB-stores",      "dTLB-store-misses",
    "iTLB-loads",       "iTLB-load-misses",      "branch-loads",     "branch-load-misses",
};

/// Counters whose outliers line up with exploitation and stay quiet on a clean
/// exit. This order is the default aggregation order.
inline constexpr std::array<std::string_view, 6> kCandidateEvents = {
    "iTLB-load-misses", "dTLB-loads", "bus-cycles", "LLC-store-misses", "LLC-loads", "LLC-load-misses",
};

bool is_known_event(std::string_view name);
bool is_candidate_event(std::string_view name);

/// A counter name. Unknown names are kept verbatim.
class EventKind {
public:
    EventKind() = default;
    explicit EventKind(std::string name);

    const std::string& name() const { return name_; }
    bool known() const { return known_; }
    bool candidate() const { return candidate_; }

    friend bool operator==(const EventKind& a, const EventKind& b) { return a.name_ == b.name_; }
    friend auto operator<=>(const EventKind& a, const EventKind& b) { return a.name_ <=> b.name_; }

private:
    std::string name_;
    bool known_ = false;
    bool candidate_ = false;
};

}  // namespace hpcwatch
