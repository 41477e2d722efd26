#include "hpcwatch/events.hpp"

#include <algorithm>
#include <utility>

namespace hpcwatch {

bool is_known_event(std::string_view name)
{
    return std::find(kKnownEvents.begin(), kKnownEvents.end(), name) != kKnownEvents.end();
}

bool is_candidate_event(std::string_view name)
{
    return std::find(kCandidateEvents.begin(), kCandidateEvents.end(), name) != kCandidateEvents.end();
}

EventKind::EventKind(std::string name)
    : name_(std::move(name)), known_(is_known_event(name_)), candidate_(is_candidate_event(name_))
{
}

}  // namespace hpcwatch
