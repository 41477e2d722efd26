#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "hpcwatch/lof.hpp"
#include "hpcwatch/trace.hpp"

namespace hpcwatch {

/// SVG of one counter: the delta series as a polyline, each index in `top` as a
/// filled red circle, and a vertical red line at `mark_time` when given.
/// Missing deltas are skipped. `lofs` (index-aligned with the samples, may be
/// empty) only annotates the circles. The only <circle> elements are the
/// outliers and the only <line> element is the marker.
/// Throws Error if the series has no non-missing sample.
std::string render_plot(const CounterSeries& series, std::span<const LofResult> lofs, std::span<const std::size_t> top,
                        std::optional<double> mark_time);

/// render_plot to a file; throws Error if it cannot be written.
void emit_plot(const CounterSeries& series, std::span<const LofResult> lofs, std::span<const std::size_t> top,
               std::optional<double> mark_time, const std::string& path);

}  // namespace hpcwatch
