#include "hpcwatch/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string_view>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 320.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_plot(const CounterSeries& series, std::span<const LofResult> lofs, std::span<const std::size_t> top,
                        std::optional<double> mark_time)
{
    const auto& samples = series.samples;
    double t_min = 0.0, t_max = 0.0, v_max = 0.0;
    bool any = false;
    for (const auto& s : samples) {
        if (!s.delta) continue;
        if (!any) t_min = t_max = s.timestamp;
        t_min = std::min(t_min, s.timestamp);
        t_max = std::max(t_max, s.timestamp);
        v_max = std::max(v_max, static_cast<double>(*s.delta));
        any = true;
    }
    if (!any) throw Error("nothing to plot for " + series.event.name());
    if (mark_time) {
        t_min = std::min(t_min, *mark_time);
        t_max = std::max(t_max, *mark_time);
    }
    if (t_max == t_min) t_max = t_min + 1.0;
    if (v_max == 0.0) v_max = 1.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](double t) { return kLeft + (t - t_min) / (t_max - t_min) * plot_w; };
    auto y_of = [&](double v) { return kTop + plot_h - v / v_max * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + ' ' + num(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";

    const double x0 = kLeft, y0 = kTop + plot_h, x1 = kLeft + plot_w;
    svg += "<path class=\"axis\" d=\"M" + num(x0) + ' ' + num(kTop) + " L" + num(x0) + ' ' + num(y0) + " L" + num(x1) + ' ' +
           num(y0) + "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(x0 + plot_w / 2) + "\" y=\"" + num(kHeight - 8) + "\" text-anchor=\"middle\">seconds</text>\n";
    svg += "<text x=\"16\" y=\"" + num(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num(kTop + plot_h / 2) + ")\">" + escape(series.event.name()) + "</text>\n";
    svg += "<text x=\"" + num(x0) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" + real(t_min) + "</text>\n";
    svg += "<text x=\"" + num(x1) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" + real(t_max) + "</text>\n";
    svg += "<text x=\"" + num(x0 - 4) + "\" y=\"" + num(kTop + 4) + "\" text-anchor=\"end\">" + real(v_max) + "</text>\n";

    svg += "<polyline class=\"series\" fill=\"none\" stroke=\"steelblue\" points=\"";
    bool first = true;
    for (const auto& s : samples) {
        if (!s.delta) continue;
        if (!first) svg += ' ';
        first = false;
        svg += num(x_of(s.timestamp)) + ',' + num(y_of(static_cast<double>(*s.delta)));
    }
    svg += "\"/>\n";

    for (auto idx : top) {
        if (idx >= samples.size() || !samples[idx].delta) continue;
        const auto& s = samples[idx];
        svg += "<circle class=\"outlier\" cx=\"" + num(x_of(s.timestamp)) + "\" cy=\"" +
               num(y_of(static_cast<double>(*s.delta))) + "\" r=\"4\" fill=\"red\">";
        svg += "<title>t=" + real(s.timestamp);
        if (idx < lofs.size()) svg += " lof=" + real(lofs[idx].lof);
        svg += "</title></circle>\n";
    }

    if (mark_time) {
        svg += "<line class=\"marker\" x1=\"" + num(x_of(*mark_time)) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
               num(x_of(*mark_time)) + "\" y2=\"" + num(y0) + "\" stroke=\"red\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const CounterSeries& series, std::span<const LofResult> lofs, std::span<const std::size_t> top,
               std::optional<double> mark_time, const std::string& path)
{
    auto svg = render_plot(series, lofs, top, mark_time);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << svg;
    if (!out) throw Error("cannot write " + path);
}

}  // namespace hpcwatch
