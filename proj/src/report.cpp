#include "hpcwatch/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "hpcwatch/error.hpp"

namespace hpcwatch {

namespace {

std::string_view trim(std::string_view s)
{
    constexpr std::string_view ws = " \t\r\n";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep, std::size_t max_fields = 0)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        if (max_fields && out.size() + 1 == max_fields) {
            out.push_back(s.substr(start));
            break;
        }
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_real(std::string_view text, std::string_view what)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("bad " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

std::size_t parse_count(std::string_view text, std::string_view what)
{
    text = trim(text);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("bad " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

}  // namespace

std::string format_real(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void write_attack_factor_csv(std::ostream& out, std::span<const AttackFactorPoint> points, double tick_interval)
{
    out << kAttackFactorHeader << '\n';
    for (const auto& p : points)
        out << format_real(static_cast<double>(p.eval_tick) * tick_interval) << ',' << format_real(p.f) << ','
            << p.contributing << '\n';
}

std::string alert_csv_line(const Alert& alert)
{
    std::string line = format_real(alert.eval_time) + ',' + format_real(alert.f) + ',' + format_real(alert.threshold) + ',';
    bool first = true;
    for (const auto& [event, score] : alert.per_counter_lof) {
        if (!first) line += ';';
        first = false;
        line += event.name() + '=' + format_real(score);
    }
    return line;
}

void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts)
{
    out << kAlertsHeader << '\n';
    for (const auto& a : alerts) out << alert_csv_line(a) << '\n';
}

std::vector<Alert> read_alerts_csv(std::istream& in, double tick_interval)
{
    std::vector<Alert> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(line);
        if (body.empty()) continue;
        if (line_no == 1 && body == kAlertsHeader) continue;
        auto fields = split(body, ',', 4);
        if (fields.size() < 3) throw Error("alerts line " + std::to_string(line_no) + ": too few fields");
        Alert a;
        a.eval_time = parse_real(fields[0], "eval_time");
        a.f = parse_real(fields[1], "f");
        a.threshold = parse_real(fields[2], "threshold");
        a.eval_tick = static_cast<std::size_t>(std::llround(a.eval_time / tick_interval));
        if (fields.size() == 4 && !trim(fields[3]).empty()) {
            for (auto pair : split(trim(fields[3]), ';')) {
                auto eq = pair.find('=');
                if (eq == std::string_view::npos) throw Error("alerts line " + std::to_string(line_no) + ": bad counter entry");
                a.per_counter_lof.emplace_back(EventKind(std::string(trim(pair.substr(0, eq)))),
                                               parse_real(pair.substr(eq + 1), "counter lof"));
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

void write_outliers_csv(std::ostream& out, std::span<const CounterOutliers> outliers)
{
    out << kOutliersHeader << '\n';
    // time ascending, then event order
    std::vector<std::pair<const EventKind*, const Outlier*>> rows;
    for (const auto& co : outliers)
        for (const auto& o : co.top) rows.emplace_back(&co.event, &o);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second->tick < b.second->tick; });
    for (const auto& [event, o] : rows)
        out << event->name() << ',' << o->tick << ',' << format_real(o->time) << ',' << format_real(o->value) << ','
            << format_real(o->lof) << ',' << o->rank << '\n';
}

bool AlertCoalescer::admit(const Alert& alert)
{
    bool fresh = !last_tick_ || gap_ == 0 || alert.eval_tick > *last_tick_ + gap_;
    last_tick_ = alert.eval_tick;
    return fresh;
}

std::vector<Alert> coalesce_alerts(std::span<const Alert> alerts, std::size_t gap)
{
    AlertCoalescer c(gap);
    std::vector<Alert> out;
    for (const auto& a : alerts)
        if (c.admit(a)) out.push_back(a);
    return out;
}

std::map<std::string, std::string> read_key_values(std::istream& in)
{
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string_view::npos) throw Error("line " + std::to_string(line_no) + ": expected key=value");
        out[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
    }
    return out;
}

void write_truth(std::ostream& out, const GroundTruth& truth, const std::map<std::string, std::string>& extra)
{
    if (truth.attack_tick) {
        out << "attack_tick=" << *truth.attack_tick << '\n';
        out << "affected=";
        for (std::size_t i = 0; i < truth.affected.size(); ++i) out << (i ? "," : "") << truth.affected[i].name();
        out << '\n';
    }
    for (const auto& [k, v] : extra) out << k << '=' << v << '\n';
}

TruthFile read_truth(std::istream& in)
{
    TruthFile tf;
    for (auto& [k, v] : read_key_values(in)) {
        if (k == "attack_tick") {
            tf.truth.attack_tick = parse_count(v, "attack_tick");
        } else if (k == "affected") {
            for (auto name : split(v, ','))
                if (!trim(name).empty()) tf.truth.affected.emplace_back(std::string(trim(name)));
        } else if (k == "tick_interval") {
            tf.tick_interval = parse_real(v, "tick_interval");
        } else {
            tf.extra[k] = v;
        }
    }
    return tf;
}

}  // namespace hpcwatch
