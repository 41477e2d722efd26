#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "hpcwatch/error.hpp"
#include "hpcwatch/plot.hpp"
#include "hpcwatch/report.hpp"

using namespace hpcwatch;

namespace {

Alert make_alert(std::size_t tick, double f)
{
    Alert a;
    a.eval_tick = tick;
    a.eval_time = 0.1 * static_cast<double>(tick);
    a.f = f;
    a.threshold = 1.5;
    a.per_counter_lof = {{EventKind("LLC-loads"), 4.0}, {EventKind("bus-cycles"), f * 2 - 4.0}};
    return a;
}

std::size_t count(const std::string& text, const std::string& pattern)
{
    std::regex re(pattern);
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

CounterSeries ramp(std::size_t n)
{
    CounterSeries s{EventKind("LLC-loads"), {}, 0.0};
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back(Sample{0.1 * static_cast<double>(i), 100 + (i * 7) % 13, s.event});
    return s;
}

}  // namespace

TEST(FormatReal, NineSignificantDigits)
{
    EXPECT_EQ(format_real(1.5), "1.5");
    EXPECT_EQ(format_real(119.0 / 24.0), "4.95833333");
    EXPECT_EQ(format_real(50.0), "50");
    EXPECT_EQ(format_real(0.1 * 3), "0.3");
}

TEST(AlertsCsv, WriteAndReadBack)
{
    std::vector<Alert> alerts{make_alert(500, 3.25), make_alert(501, 2.5)};
    std::ostringstream out;
    write_alerts_csv(out, alerts);
    EXPECT_EQ(out.str(),
              "eval_time,f,threshold,counters\n"
              "50,3.25,1.5,LLC-loads=4;bus-cycles=2.5\n"
              "50.1,2.5,1.5,LLC-loads=4;bus-cycles=1\n");
    std::istringstream in(out.str());
    auto back = read_alerts_csv(in, 0.1);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].eval_tick, 500u);
    EXPECT_EQ(back[1].eval_tick, 501u);
    EXPECT_EQ(back[0].f, 3.25);
    EXPECT_EQ(back[0].per_counter_lof, alerts[0].per_counter_lof);
}

TEST(AlertsCsv, HeaderlessRowsAccepted)
{
    std::istringstream in("12.3,1.75,1.5,\n\n");
    auto back = read_alerts_csv(in, 0.1);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].eval_tick, 123u);
    EXPECT_TRUE(back[0].per_counter_lof.empty());
}

TEST(AlertsCsv, BadRowsThrow)
{
    std::istringstream short_row("1.0,2.0\n");
    EXPECT_THROW(read_alerts_csv(short_row, 0.1), Error);
    std::istringstream bad_number("x,2.0,1.5,\n");
    EXPECT_THROW(read_alerts_csv(bad_number, 0.1), Error);
    std::istringstream bad_pair("1.0,2.0,1.5,LLC-loads\n");
    EXPECT_THROW(read_alerts_csv(bad_pair, 0.1), Error);
}

TEST(AttackFactorCsv, Rows)
{
    AttackFactorPoint p;
    p.tick = 13;
    p.eval_tick = 10;
    p.f = 1.25;
    p.contributing = 6;
    std::vector<AttackFactorPoint> pts{p};
    std::ostringstream out;
    write_attack_factor_csv(out, pts, 0.1);
    EXPECT_EQ(out.str(), "eval_time,f,contributing\n1,1.25,6\n");
}

TEST(OutliersCsv, SortedByTickThenEvent)
{
    CounterOutliers a, b;
    a.event = EventKind("a");
    a.top = {Outlier{30, 3.0, 9, 5.0, 1}, Outlier{10, 1.0, 8, 4.0, 2}};
    b.event = EventKind("b");
    b.top = {Outlier{10, 1.0, 7, 6.0, 1}};
    std::vector<CounterOutliers> all{a, b};
    std::ostringstream out;
    write_outliers_csv(out, all);
    EXPECT_EQ(out.str(),
              "event,tick,time,value,lof,rank\n"
              "a,10,1,8,4,2\n"
              "b,10,1,7,6,1\n"
              "a,30,3,9,5,1\n");
}

TEST(Coalesce, ZeroGapKeepsEverything)
{
    std::vector<Alert> alerts{make_alert(10, 2), make_alert(11, 2), make_alert(12, 2)};
    EXPECT_EQ(coalesce_alerts(alerts, 0).size(), 3u);
}

TEST(Coalesce, KeepsFirstOfEachRun)
{
    std::vector<Alert> alerts{make_alert(10, 2), make_alert(11, 2), make_alert(13, 2), make_alert(20, 2), make_alert(22, 2)};
    auto kept = coalesce_alerts(alerts, 2);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].eval_tick, 10u);
    EXPECT_EQ(kept[1].eval_tick, 20u);
    EXPECT_EQ(coalesce_alerts(alerts, 1).size(), 4u);
}

TEST(KeyValues, CommentsBlanksAndErrors)
{
    std::istringstream in("# comment\n\n k = 5 \ndelta=2.5\n");
    auto kv = read_key_values(in);
    EXPECT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv["k"], "5");
    EXPECT_EQ(kv["delta"], "2.5");
    std::istringstream bad("k 5\n");
    EXPECT_THROW(read_key_values(bad), Error);
}

TEST(Truth, Roundtrip)
{
    GroundTruth t{500, {EventKind("LLC-loads"), EventKind("bus-cycles")}};
    std::ostringstream out;
    write_truth(out, t, {{"seed", "7"}, {"tick_interval", "0.1"}});
    std::istringstream in(out.str());
    auto back = read_truth(in);
    EXPECT_EQ(back.truth.attack_tick, t.attack_tick);
    EXPECT_EQ(back.truth.affected, t.affected);
    EXPECT_EQ(back.tick_interval, std::optional<double>(0.1));
    EXPECT_EQ(back.extra.at("seed"), "7");
}

TEST(Truth, CleanRunHasNoAttackKey)
{
    std::ostringstream out;
    write_truth(out, GroundTruth{}, {{"seed", "7"}});
    EXPECT_EQ(out.str().find("attack_tick"), std::string::npos);
    std::istringstream in(out.str());
    EXPECT_FALSE(read_truth(in).truth.attack_tick.has_value());
}

TEST(Plot, CircleAndMarkerCounts)
{
    auto s = ramp(60);
    std::vector<std::size_t> top{3, 10, 20, 33, 59};
    auto svg = render_plot(s, {}, top, 2.5);
    EXPECT_EQ(count(svg, "<circle"), 5u);
    EXPECT_EQ(count(svg, "class=\"outlier\""), 5u);
    EXPECT_EQ(count(svg, "<line"), 1u);
    EXPECT_EQ(count(svg, "<polyline"), 1u);
    EXPECT_NE(svg.find("seconds"), std::string::npos);
    EXPECT_NE(svg.find("LLC-loads"), std::string::npos);
}

TEST(Plot, NoMarkerWhenUnset)
{
    auto s = ramp(20);
    std::vector<std::size_t> top{1};
    auto svg = render_plot(s, {}, top, std::nullopt);
    EXPECT_EQ(count(svg, "<line"), 0u);
    EXPECT_EQ(count(svg, "<circle"), 1u);
}

TEST(Plot, NothingToPlot)
{
    CounterSeries s{EventKind("a"), {Sample{0.1, std::nullopt, EventKind("a")}}, 0.0};
    EXPECT_THROW(render_plot(s, {}, {}, std::nullopt), Error);
}

TEST(Plot, EmitWritesFile)
{
    auto path = std::filesystem::temp_directory_path() / "hpcwatch_test_plot.svg";
    auto s = ramp(10);
    std::vector<std::size_t> top{2};
    emit_plot(s, {}, top, 0.5, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), render_plot(s, {}, top, 0.5));
    std::filesystem::remove(path);
    EXPECT_THROW(emit_plot(s, {}, top, 0.5, "/nonexistent/dir/x.svg"), Error);
}
