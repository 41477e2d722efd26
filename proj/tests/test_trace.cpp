#include <gtest/gtest.h>

#include <sstream>

#include "hpcwatch/error.hpp"
#include "hpcwatch/trace.hpp"

using namespace hpcwatch;

namespace {

const char* kListing =
    "# started on Sun Apr 19 01:23:16 2015\n"
    "\n"
    "     0.001225993,1621,branch-load-misses\n"
    "     0.002574349,5149,branch-load-misses\n"
    "     0.003808515,5352,branch-load-misses\n"
    "     0.005025360,5807,branch-load-misses\n";

ParseResult parse_text(const std::string& text, std::optional<EventKind> hint = std::nullopt)
{
    std::istringstream in(text);
    return parse_stream(in, hint);
}

std::string reason_of(const ParsedLine& p)
{
    auto* e = std::get_if<LineError>(&p);
    return e ? e->reason : std::string("<not an error>");
}

CounterSeries series_of(const std::string& event, std::vector<std::pair<double, std::uint64_t>> pts)
{
    CounterSeries s{EventKind(event), {}, 0.0};
    for (auto [t, d] : pts) s.samples.push_back(Sample{t, d, EventKind(event)});
    return s;
}

}  // namespace

TEST(ParseLine, PerfSampleWithLeadingWhitespace)
{
    auto p = parse_line("     0.001225993,1621,branch-load-misses", 3);
    ASSERT_TRUE(std::holds_alternative<Sample>(p));
    const auto& s = std::get<Sample>(p);
    EXPECT_DOUBLE_EQ(s.timestamp, 0.001225993);
    EXPECT_EQ(s.delta, Delta(1621));
    EXPECT_EQ(s.event.name(), "branch-load-misses");
    EXPECT_TRUE(s.event.known());
}

TEST(ParseLine, CommentsAndBlanks)
{
    EXPECT_TRUE(std::holds_alternative<CommentLine>(parse_line("# started on Sun Apr 19 01:23:16 2015", 1)));
    EXPECT_TRUE(std::holds_alternative<CommentLine>(parse_line("   # indented", 1)));
    EXPECT_TRUE(std::holds_alternative<BlankLine>(parse_line("", 1)));
    EXPECT_TRUE(std::holds_alternative<BlankLine>(parse_line(" \t\r", 1)));
}

TEST(ParseLine, NotCountedIsMissing)
{
    auto p = parse_line("0.200000,<not counted>,LLC-loads", 1);
    ASSERT_TRUE(std::holds_alternative<Sample>(p));
    EXPECT_FALSE(std::get<Sample>(p).delta.has_value());
    EXPECT_DOUBLE_EQ(std::get<Sample>(p).timestamp, 0.2);
}

TEST(ParseLine, ExtraFieldsIgnoredAndFieldsTrimmed)
{
    auto p = parse_line(" 1.5 , 42 , cycles ,extra,more", 1);
    ASSERT_TRUE(std::holds_alternative<Sample>(p));
    EXPECT_EQ(std::get<Sample>(p).delta, Delta(42));
    EXPECT_EQ(std::get<Sample>(p).event.name(), "cycles");
    EXPECT_FALSE(std::get<Sample>(p).event.known());
}

TEST(ParseLine, Errors)
{
    EXPECT_EQ(reason_of(parse_line("0.100,abc,cycles", 7)), "non-numeric delta");
    EXPECT_EQ(std::get<LineError>(parse_line("0.100,abc,cycles", 7)).line_no, 7u);
    EXPECT_EQ(reason_of(parse_line("x,1,cycles", 1)), "non-numeric timestamp");
    EXPECT_EQ(reason_of(parse_line("0.1,-5,cycles", 1)), "negative delta");
    EXPECT_EQ(reason_of(parse_line("0.1,5", 1)), "too few fields");
    EXPECT_EQ(reason_of(parse_line("0.1,5,", 1)), "missing event name");
    EXPECT_EQ(reason_of(parse_line("-0.1,5,cycles", 1)), "negative timestamp");
    EXPECT_EQ(reason_of(parse_line("0.1,99999999999999999999999,cycles", 1)), "delta out of range");
}

TEST(ParseLine, TwoFieldsTakeTheHint)
{
    auto p = parse_line("0.1,5", 1, EventKind("LLC-loads"));
    ASSERT_TRUE(std::holds_alternative<Sample>(p));
    EXPECT_EQ(std::get<Sample>(p).event.name(), "LLC-loads");
}

TEST(ParseStream, PaperListing)
{
    auto r = parse_text(kListing);
    ASSERT_EQ(r.trace.series.size(), 1u);
    EXPECT_EQ(r.trace.series[0].event.name(), "branch-load-misses");
    EXPECT_EQ(r.trace.series[0].samples.size(), 4u);
    EXPECT_EQ(r.diagnostics.comments_skipped, 1u);
    EXPECT_EQ(r.diagnostics.blank_lines, 1u);
    EXPECT_EQ(r.diagnostics.lines_read, 6u);
    EXPECT_TRUE(r.diagnostics.malformed.empty());
}

TEST(ParseStream, EmptyInput)
{
    auto r = parse_text("");
    EXPECT_TRUE(r.trace.series.empty());
    EXPECT_EQ(r.diagnostics.lines_read, 0u);
    EXPECT_EQ(r.diagnostics.samples_parsed, 0u);
    EXPECT_EQ(r.diagnostics.comments_skipped, 0u);
    EXPECT_TRUE(r.diagnostics.malformed.empty());
    EXPECT_EQ(r.diagnostics.not_counted, 0u);
}

TEST(ParseStream, InterleavedEventsAreGrouped)
{
    std::string text;
    for (int i = 0; i < 5; ++i) {
        text += std::to_string(0.1 * (i + 1)) + "," + std::to_string(10 + i) + ",LLC-loads\n";
        text += std::to_string(0.1 * (i + 1)) + "," + std::to_string(20 + i) + ",bus-cycles\n";
    }
    auto r = parse_text(text);
    ASSERT_EQ(r.trace.series.size(), 2u);
    for (const auto& s : r.trace.series) {
        EXPECT_EQ(s.samples.size(), 5u);
        for (const auto& sample : s.samples) EXPECT_EQ(sample.event, s.event);
    }
    EXPECT_EQ(r.trace.find("bus-cycles")->samples[3].delta, Delta(23));
}

TEST(ParseStream, MalformedLinesAreCollected)
{
    auto r = parse_text("0.1,1,cycles\ngarbage\n0.2,<not counted>,cycles\n0.2,3,cycles\n0.3,-1,cycles\n");
    ASSERT_EQ(r.diagnostics.malformed.size(), 3u);
    EXPECT_EQ(r.diagnostics.malformed[0].line_no, 2u);
    EXPECT_EQ(r.diagnostics.malformed[1].line_no, 4u);
    EXPECT_EQ(r.diagnostics.malformed[1].reason, "non-increasing timestamp");
    EXPECT_EQ(r.diagnostics.malformed[2].line_no, 5u);
    EXPECT_EQ(r.diagnostics.not_counted, 1u);
    EXPECT_EQ(r.diagnostics.samples_parsed, 2u);
    EXPECT_EQ(r.trace.series[0].samples.size(), 2u);
}

TEST(ParseStream, NominalIntervalIsMedianGap)
{
    auto r = parse_text("0.1,1,a\n0.2,1,a\n0.3,1,a\n0.9,1,a\n");
    EXPECT_NEAR(r.trace.series[0].nominal_interval, 0.1, 1e-12);
}

TEST(ParseFile, MissingFileThrows) { EXPECT_THROW(parse_file("/nonexistent/trace.csv"), Error); }

TEST(Roundtrip, FormatAndReparse)
{
    auto r = parse_text(kListing);
    std::ostringstream out;
    write_trace(out, r.trace);
    auto again = parse_text(out.str());
    ASSERT_EQ(again.trace.series.size(), 1u);
    EXPECT_EQ(again.trace.series[0].samples, r.trace.series[0].samples);
    EXPECT_EQ(format_sample(r.trace.series[0].samples[0]), "0.001225993,1621,branch-load-misses");
}

TEST(Roundtrip, NotCountedSurvives)
{
    Sample s{0.5, std::nullopt, EventKind("LLC-loads")};
    auto p = parse_line(format_sample(s), 1);
    ASSERT_TRUE(std::holds_alternative<Sample>(p));
    EXPECT_EQ(std::get<Sample>(p), s);
}

TEST(Merge, DisjointUnion)
{
    Trace a{{series_of("LLC-loads", {{0.1, 1}})}, "a"};
    Trace b{{series_of("bus-cycles", {{0.1, 2}})}, "b"};
    std::vector<Trace> both{a, b};
    auto m = merge_traces(both);
    EXPECT_EQ(m.series.size(), 2u);
    EXPECT_EQ(m.origin, "a;b");
}

TEST(Merge, DuplicateEventNamesTheEvent)
{
    Trace a{{series_of("LLC-loads", {{0.1, 1}})}, "a"};
    std::vector<Trace> twice{a, a};
    try {
        merge_traces(twice);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("LLC-loads"), std::string::npos);
    }
}

TEST(Align, SumsWithinTickAndLeavesGaps)
{
    Trace t{{series_of("a", {{0.0, 1}, {0.098, 2}, {0.104, 3}, {0.3, 4}}), series_of("b", {{0.1, 9}})}, ""};
    auto al = align(t, 0.1);
    EXPECT_EQ(al.tick_count, 4u);
    auto ai = *al.index_of("a");
    auto bi = *al.index_of("b");
    EXPECT_EQ(al.values[ai][0], Delta(1));
    EXPECT_EQ(al.values[ai][1], Delta(5));
    EXPECT_FALSE(al.values[ai][2].has_value());
    EXPECT_EQ(al.values[ai][3], Delta(4));
    EXPECT_FALSE(al.values[bi][0].has_value());
    EXPECT_EQ(al.values[bi][1], Delta(9));
    for (const auto& row : al.values) EXPECT_EQ(row.size(), al.tick_count);
    EXPECT_DOUBLE_EQ(al.tick_time(3), 0.3);
}

TEST(Align, PaperCadenceOneSamplePerTick)
{
    auto r = parse_text(kListing);
    auto al = align(r.trace, 0.001);
    ASSERT_EQ(al.tick_count, 6u);
    std::size_t present = 0;
    for (std::size_t t = 1; t < al.tick_count; ++t) present += al.values[0][t].has_value();
    EXPECT_EQ(present, 4u);
    EXPECT_EQ(al.values[0][1], Delta(1621));
    EXPECT_EQ(al.values[0][5], Delta(5807));
}

TEST(Align, BadInterval)
{
    Trace t{{series_of("a", {{0.1, 1}})}, ""};
    EXPECT_THROW(align(t, 0.0), Error);
    EXPECT_THROW(align(t, -1.0), Error);
}

TEST(Align, ToTraceKeepsPresentSlots)
{
    Trace t{{series_of("a", {{0.1, 1}, {0.3, 4}})}, ""};
    auto back = to_trace(align(t, 0.1));
    ASSERT_EQ(back.series.size(), 1u);
    ASSERT_EQ(back.series[0].samples.size(), 2u);
    EXPECT_DOUBLE_EQ(back.series[0].samples[1].timestamp, 0.3);
    EXPECT_EQ(back.series[0].samples[1].delta, Delta(4));
}
