#include "hpcwatch/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hpcwatch/capture.hpp"
#include "hpcwatch/detector.hpp"
#include "hpcwatch/error.hpp"
#include "hpcwatch/plot.hpp"
#include "hpcwatch/report.hpp"
#include "hpcwatch/synth.hpp"
#include "hpcwatch/trace.hpp"

namespace hpcwatch {

namespace {

namespace fs = std::filesystem;

std::vector<EventKind> parse_event_list(const std::string& text)
{
    std::vector<EventKind> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        auto last = item.find_last_not_of(" \t");
        out.emplace_back(item.substr(first, last - first + 1));
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("config: bad value for " + key + ": '" + text + "'");
    return value;
}

// Defaults < config file < flags.
struct DetectorFlags {
    std::size_t k = 0, window = 0, top = 0, coalesce = 0, warmup = 0;
    double delta = 0.0, interval = 0.0;
    std::string events, config;
    std::map<std::string, CLI::Option*> given;

    void attach(CLI::App& sub)
    {
        given["k"] = sub.add_option("--k", k, "LOF neighbour count (default 5)");
        given["delta"] = sub.add_option("--delta", delta, "alert threshold on the attack factor (default 1.5)");
        given["window"] = sub.add_option("--window", window, "samples per counter window (default 50)");
        given["interval"] = sub.add_option("--interval", interval, "tick interval in seconds (default 0.1)");
        given["events"] = sub.add_option("--events", events, "comma-separated counters to aggregate");
        given["top"] = sub.add_option("--top", top, "outliers to list per counter (default 5)");
        given["coalesce"] = sub.add_option("--coalesce", coalesce, "merge alerts at most this many ticks apart (default 0)");
        given["warmup"] = sub.add_option("--warmup", warmup, "samples before scoring (default 2k+2)");
        sub.add_option("--config", config, std::string("key=value config file (default $") + kConfigEnv + ")");
    }

    bool set(const std::string& key) const { return given.at(key)->count() > 0; }
};

struct Settings {
    DetectorConfig detector;
    std::size_t coalesce = 0;
};

void apply(Settings& s, const std::string& key, const std::string& value)
{
    if (key == "k") s.detector.k = parse_number<std::size_t>(key, value);
    else if (key == "delta") s.detector.delta_threshold = parse_number<double>(key, value);
    else if (key == "window") s.detector.window = parse_number<std::size_t>(key, value);
    else if (key == "interval") s.detector.tick_interval = parse_number<double>(key, value);
    else if (key == "events") s.detector.counters = parse_event_list(value);
    else if (key == "top") s.detector.top_n = parse_number<std::size_t>(key, value);
    else if (key == "coalesce") s.coalesce = parse_number<std::size_t>(key, value);
    else if (key == "warmup") s.detector.warmup = parse_number<std::size_t>(key, value);
    else throw Error("config: unknown key '" + key + "'");
}

Settings resolve(const DetectorFlags& f)
{
    Settings s;
    std::string config_path = f.config;
    if (config_path.empty()) {
        if (const char* env = std::getenv(kConfigEnv)) config_path = env;
    }
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw Error("cannot open config " + config_path);
        for (const auto& [k, v] : read_key_values(in)) apply(s, k, v);
    }
    if (f.set("k")) s.detector.k = f.k;
    if (f.set("delta")) s.detector.delta_threshold = f.delta;
    if (f.set("window")) s.detector.window = f.window;
    if (f.set("interval")) s.detector.tick_interval = f.interval;
    if (f.set("events")) s.detector.counters = parse_event_list(f.events);
    if (f.set("top")) s.detector.top_n = f.top;
    if (f.set("coalesce")) s.coalesce = f.coalesce;
    if (f.set("warmup")) s.detector.warmup = f.warmup;
    s.detector.validate();
    return s;
}

void report_diagnostics(std::ostream& err, const std::string& origin, const ParseDiagnostics& d)
{
    if (d.malformed.empty()) return;
    err << origin << ": " << d.malformed.size() << " malformed line(s)\n";
    for (std::size_t i = 0; i < d.malformed.size() && i < 5; ++i)
        err << "  line " << d.malformed[i].line_no << ": " << d.malformed[i].reason << '\n';
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string file_safe(std::string name)
{
    for (auto& c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return name;
}

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    bool plot = false;
    double mark_time = 0.0;
    CLI::Option* mark_opt = nullptr;
};

int cmd_analyze(const AnalyzeArgs& a, const DetectorFlags& flags, std::ostream& out, std::ostream& err)
{
    auto settings = resolve(flags);
    const auto& config = settings.detector;

    std::vector<Trace> traces;
    for (const auto& path : a.inputs) {
        auto parsed = parse_file(path);
        report_diagnostics(err, path, parsed.diagnostics);
        traces.push_back(std::move(parsed.trace));
    }
    auto merged = merge_traces(traces);
    if (merged.sample_count() == 0) throw Error("no samples");

    auto aligned = align(merged, config.tick_interval);
    auto result = run_offline(aligned, config);
    auto alerts = coalesce_alerts(result.alerts, settings.coalesce);

    fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    {
        auto f = open_out(dir / "attack_factor.csv");
        write_attack_factor_csv(f, result.points, config.tick_interval);
    }
    {
        auto f = open_out(dir / "alerts.csv");
        write_alerts_csv(f, alerts);
    }
    {
        auto f = open_out(dir / "outliers.csv");
        write_outliers_csv(f, result.outliers);
    }
    if (a.plot) {
        std::optional<double> mark;
        if (a.mark_opt->count()) mark = a.mark_time;
        for (const auto& co : result.outliers) {
            if (co.ticks.empty()) continue;
            CounterSeries series{co.event, {}, 0.0};
            for (std::size_t i = 0; i < co.ticks.size(); ++i)
                series.samples.push_back(Sample{aligned.tick_time(co.ticks[i]), static_cast<std::uint64_t>(co.values[i]), co.event});
            std::vector<std::size_t> top;
            for (const auto& o : co.top)
                top.push_back(static_cast<std::size_t>(std::find(co.ticks.begin(), co.ticks.end(), o.tick) - co.ticks.begin()));
            emit_plot(series, co.lofs, top, mark, (dir / ("plot_" + file_safe(co.event.name()) + ".svg")).string());
        }
    }

    out << "counters=";
    for (std::size_t i = 0; i < result.counters.size(); ++i) out << (i ? "," : "") << result.counters[i].name();
    out << "\nticks=" << aligned.tick_count << "\nalerts=" << alerts.size() << '\n';
    return alerts.empty() ? kExitClean : kExitAlerts;
}

int cmd_detect(const DetectorFlags& flags, std::istream& in, std::ostream& out, std::ostream& err)
{
    auto settings = resolve(flags);
    StreamingDetector detector(settings.detector);
    AlertCoalescer coalescer(settings.coalesce);
    std::size_t emitted = 0, lines = 0, malformed = 0, rejected = 0;

    auto emit = [&](const DetectorOutput& step) {
        for (const auto& alert : step.alerts) {
            if (!coalescer.admit(alert)) continue;
            out << alert_csv_line(alert) << '\n' << std::flush;
            ++emitted;
        }
    };

    std::string line;
    while (std::getline(in, line)) {
        ++lines;
        auto parsed = parse_line(line, lines);
        if (std::holds_alternative<LineError>(parsed)) {
            ++malformed;
            continue;
        }
        const auto* sample = std::get_if<Sample>(&parsed);
        if (!sample) continue;
        auto tick = tick_of(sample->timestamp, settings.detector.tick_interval);
        auto latest = detector.latest_tick(sample->event);
        if (latest && tick <= *latest) {
            ++rejected;
            continue;
        }
        emit(detector.push(*sample));
    }
    emit(detector.finish());

    if (malformed || rejected)
        err << "detect: " << lines << " lines, " << malformed << " malformed, " << rejected
            << " out of order or on an already-filled tick\n";
    return emitted ? kExitAlerts : kExitClean;
}

struct SynthArgs {
    std::uint64_t seed = 7;
    double duration = 60.0;
    double interval = 0.1;
    double attack_at = 0.0;
    CLI::Option* attack_opt = nullptr;
    double magnitude = 20.0;
    std::size_t width = 2;
    std::string events;
    std::string out_dir;
};

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    SynthConfig config;
    config.seed = a.seed;
    config.duration = a.duration;
    config.tick_interval = a.interval;
    if (!a.events.empty()) config.counters = parse_event_list(a.events);
    if (a.attack_opt->count()) config.attack = AttackSpec{a.attack_at, a.magnitude, a.width, {}};
    auto generated = generate_trace(config);

    fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (const auto& series : generated.trace.series) {
        auto f = open_out(dir / (file_safe(series.event.name()) + ".csv"));
        f << "# synthetic interval trace seed=" << a.seed << '\n';
        write_series(f, series);
        if (!f) throw Error("cannot write trace for " + series.event.name());
    }
    std::map<std::string, std::string> extra = {
        {"seed", std::to_string(a.seed)},
        {"tick_interval", format_real(a.interval)},
        {"ticks", std::to_string(config.tick_count())},
    };
    if (config.attack) {
        extra["magnitude"] = format_real(a.magnitude);
        extra["width"] = std::to_string(a.width);
    }
    {
        auto f = open_out(dir / "truth.txt");
        write_truth(f, generated.truth, extra);
    }
    out << "wrote " << generated.trace.series.size() << " trace(s) to " << dir.string() << '\n';
    return kExitClean;
}

struct EvalArgs {
    std::string alerts_path, truth_path;
    std::size_t tolerance = 5;
    double interval = 0.0;
    CLI::Option* interval_opt = nullptr;
};

int cmd_eval(const EvalArgs& a, std::ostream& out)
{
    std::ifstream truth_in(a.truth_path);
    if (!truth_in) throw Error("cannot open " + a.truth_path);
    auto truth = read_truth(truth_in);
    double interval = a.interval_opt->count() ? a.interval : truth.tick_interval.value_or(0.1);
    if (!(interval > 0.0)) throw Error("tick interval must be > 0");

    std::ifstream alerts_in(a.alerts_path);
    if (!alerts_in) throw Error("cannot open " + a.alerts_path);
    auto alerts = read_alerts_csv(alerts_in, interval);

    auto m = evaluate(alerts, truth.truth, a.tolerance);
    out << "TP=" << m.true_positives << "\nFP=" << m.false_positives << "\nFN=" << m.false_negatives << "\nlatency=";
    if (m.detection_latency)
        out << *m.detection_latency;
    else
        out << "none";
    out << '\n';
    return kExitClean;
}

struct CaptureArgs {
    long pid = 0;
    CLI::Option* pid_opt = nullptr;
    std::string events;
    unsigned interval_ms = 100;
    std::string out_path;
    std::string profiler = "perf";
    std::vector<std::string> command;
};

int cmd_capture(const CaptureArgs& a, std::ostream& out)
{
    CaptureRequest req;
    req.profiler = a.profiler;
    if (a.pid_opt->count()) req.pid = a.pid;
    req.command = a.command;
    req.events = a.events.empty() ? DetectorConfig::default_counters() : parse_event_list(a.events);
    req.interval_ms = a.interval_ms;
    req.out_path = a.out_path;
    capture(req);
    out << "wrote " << a.out_path << '\n';
    return kExitClean;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hardware performance counter anomaly detector (Local Outlier Factor attack factor)", "hpcwatch"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    DetectorFlags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "offline analysis of trace files; writes CSV reports");
    analyze->add_option("inputs", analyze_args.inputs, "trace files")->required();
    analyze->add_option("--out", analyze_args.out_dir, "report directory (default .)");
    analyze->add_flag("--plot", analyze_args.plot, "also write one SVG per counter");
    analyze_args.mark_opt = analyze->add_option("--mark-time", analyze_args.mark_time, "seconds to mark with a vertical line in plots");
    analyze_flags.attach(*analyze);

    DetectorFlags detect_flags;
    auto* detect = app.add_subcommand("detect", "streaming detection on stdin; prints alert lines as they fire");
    detect_flags.attach(*detect);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate seeded synthetic traces with an optional attack");
    synth->add_option("--seed", synth_args.seed, "RNG seed (default 7)");
    synth->add_option("--duration", synth_args.duration, "seconds (default 60)");
    synth->add_option("--interval", synth_args.interval, "tick interval in seconds (default 0.1)");
    synth_args.attack_opt = synth->add_option("--attack-at", synth_args.attack_at, "inject an attack at this second");
    synth->add_option("--magnitude", synth_args.magnitude, "attack multiplier (default 20)");
    synth->add_option("--width", synth_args.width, "attack width in ticks (default 2)");
    synth->add_option("--events", synth_args.events, "comma-separated counters (default: the six candidates)");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score an alerts CSV against a truth file");
    eval->add_option("alerts", eval_args.alerts_path, "alerts CSV")->required();
    eval->add_option("truth", eval_args.truth_path, "truth.txt written by synth")->required();
    eval->add_option("--tolerance", eval_args.tolerance, "ticks around the attack that count as a hit (default 5)");
    eval_args.interval_opt = eval->add_option("--interval", eval_args.interval, "tick interval (default: from truth file)");

    CaptureArgs capture_args;
    auto* cap = app.add_subcommand("capture", "record a trace with perf stat -I (needs counter access)");
    capture_args.pid_opt = cap->add_option("--pid", capture_args.pid, "attach to a running process");
    cap->add_option("--events", capture_args.events, "comma-separated events (default: the six candidates)");
    cap->add_option("--interval-ms", capture_args.interval_ms, "readout interval in ms (default 100)");
    cap->add_option("--out", capture_args.out_path, "trace file to write")->required();
    cap->add_option("--profiler", capture_args.profiler, "profiler executable (default perf)");
    cap->add_option("command", capture_args.command, "command to run under the profiler (after --)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitClean;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitClean;
    } catch (const CLI::ParseError& e) {
        err << "hpcwatch: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_args, analyze_flags, out, err);
        if (*detect) return cmd_detect(detect_flags, in, out, err);
        if (*synth) return cmd_synth(synth_args, out);
        if (*eval) return cmd_eval(eval_args, out);
        if (*cap) return cmd_capture(capture_args, out);
    } catch (const CaptureError& e) {
        err << "hpcwatch: " << e.what() << '\n';
        return kExitCapture;
    } catch (const std::exception& e) {
        err << "hpcwatch: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace hpcwatch
