#pragma once

// Report files written by the CLI and read back by it:
//
//   attack_factor.csv  eval_time,f,contributing
//   alerts.csv         eval_time,f,threshold,counters
//   outliers.csv       event,tick,time,value,lof,rank
//   truth.txt          key=value ground truth from `synth`
//
// Reals are printed with 9 significant digits so reports are byte-stable.
// The `counters` column holds "event=lof" pairs joined by ';'.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcwatch/detector.hpp"
#include "hpcwatch/synth.hpp"

namespace hpcwatch {

inline constexpr std::string_view kAttackFactorHeader = "eval_time,f,contributing";
inline constexpr std::string_view kAlertsHeader = "eval_time,f,threshold,counters";
inline constexpr std::string_view kOutliersHeader = "event,tick,time,value,lof,rank";

std::string format_real(double value);

void write_attack_factor_csv(std::ostream& out, std::span<const AttackFactorPoint> points, double tick_interval);

std::string alert_csv_line(const Alert& alert);
void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts);

/// eval_tick is recovered as round(eval_time / tick_interval). Throws Error on
/// a bad header or row.
std::vector<Alert> read_alerts_csv(std::istream& in, double tick_interval);

void write_outliers_csv(std::ostream& out, std::span<const CounterOutliers> outliers);

/// Keeps the first alert of each run whose consecutive eval ticks are at most
/// `gap` apart. gap = 0 keeps everything.
class AlertCoalescer {
public:
    explicit AlertCoalescer(std::size_t gap) : gap_(gap) {}
    /// True if the alert starts a new run and should be emitted.
    bool admit(const Alert& alert);

private:
    std::size_t gap_;
    std::optional<std::size_t> last_tick_;
};

std::vector<Alert> coalesce_alerts(std::span<const Alert> alerts, std::size_t gap);

/// Line-oriented key=value pairs; '#' comments and blank lines are skipped.
/// Throws Error on a line without '='.
std::map<std::string, std::string> read_key_values(std::istream& in);

struct TruthFile {
    GroundTruth truth;
    std::optional<double> tick_interval;
    std::map<std::string, std::string> extra;
};

void write_truth(std::ostream& out, const GroundTruth& truth, const std::map<std::string, std::string>& extra);
TruthFile read_truth(std::istream& in);

}  // namespace hpcwatch
