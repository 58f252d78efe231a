#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedcw::harness {

/// The global (station == -1) row of one window, the unit of summarization.
struct WindowGlobal {
    int window = 0;
    double mean_delay_us = 0.0;  // 0 when nothing completed
    double throughput_mbps = 0.0;
    int frames_success = 0;
    int frames_lost = 0;
};

struct RunSummary {
    std::string run_id;
    std::string mode;
    int windows_total = 0;
    int windows_used = 0;  // post-warmup
    double mean_delay_us = 0.0;        // frame-weighted across used windows
    double mean_throughput_mbps = 0.0; // plain mean across used windows
    double p50_delay_us = 0.0;         // nearest-rank over per-window means
    double p95_delay_us = 0.0;
    std::int64_t frames_success = 0;
    std::int64_t frames_lost = 0;
};

/// Nearest-rank percentile of an unsorted sample; q in (0, 1].
double percentile_nearest_rank(std::vector<double> values, double q);

/// Aggregate one run, dropping the first floor(total * warmup_frac) windows.
RunSummary summarize_windows(const std::string& run_id, const std::string& mode,
                             const std::vector<WindowGlobal>& rows, double warmup_frac);

/// One run's global rows pulled out of a metrics CSV, keyed by run id.
struct MetricsRun {
    std::string run_id;
    std::string mode;
    std::vector<WindowGlobal> rows;
};

/// Parse a metrics CSV (header required) keeping runs in first-seen order.
/// Rows append to an existing run with the same id, so shards concatenate.
void parse_metrics_csv(const std::string& text, std::vector<MetricsRun>& runs);

/// Aligned text table; with two or more runs a relative-delta column against
/// the first run's mean delay, (base - run)/base, is appended.
std::string format_summary_table(const std::vector<RunSummary>& runs);

/// Flat JSON object for machine consumption.
std::string summary_to_json(const RunSummary& s);

}  // namespace fedcw::harness
