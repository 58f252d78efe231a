#include "fedcw/harness/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fedcw::harness {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

double percentile_nearest_rank(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("percentile: q outside (0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    if (rank < 1) rank = 1;
    return values[rank - 1];
}

RunSummary summarize_windows(const std::string& run_id, const std::string& mode,
                             const std::vector<WindowGlobal>& rows, double warmup_frac) {
    RunSummary s;
    s.run_id = run_id;
    s.mode = mode;
    s.windows_total = static_cast<int>(rows.size());
    const auto skip = static_cast<std::size_t>(std::floor(warmup_frac * static_cast<double>(rows.size())));

    double delay_weighted = 0.0;
    std::int64_t delay_frames = 0;
    double tput_sum = 0.0;
    std::vector<double> window_delays;
    for (std::size_t i = skip; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ++s.windows_used;
        tput_sum += r.throughput_mbps;
        s.frames_success += r.frames_success;
        s.frames_lost += r.frames_lost;
        if (r.frames_success > 0) {
            delay_weighted += r.mean_delay_us * r.frames_success;
            delay_frames += r.frames_success;
            window_delays.push_back(r.mean_delay_us);
        }
    }
    if (delay_frames > 0) s.mean_delay_us = delay_weighted / static_cast<double>(delay_frames);
    if (s.windows_used > 0) s.mean_throughput_mbps = tput_sum / s.windows_used;
    if (!window_delays.empty()) {
        s.p50_delay_us = percentile_nearest_rank(window_delays, 0.50);
        s.p95_delay_us = percentile_nearest_rank(window_delays, 0.95);
    }
    return s;
}

void parse_metrics_csv(const std::string& text, std::vector<MetricsRun>& runs) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("metrics csv: empty input");
    const auto header = split(line, ',');
    const std::vector<std::string> expected = {
        "run_id", "mode", "seed", "window", "station", "plr", "idle", "cw", "action", "reward",
        "mean_delay_us", "throughput_mbps", "frames_success", "frames_lost"};
    if (header != expected) throw std::runtime_error("metrics csv: unexpected header");

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != expected.size())
            throw std::runtime_error("metrics csv: malformed row: " + line);
        if (f[4] != "-1") continue;  // only global rows feed the summary
        WindowGlobal g;
        g.window = std::stoi(f[3]);
        g.mean_delay_us = std::stod(f[10]);
        g.throughput_mbps = std::stod(f[11]);
        g.frames_success = std::stoi(f[12]);
        g.frames_lost = std::stoi(f[13]);

        auto it = std::find_if(runs.begin(), runs.end(),
                               [&](const MetricsRun& r) { return r.run_id == f[0]; });
        if (it == runs.end()) {
            runs.push_back(MetricsRun{f[0], f[1], {}});
            it = runs.end() - 1;
        }
        it->rows.push_back(g);
    }
}

std::string format_summary_table(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    const bool delta = runs.size() >= 2;
    out << "run_id                        mode    windows  mean_delay_us  p50_us      p95_us      "
           "tput_mbps  success    lost";
    if (delta) out << "    delta_vs_first";
    out << "\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-29s %-7s %7d  %13.3f  %10.3f  %10.3f  %9.4f  %7lld %7lld",
                      r.run_id.c_str(), r.mode.c_str(), r.windows_used, r.mean_delay_us,
                      r.p50_delay_us, r.p95_delay_us, r.mean_throughput_mbps,
                      static_cast<long long>(r.frames_success),
                      static_cast<long long>(r.frames_lost));
        out << buf;
        if (delta) {
            if (i == 0) {
                out << "        baseline";
            } else if (runs[0].mean_delay_us != 0.0) {
                const double d = (runs[0].mean_delay_us - r.mean_delay_us) / runs[0].mean_delay_us;
                out << "  " << fmt("%+14.4f", d);
            } else {
                out << "             n/a";
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string summary_to_json(const RunSummary& s) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"run_id\": \"" << s.run_id << "\",\n";
    out << "  \"mode\": \"" << s.mode << "\",\n";
    out << "  \"windows_total\": " << s.windows_total << ",\n";
    out << "  \"windows_used\": " << s.windows_used << ",\n";
    out << "  \"mean_delay_us\": " << fmt("%.6f", s.mean_delay_us) << ",\n";
    out << "  \"p50_delay_us\": " << fmt("%.6f", s.p50_delay_us) << ",\n";
    out << "  \"p95_delay_us\": " << fmt("%.6f", s.p95_delay_us) << ",\n";
    out << "  \"mean_throughput_mbps\": " << fmt("%.6f", s.mean_throughput_mbps) << ",\n";
    out << "  \"frames_success\": " << s.frames_success << ",\n";
    out << "  \"frames_lost\": " << s.frames_lost << "\n";
    out << "}\n";
    return out.str();
}

}  // namespace fedcw::harness
