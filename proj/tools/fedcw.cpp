// Command-line front end: run experiments, check the saturation model,
// summarize metrics files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedcw/harness/bianchi.hpp"
#include "fedcw/harness/config.hpp"
#include "fedcw/harness/experiment.hpp"
#include "fedcw/harness/summary.hpp"
#include "fedcw/kernels.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& mode, const std::optional<std::string>& out_dir) {
    auto cfg = fedcw::harness::load_config_file(config_path);
    fedcw::harness::apply_overrides(cfg, seed, mode, out_dir);
    const auto result = fedcw::harness::run_experiment(cfg);

    std::cout << fedcw::harness::format_summary_table({result.summary});
    std::printf("windows=%d rounds=%d wall=%.2fs kernels=%s\n", result.windows, result.rounds,
                result.wall_seconds, fedcw::kernels::active().name);
    if (!cfg.out_dir.empty()) {
        std::cout << "wrote " << cfg.out_dir << "/" << result.run_id << "-{metrics.csv,rounds.csv,summary.json}\n";
    }
    return 0;
}

int cmd_validate_bianchi(int n, int cw, double sim_time_s, std::uint64_t seed) {
    const auto c = fedcw::harness::validate_fixed_cw(n, cw, sim_time_s, seed);
    std::cout << fedcw::harness::format_comparison(n, cw, c);
    const bool ok = c.rel_err_p <= 0.10 && c.rel_err_s <= 0.10;
    std::cout << (ok ? "within 10% of the closed form\n" : "OUTSIDE the 10% envelope\n");
    return ok ? 0 : 3;
}

int cmd_summarize(const std::vector<std::string>& inputs, double warmup) {
    std::vector<fedcw::harness::MetricsRun> runs;
    for (const auto& path : inputs) {
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot open '" << path << "'\n";
            return 2;
        }
        std::ostringstream buf;
        buf << f.rdbuf();
        fedcw::harness::parse_metrics_csv(buf.str(), runs);
    }
    std::vector<fedcw::harness::RunSummary> summaries;
    summaries.reserve(runs.size());
    for (const auto& r : runs)
        summaries.push_back(fedcw::harness::summarize_windows(r.run_id, r.mode, r.rows, warmup));
    std::cout << fedcw::harness::format_summary_table(summaries);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contention-window control testbed for a dense single-cell WLAN"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode, out_dir, kernel_choice;
    run->add_option("--config", config_path, "key=value config file")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--mode", mode, "override the control mode (efrl|afrl|drl|beb|rtscts|fixed)");
    run->add_option("--out", out_dir, "directory for metrics/rounds/summary files");
    run->add_option("--kernels", kernel_choice, "force a kernel variant (scalar|avx2)");

    // validate-bianchi
    auto* vb = app.add_subcommand("validate-bianchi",
                                  "Compare the saturated simulator with the closed-form model");
    int vb_n = 10, vb_cw = 31;
    double vb_time = 20.0;
    std::uint64_t vb_seed = 1;
    vb->add_option("--n", vb_n, "number of stations")->required();
    vb->add_option("--cw", vb_cw, "fixed contention window")->required();
    vb->add_option("--sim-time", vb_time, "simulated seconds (default 20)");
    vb->add_option("--seed", vb_seed, "simulation seed (default 1)");

    // summarize
    auto* sum = app.add_subcommand("summarize", "Aggregate metrics CSV files into a table");
    std::vector<std::string> inputs;
    double warmup = 0.25;
    sum->add_option("--in", inputs, "metrics CSV files")->required()->expected(-1);
    sum->add_option("--warmup", warmup, "fraction of windows to drop (default 0.25)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (kernel_choice) {
                if (*kernel_choice == "scalar") {
                    fedcw::kernels::select(fedcw::kernels::scalar_ops());
                } else if (*kernel_choice == "avx2") {
                    const auto* ops = fedcw::kernels::avx2_ops();
                    if (!ops) {
                        std::cerr << "error: avx2 kernels are not available on this host\n";
                        return 2;
                    }
                    fedcw::kernels::select(*ops);
                } else {
                    std::cerr << "error: unknown kernel variant '" << *kernel_choice << "'\n";
                    return 1;
                }
            }
            return cmd_run(config_path, seed, mode, out_dir);
        }
        if (vb->parsed()) return cmd_validate_bianchi(vb_n, vb_cw, vb_time, vb_seed);
        if (sum->parsed()) return cmd_summarize(inputs, warmup);
    } catch (const fedcw::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
