#include "fedcw/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fedcw::harness {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw ConfigError("config: key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) fail(key, "trailing characters in '" + v + "'");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "not a number: '" + v + "'");
    }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
    std::int64_t out = 0;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    const auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last) fail(key, "not an integer: '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    const auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last) fail(key, "not an unsigned integer: '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "not a boolean: '" + v + "'");
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(key, "empty list element");
        out.push_back(to_double(key, item));
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double d : to_double_list(key, v)) {
        if (d != std::floor(d)) fail(key, "expected integers");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

std::int64_t seconds_to_us(const std::string& key, double s) {
    if (!(s > 0.0)) fail(key, "must be positive");
    return static_cast<std::int64_t>(std::llround(s * 1e6));
}

}  // namespace

const char* to_string(Mode m) {
    switch (m) {
        case Mode::kEfrl: return "efrl";
        case Mode::kAfrl: return "afrl";
        case Mode::kDrl: return "drl";
        case Mode::kBeb: return "beb";
        case Mode::kRtsCts: return "rtscts";
        case Mode::kFixed: return "fixed";
    }
    return "?";
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::kStatic: return "static";
        case Scenario::kDynamic: return "dynamic";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "efrl") return Mode::kEfrl;
    if (s == "afrl") return Mode::kAfrl;
    if (s == "drl") return Mode::kDrl;
    if (s == "beb") return Mode::kBeb;
    if (s == "rtscts") return Mode::kRtsCts;
    if (s == "fixed") return Mode::kFixed;
    throw ConfigError("config: unknown mode '" + s +
                      "' (expected efrl|afrl|drl|beb|rtscts|fixed)");
}

Scenario parse_scenario(const std::string& s) {
    if (s == "static") return Scenario::kStatic;
    if (s == "dynamic") return Scenario::kDynamic;
    throw ConfigError("config: unknown scenario '" + s + "' (expected static|dynamic)");
}

int ExperimentConfig::resolved_top_k() const {
    if (top_k == -2) return (n_stations + 1) / 2;  // ceil(n/2)
    return top_k;
}

std::string ExperimentConfig::run_id() const {
    return std::string(to_string(mode)) + "-" + to_string(scenario) + "-n" +
           std::to_string(n_stations) + "-s" + std::to_string(seed);
}

void ExperimentConfig::validate() const {
    if (n_stations < 1) throw ConfigError("config: key 'n_stations': required, must be >= 1");
    if (sim_time_us <= 0 || step_us <= 0 || fl_period_us <= 0)
        throw ConfigError("config: durations must be positive");
    if (fl_period_us % step_us != 0)
        throw ConfigError("config: key 'fl_period_s': aggregation period " +
                          std::to_string(fl_period_us) + "us is not a multiple of the step " +
                          std::to_string(step_us) + "us");
    if (sim_time_us % step_us != 0)
        throw ConfigError("config: key 'sim_time_s': run length " + std::to_string(sim_time_us) +
                          "us is not a multiple of the step " + std::to_string(step_us) + "us");
    if (scenario == Scenario::kDynamic) {
        if (n_fixed_traffic < 0 || n_random_traffic < 0)
            throw ConfigError(
                "config: dynamic scenario needs n_fixed_traffic and n_random_traffic");
        if (n_fixed_traffic + n_random_traffic != n_stations)
            throw ConfigError(
                "config: n_fixed_traffic + n_random_traffic must equal n_stations");
        if (traffic_rate_min_mbps < 0.0)
            throw ConfigError("config: key 'traffic_rate_min_mbps': must be >= 0");
        if (traffic_rate_max_mbps >= 0.0 && traffic_rate_max_mbps < traffic_rate_min_mbps)
            throw ConfigError("config: key 'traffic_rate_max_mbps': below the minimum rate");
        if (rate_redraw_period_us == 0)
            throw ConfigError("config: key 'rate_redraw_period_s': must be positive");
    }
    if (traffic_rate_mbps < 0.0)
        throw ConfigError("config: key 'traffic_rate_mbps': must be >= 0");
    if (!distances_m.empty()) {
        if (static_cast<int>(distances_m.size()) != n_stations)
            throw ConfigError("config: key 'distances': expected " + std::to_string(n_stations) +
                              " entries, got " + std::to_string(distances_m.size()));
        for (double d : distances_m)
            if (!(d >= 0.5) || !(d <= 30.0))
                throw ConfigError("config: key 'distances': entry " + std::to_string(d) +
                                  " outside [0.5, 30]");
    }
    if (p_err_min < 0.0 || p_err_max > 1.0 || p_err_min > p_err_max)
        throw ConfigError("config: channel error bounds need 0 <= p_err_min <= p_err_max <= 1");
    if (!(p_err_shape > 0.0)) throw ConfigError("config: key 'p_err_shape': must be positive");
    if (payload_bytes < 1) throw ConfigError("config: key 'payload_bytes': must be >= 1");
    if (!(data_rate_mbps > 0.0))
        throw ConfigError("config: key 'data_rate_mbps': must be positive");
    if (retry_cap < 0) throw ConfigError("config: key 'retry_cap': must be >= 0");
    if (cw_min < 1 || cw_max < cw_min)
        throw ConfigError("config: need 1 <= cw_min <= cw_max");
    if (fixed_cw < 1 || fixed_cw > cw_max)
        throw ConfigError("config: key 'fixed_cw': outside [1, cw_max]");
    if (!(delay_limit_us > 0.0))
        throw ConfigError("config: key 'delay_limit_ms': must be positive");

    if (!(hyper.lr > 0.0)) throw ConfigError("config: key 'lr': must be positive");
    if (!(hyper.tau > 0.0) || hyper.tau > 1.0)
        throw ConfigError("config: key 'tau': must be in (0, 1]");
    if (hyper.batch < 1) throw ConfigError("config: key 'batch_size': must be >= 1");
    if (hyper.gamma < 0.0 || hyper.gamma > 1.0)
        throw ConfigError("config: key 'gamma': must be in [0, 1]");
    if (hyper.buffer_capacity < hyper.batch)
        throw ConfigError("config: key 'buffer_capacity': smaller than the batch size");
    if (hyper.noise_sigma < 0.0) throw ConfigError("config: key 'noise_sigma': must be >= 0");
    if (!(hyper.noise_decay > 0.0) || hyper.noise_decay > 1.0)
        throw ConfigError("config: key 'noise_decay': must be in (0, 1]");
    if (hyper.hidden.empty()) throw ConfigError("config: key 'hidden': empty layer list");
    for (int h : hyper.hidden)
        if (h < 1) throw ConfigError("config: key 'hidden': layer widths must be >= 1");

    if (w1 < 0.0 || w2 < 0.0 || std::abs(w1 + w2 - 1.0) > 1e-9)
        throw ConfigError("config: selection weights w1, w2 must be nonnegative and sum to 1");
    if (!(fed_d_max > 0.0)) throw ConfigError("config: key 'd_max': must be positive");
    if (min_samples < hyper.batch)
        throw ConfigError("config: key 'min_samples': below the batch size, participants could "
                          "upload untrained weights");
    if (top_k < -2 || top_k == 0)
        throw ConfigError("config: key 'top_k': expected auto, all, or a positive integer");
    if (warmup_frac < 0.0 || warmup_frac >= 1.0)
        throw ConfigError("config: key 'warmup_frac': must be in [0, 1)");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> seen;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_n = false;
    double step_ms = 20.0, sim_time_s = 20.0, fl_period_s = 2.5;
    double rate_redraw_s = -1.0, delay_limit_ms = 20.0;

    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
        if (!seen.emplace(key, value).second)
            throw ConfigError("config: line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");

        if (key == "scenario") cfg.scenario = parse_scenario(value);
        else if (key == "mode") cfg.mode = parse_mode(value);
        else if (key == "seed") cfg.seed = to_uint(key, value);
        else if (key == "n_stations") { cfg.n_stations = static_cast<int>(to_int(key, value)); have_n = true; }
        else if (key == "sim_time_s") sim_time_s = to_double(key, value);
        else if (key == "step_ms") step_ms = to_double(key, value);
        else if (key == "fl_period_s") fl_period_s = to_double(key, value);
        else if (key == "traffic_rate_mbps") cfg.traffic_rate_mbps = to_double(key, value);
        else if (key == "n_fixed_traffic") cfg.n_fixed_traffic = static_cast<int>(to_int(key, value));
        else if (key == "n_random_traffic") cfg.n_random_traffic = static_cast<int>(to_int(key, value));
        else if (key == "traffic_rate_min_mbps") cfg.traffic_rate_min_mbps = to_double(key, value);
        else if (key == "traffic_rate_max_mbps") cfg.traffic_rate_max_mbps = to_double(key, value);
        else if (key == "rate_redraw_period_s") rate_redraw_s = to_double(key, value);
        else if (key == "saturate") cfg.saturate = to_bool(key, value);
        else if (key == "distances") cfg.distances_m = to_double_list(key, value);
        else if (key == "p_err_min") cfg.p_err_min = to_double(key, value);
        else if (key == "p_err_max") cfg.p_err_max = to_double(key, value);
        else if (key == "p_err_shape") cfg.p_err_shape = to_double(key, value);
        else if (key == "payload_bytes") cfg.payload_bytes = static_cast<int>(to_int(key, value));
        else if (key == "data_rate_mbps") cfg.data_rate_mbps = to_double(key, value);
        else if (key == "retry_cap") cfg.retry_cap = static_cast<int>(to_int(key, value));
        else if (key == "cw_min") cfg.cw_min = static_cast<int>(to_int(key, value));
        else if (key == "cw_max") cfg.cw_max = static_cast<int>(to_int(key, value));
        else if (key == "fixed_cw") cfg.fixed_cw = static_cast<int>(to_int(key, value));
        else if (key == "delay_limit_ms") delay_limit_ms = to_double(key, value);
        else if (key == "lr") cfg.hyper.lr = to_double(key, value);
        else if (key == "tau") cfg.hyper.tau = to_double(key, value);
        else if (key == "batch_size") cfg.hyper.batch = static_cast<int>(to_int(key, value));
        else if (key == "gamma") cfg.hyper.gamma = to_double(key, value);
        else if (key == "buffer_capacity") cfg.hyper.buffer_capacity = static_cast<int>(to_int(key, value));
        else if (key == "noise_sigma") cfg.hyper.noise_sigma = to_double(key, value);
        else if (key == "noise_decay") cfg.hyper.noise_decay = to_double(key, value);
        else if (key == "hidden") cfg.hyper.hidden = to_int_list(key, value);
        else if (key == "refresh_targets_on_import") cfg.hyper.refresh_targets_on_import = to_bool(key, value);
        else if (key == "w1") cfg.w1 = to_double(key, value);
        else if (key == "w2") cfg.w2 = to_double(key, value);
        else if (key == "d_max") cfg.fed_d_max = to_double(key, value);
        else if (key == "min_samples") cfg.min_samples = to_int(key, value);
        else if (key == "top_k") {
            if (value == "auto") cfg.top_k = -2;
            else if (value == "all") cfg.top_k = -1;
            else cfg.top_k = static_cast<int>(to_int(key, value));
        }
        else if (key == "lambda") cfg.lambda = to_double(key, value);
        else if (key == "normalize_betas") cfg.normalize_betas = to_bool(key, value);
        else if (key == "warmup_frac") cfg.warmup_frac = to_double(key, value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "dump_weights") cfg.dump_weights = to_bool(key, value);
        else throw ConfigError("config: line " + std::to_string(lineno) + ": unknown key '" + key +
                               "'");
    }

    if (!have_n) throw ConfigError("config: key 'n_stations': required");
    cfg.sim_time_us = seconds_to_us("sim_time_s", sim_time_s);
    cfg.step_us = seconds_to_us("step_ms", step_ms / 1000.0);
    cfg.fl_period_us = seconds_to_us("fl_period_s", fl_period_s);
    cfg.delay_limit_us = delay_limit_ms * 1000.0;
    cfg.rate_redraw_period_us =
        rate_redraw_s < 0.0 ? cfg.fl_period_us : seconds_to_us("rate_redraw_period_s", rate_redraw_s);
    if (cfg.traffic_rate_max_mbps < 0.0) cfg.traffic_rate_max_mbps = 2.0 * cfg.traffic_rate_mbps;

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_overrides(ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& mode,
                     const std::optional<std::string>& out_dir) {
    if (seed) cfg.seed = *seed;
    if (mode) cfg.mode = parse_mode(*mode);
    if (out_dir) cfg.out_dir = *out_dir;
    cfg.validate();
}

sim::MacTiming make_timing(const ExperimentConfig& cfg) {
    sim::MacTiming t;
    t.data_rate_mbps = cfg.data_rate_mbps;
    return t;
}

sim::ChannelErrorModel make_error_model(const ExperimentConfig& cfg) {
    sim::ChannelErrorModel m;
    m.p_min = cfg.p_err_min;
    m.p_max = cfg.p_err_max;
    m.shape = cfg.p_err_shape;
    return m;
}

}  // namespace fedcw::harness
