#include "chirpsync/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "chirpsync/channel.hpp"
#include "chirpsync/estimator.hpp"
#include "chirpsync/io.hpp"
#include "chirpsync/signal.hpp"
#include "chirpsync/simlab.hpp"

#ifndef CHIRPSYNC_VERSION
#define CHIRPSYNC_VERSION "dev"
#endif

namespace chirpsync::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Usage problems detected after CLI11 parsing (bad values, unknown config keys...).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Merged view of config-file entries and explicit flags; flags win.
class Settings {
public:
    explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto& s = it->second;
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw UsageError("invalid value for " + key + ": '" + s + "' (expected a nonnegative integer)");
        }
        return v;
    }

    std::size_t size(const std::string& key, std::size_t fallback) const {
        return static_cast<std::size_t>(u64(key, fallback));
    }

    double real(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto& s = it->second;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
            throw UsageError("invalid value for " + key + ": '" + s + "' (expected a finite number)");
        }
        return v;
    }

    bool boolean(const std::string& key, bool fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const auto& s = it->second;
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw UsageError("invalid value for " + key + ": '" + s + "' (expected true or false)");
    }

private:
    std::map<std::string, std::string> values_;
};

/// One subcommand's value-taking options, stored as raw strings so they can be
/// merged with config-file entries before typed parsing.
struct CommandOptions {
    explicit CommandOptions(CLI::App* sub) : app(sub) {}

    CLI::App* app;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;

    void add(const std::string& key, const std::string& help) {
        opts[key] = app->add_option("--" + key, raw[key], help);
    }
};

const std::set<std::string> kGlobalKeys{"seed", "out"};

Settings merge_settings(const CommandOptions& cmd, const std::map<std::string, std::string>& global_raw,
                        const std::map<std::string, CLI::Option*>& global_opts, const std::string& config_path) {
    std::map<std::string, std::string> merged;
    if (!config_path.empty()) {
        merged = io::read_key_value_file(config_path);
        for (const auto& [key, value] : merged) {
            if (cmd.opts.count(key) == 0 && kGlobalKeys.count(key) == 0) {
                throw UsageError("config key '" + key + "' is not valid for '" + cmd.app->get_name() + "'");
            }
        }
    }
    for (const auto& [key, opt] : global_opts) {
        if (opt->count() > 0) merged[key] = global_raw.at(key);
    }
    for (const auto& [key, opt] : cmd.opts) {
        if (opt->count() > 0) merged[key] = cmd.raw.at(key);
    }
    return Settings(std::move(merged));
}

ExperimentConfig experiment_from(const Settings& s, ExperimentConfig cfg) {
    cfg.n_fft = s.size("n", cfg.n_fft);
    cfg.r1 = s.size("r1", cfg.r1);
    cfg.r2 = s.size("r2", cfg.r2);
    cfg.cp_len = s.size("cp", cfg.cp_len);
    cfg.channel.path_count = s.size("paths", cfg.channel.path_count);
    cfg.channel.decay = s.real("decay", cfg.channel.decay);
    cfg.channel.normalize_power = s.boolean("normalize", cfg.channel.normalize_power);
    cfg.cfo_true = s.real("cfo", cfg.cfo_true);
    cfg.ffo_stage_enabled = s.boolean("ffo-stage", cfg.ffo_stage_enabled);
    cfg.master_seed = s.u64("seed", cfg.master_seed);
    cfg.trials_per_point = s.size("trials", cfg.trials_per_point);
    cfg.threads = s.size("threads", cfg.threads);
    cfg.sca_search_range = s.size("search-range", cfg.sca_search_range);
    if (s.has("estimators")) {
        cfg.estimators.clear();
        std::string_view list = s.text("estimators", "");
        while (true) {
            const auto comma = list.find(',');
            cfg.estimators.push_back(parse_estimator(list.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            list = list.substr(comma + 1);
        }
    }
    return cfg;
}

std::string manifest_path_for(const fs::path& output) { return output.string() + ".manifest.json"; }

void write_manifest(const std::string& command, const std::string& config_json, const fs::path& output) {
    io::RunManifest manifest;
    manifest.command = command;
    manifest.config_json = config_json;
    manifest.tool_version = CHIRPSYNC_VERSION;
    manifest.started_at = io::timestamp_utc();
    manifest.output_paths = {output.string()};
    io::write_text(manifest_path_for(output), io::manifest_json(manifest));
}

int cmd_preamble(const Settings& s, std::ostream& out) {
    const PreambleSpec spec{CazacParams{s.size("n", 128), s.size("r1", 2)},
                            CazacParams{s.size("n", 128), s.size("r2", 8)}, s.size("cp", 16)};
    spec.validate();
    if (spec.cp_len > spec.n_fft()) throw ConfigError("cyclic prefix longer than the symbol");
    const auto frame = build_preamble(spec);

    const fs::path path = s.text("out", "preamble.iq");
    io::write_iq(path, frame.samples);

    json cfg;
    cfg["n_fft"] = spec.n_fft();
    cfg["r1"] = spec.first.rate;
    cfg["r2"] = spec.second.rate;
    cfg["cp_len"] = spec.cp_len;
    write_manifest("preamble", cfg.dump(), path);
    out << path.string() << ": " << frame.samples.size() << " samples\n";
    return kSuccess;
}

int cmd_fig1(const Settings& s, std::ostream& out) {
    ExperimentConfig base;
    base.snr_grid_db = {20.0};
    base.trials_per_point = 1;
    auto cfg = experiment_from(s, base);
    const auto grid = io::parse_snr_grid(s.text("snr", "20"));
    if (grid.size() != 1) throw UsageError("fig1 takes a single --snr value");
    cfg.snr_grid_db = grid;
    cfg.validate();

    const auto dump = dump_correlations(cfg, grid.front(), cfg.master_seed);
    const fs::path path = s.text("out", "fig1.csv");
    io::write_text(path, io::fig1_csv(dump));
    write_manifest("fig1", io::config_to_json(cfg), path);
    out << path.string() << ": " << dump.rows.size() << " rows\n";
    return kSuccess;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
    fs::path p = path;
    const auto ext = p.extension().string();
    p.replace_extension();
    p += suffix + ext;
    return p;
}

int cmd_fig2(const Settings& s, bool full_grid, std::ostream& out) {
    ExperimentConfig base;
    if (s.has("snr")) base.snr_grid_db = io::parse_snr_grid(s.text("snr", ""));
    const auto cfg_base = experiment_from(s, base);

    std::vector<std::size_t> sizes{cfg_base.n_fft};
    if (full_grid && !s.has("n")) sizes = {64, 128};

    std::vector<ChannelMode> modes;
    const auto mode_text = s.text("mode", full_grid ? "both" : "varying");
    if (mode_text == "both") {
        modes = {ChannelMode::Varying, ChannelMode::Static};
    } else {
        modes = {parse_mode(mode_text)};
    }

    const fs::path out_path = s.text("out", "fig2.csv");
    for (const std::size_t n : sizes) {
        const fs::path path = sizes.size() > 1 ? with_suffix(out_path, "_n" + std::to_string(n)) : out_path;
        std::string csv = io::fig2_header();
        json runs = json::array();
        for (const auto mode : modes) {
            auto cfg = cfg_base;
            cfg.n_fft = n;
            cfg.channel.mode = mode;
            cfg.validate();
            csv += io::fig2_rows(run_sweep(cfg));
            runs.push_back(json::parse(io::config_to_json(cfg)));
        }
        io::write_text(path, csv);
        write_manifest("fig2", runs.dump(), path);
        out << path.string() << '\n';
    }
    return kSuccess;
}

int cmd_estimate(const Settings& s, const std::string& input, std::ostream& out, std::ostream& err) {
    const PreambleSpec spec{CazacParams{s.size("n", 128), s.size("r1", 2)},
                            CazacParams{s.size("n", 128), s.size("r2", 8)}, s.size("cp", 16)};
    spec.validate();
    const auto samples = io::read_iq(input);
    const std::size_t need = 2 * spec.symbol_length();
    if (samples.size() < need) {
        throw UsageError("input holds " + std::to_string(samples.size()) + " samples; the preamble needs " +
                         std::to_string(need));
    }
    const auto symbols = strip_cyclic_prefix(samples, spec.n_fft(), spec.cp_len, 2);
    const EstimatorOptions options{s.boolean("ffo-stage", true)};

    json report;
    try {
        const auto est = ProposedEstimator(spec).estimate(symbols, options);
        report["ffo"] = est.ffo;
        report["ifo_residual"] = est.ifo_residual;
        report["total"] = est.total;
        report["loc_1"] = est.peaks.loc_1;
        report["loc_2"] = est.peaks.loc_2;
        report["failed"] = est.failed;
        out << report.dump() << '\n';
        return est.failed ? kEstimationFailure : kSuccess;
    } catch (const DegenerateSignalError& e) {
        report["failed"] = true;
        report["error"] = e.what();
        out << report.dump() << '\n';
        err << "estimate: " << e.what() << '\n';
        return kEstimationFailure;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chirp-preamble CFO estimation lab", "chirpsync"};
    app.require_subcommand(1);

    std::map<std::string, std::string> global_raw;
    std::map<std::string, CLI::Option*> global_opts;
    std::string config_path;
    global_opts["seed"] = app.add_option("--seed", global_raw["seed"], "Master random seed");
    global_opts["out"] = app.add_option("--out", global_raw["out"], "Output file");
    app.add_option("--config", config_path, "Key-value config file; flags override its entries");

    CommandOptions preamble{app.add_subcommand("preamble", "Write the chirp preamble as raw IQ")};
    CommandOptions fig1{app.add_subcommand("fig1", "Correlation profiles of one frame (CSV)")};
    CommandOptions fig2{app.add_subcommand("fig2", "Failure-probability sweep (CSV)")};
    CommandOptions estimate{app.add_subcommand("estimate", "Estimate the CFO of an IQ capture (JSON)")};

    for (auto* cmd : {&preamble, &fig1, &fig2, &estimate}) {
        cmd->app->fallthrough();
        cmd->add("n", "FFT size N (power of two)");
        cmd->add("r1", "Chirp rate of the first symbol");
        cmd->add("r2", "Chirp rate of the second symbol");
        cmd->add("cp", "Cyclic prefix length in samples");
    }
    for (auto* cmd : {&fig1, &fig2}) {
        cmd->add("paths", "Channel path count L");
        cmd->add("decay", "Power delay profile decay D");
        cmd->add("normalize", "Normalize channel power to 1 (true/false)");
        cmd->add("cfo", "True CFO in subcarrier spacings");
        cmd->add("snr", "SNR in dB (fig2: list a,b,c or range start:step:stop; 'inf' = noiseless)");
        cmd->add("ffo-stage", "Run the fractional stage (true/false)");
    }
    fig2.add("mode", "Channel mode: static, varying or both");
    fig2.add("trials", "Trials per SNR point");
    fig2.add("estimators", "Comma list of proposed,sca");
    fig2.add("threads", "Worker threads (0 = all cores)");
    fig2.add("search-range", "SCA integer search range g (0 = N/4)");
    bool full_grid = false;
    fig2.app->add_flag("--paper", full_grid, "Both N=64 and N=128, both channel modes, both estimators");
    estimate.add("ffo-stage", "Run the fractional stage (true/false)");
    std::string input;
    estimate.app->add_option("input", input, "Raw IQ file (binary32 LE, interleaved)")->required();

    std::vector<const char*> argv{"chirpsync"};
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        for (auto* cmd : {&preamble, &fig1, &fig2, &estimate}) {
            if (!cmd->app->parsed()) continue;
            const auto settings = merge_settings(*cmd, global_raw, global_opts, config_path);
            if (cmd == &preamble) return cmd_preamble(settings, out);
            if (cmd == &fig1) return cmd_fig1(settings, out);
            if (cmd == &fig2) return cmd_fig2(settings, full_grid, out);
            return cmd_estimate(settings, input, out, err);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << '\n';
    }
    return kUsageError;
}

}  // namespace chirpsync::cli
