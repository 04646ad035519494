#include "chirpsync/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "chirpsync/random.hpp"
#include "chirpsync/sca.hpp"

namespace chirpsync {

std::string_view to_string(EstimatorKind kind) {
    return kind == EstimatorKind::Proposed ? "proposed" : "sca";
}

std::string_view to_string(ChannelMode mode) {
    return mode == ChannelMode::Static ? "static" : "varying";
}

EstimatorKind parse_estimator(std::string_view text) {
    if (text == "proposed") return EstimatorKind::Proposed;
    if (text == "sca") return EstimatorKind::Sca;
    throw ConfigError("unknown estimator '" + std::string(text) + "' (expected proposed or sca)");
}

ChannelMode parse_mode(std::string_view text) {
    if (text == "static") return ChannelMode::Static;
    if (text == "varying") return ChannelMode::Varying;
    throw ConfigError("unknown channel mode '" + std::string(text) + "' (expected static or varying)");
}

PreambleSpec ExperimentConfig::preamble_spec() const {
    return PreambleSpec{CazacParams{n_fft, r1}, CazacParams{n_fft, r2}, cp_len};
}

std::size_t ExperimentConfig::effective_search_range() const {
    return sca_search_range == 0 ? sca_default_search_range(n_fft) : sca_search_range;
}

void ExperimentConfig::validate() const {
    const auto spec = preamble_spec();
    spec.validate();
    channel.validate();
    check_channel_compatibility(spec, channel.path_count);
    if (!(std::abs(cfo_true) < static_cast<double>(n_fft) / 2.0)) {
        throw ConfigError("|cfo| must be below N/2 = " + std::to_string(n_fft / 2));
    }
    if (effective_search_range() > n_fft / 4) {
        throw ConfigError("SCA search range must not exceed N/4");
    }
    for (const double snr : snr_grid_db) {
        if (std::isnan(snr)) throw ConfigError("SNR grid contains NaN");
    }
}

const SweepCell* SweepResult::find(double snr_db, EstimatorKind estimator) const {
    for (const auto& c : cells) {
        if (c.snr_db == snr_db && c.estimator == estimator) return &c;
    }
    return nullptr;
}

WilsonInterval wilson_interval(std::size_t failures, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(failures) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {failures == 0 ? 0.0 : std::max(0.0, centre - half),
            failures == trials ? 1.0 : std::min(1.0, centre + half)};
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, EstimatorKind estimator,
                         std::uint64_t trial_index) {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(snr_index),
                                     static_cast<std::uint64_t>(estimator), trial_index});
}

namespace {

// Maps x into [-period/2, period/2).
double wrap_symmetric(double x, double period) {
    return x - period * std::floor(x / period + 0.5);
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t snr_index, EstimatorKind estimator,
                      std::uint64_t trial_index) {
    const double snr = cfg.snr_grid_db.at(snr_index);
    RandomSource rng(trial_seed(cfg.master_seed, snr_index, estimator, trial_index));

    TrialRecord rec;
    rec.snr_db = snr;
    rec.estimator = estimator;

    const ImpairmentSpec imp{cfg.cfo_true, snr, std::isfinite(snr)};
    const EstimatorOptions options{cfg.ffo_stage_enabled};

    CfoEstimate est;
    double ffo_period = 0.0;
    try {
        if (estimator == EstimatorKind::Proposed) {
            const auto spec = cfg.preamble_spec();
            const auto rx = transmit(build_preamble(spec), cfg.channel, imp, rng);
            est = ProposedEstimator(spec).estimate(rx.symbols, options);
            ffo_period = static_cast<double>(cfg.r1);
        } else {
            const auto pre = sca_build_preamble(cfg.n_fft, cfg.cp_len, rng);
            const auto rx = transmit(pre.frame, cfg.channel, imp, rng);
            est = sca_estimate(rx.symbols, pre, cfg.effective_search_range(), options);
            ffo_period = 2.0;
        }
    } catch (const DegenerateSignalError&) {
        rec.hard_failure = true;
        return rec;
    }

    const auto true_integer = std::llround(cfg.cfo_true - est.ffo);
    rec.ifo_correct = !est.failed && est.ifo_residual == true_integer;
    rec.ffo_error = wrap_symmetric(est.ffo - cfg.cfo_true, ffo_period);
    rec.total_error = est.total - cfg.cfo_true;
    return rec;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepResult result;
    const std::size_t trials = cfg.trials_per_point;
    if (trials == 0) return result;

    const std::size_t n_est = cfg.estimators.size();
    const std::size_t n_cells = cfg.snr_grid_db.size() * n_est;
    const std::size_t total = n_cells * trials;
    std::vector<TrialRecord> records(total);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t cell = i / trials;
            records[i] = run_trial(cfg, cell / n_est, cfg.estimators[cell % n_est], i % trials);
        }
    };

    std::size_t workers = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, total);
    if (workers <= 1) {
        work(0, total);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (total + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(total, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }

    // Sequential aggregation in index order keeps floating-point sums reproducible.
    result.cells.reserve(n_cells);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        SweepCell out;
        out.snr_db = cfg.snr_grid_db[cell / n_est];
        out.estimator = cfg.estimators[cell % n_est];
        out.mode = cfg.channel.mode;
        out.trials = trials;
        double sq_sum = 0.0;
        std::size_t measured = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& rec = records[cell * trials + t];
            if (!rec.ifo_correct) ++out.failures;
            if (!rec.hard_failure) {
                sq_sum += rec.ffo_error * rec.ffo_error;
                ++measured;
            }
        }
        out.failure_prob = static_cast<double>(out.failures) / static_cast<double>(trials);
        out.ffo_mse = measured == 0 ? 0.0 : sq_sum / static_cast<double>(measured);
        const auto ci = wilson_interval(out.failures, trials);
        out.ci_lo = ci.lo;
        out.ci_hi = ci.hi;
        result.cells.push_back(out);
    }
    return result;
}

CorrelationDump dump_correlations(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed) {
    cfg.validate();
    RandomSource rng(seed);
    const auto spec = cfg.preamble_spec();
    const ImpairmentSpec imp{cfg.cfo_true, snr_db, std::isfinite(snr_db)};
    const auto rx = transmit(build_preamble(spec), cfg.channel, imp, rng);

    const ProposedEstimator estimator(spec);
    const double ffo = cfg.ffo_stage_enabled ? estimate_ffo(rx.symbols[0], cfg.r1) : 0.0;
    const auto corr_1 = estimator.correlate(compensate(rx.symbols[0], ffo), 0);
    const auto corr_2 = estimator.correlate(compensate(rx.symbols[1], ffo), 1);

    CorrelationDump dump;
    dump.realizations = rx.realizations;
    dump.residual_offset = cfg.cfo_true - ffo;
    dump.rows.resize(cfg.n_fft);
    for (std::size_t tau = 0; tau < cfg.n_fft; ++tau) {
        dump.rows[tau] = {tau, std::abs(corr_1[tau]), std::abs(corr_2[tau])};
    }
    return dump;
}

}  // namespace chirpsync
