#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "chirpsync/channel.hpp"
#include "chirpsync/estimator.hpp"
#include "chirpsync/signal.hpp"

namespace chirpsync {

enum class EstimatorKind : std::uint8_t { Proposed = 0, Sca = 1 };

std::string_view to_string(EstimatorKind kind);
std::string_view to_string(ChannelMode mode);
EstimatorKind parse_estimator(std::string_view text);
ChannelMode parse_mode(std::string_view text);

/// SNR grid entry meaning "no noise at all".
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

struct ExperimentConfig {
    std::size_t n_fft = 128;
    std::size_t r1 = 2;
    std::size_t r2 = 8;
    std::size_t cp_len = 16;
    ChannelProfile channel{};
    double cfo_true = 20.0;
    std::vector<double> snr_grid_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    std::size_t trials_per_point = 10000;
    std::vector<EstimatorKind> estimators{EstimatorKind::Proposed, EstimatorKind::Sca};
    bool ffo_stage_enabled = false;
    std::uint64_t master_seed = 1;
    std::size_t sca_search_range = 0;  // 0 selects N/4
    std::size_t threads = 0;           // 0 selects hardware concurrency

    PreambleSpec preamble_spec() const;
    std::size_t effective_search_range() const;
    /// Throws ConfigError on the first violated constraint, including r1*L <= r2 < N/L.
    void validate() const;
};

struct TrialRecord {
    double snr_db = 0.0;
    EstimatorKind estimator = EstimatorKind::Proposed;
    bool ifo_correct = false;
    double ffo_error = 0.0;    // fractional-stage error modulo its ambiguity period
    double total_error = 0.0;  // estimated minus true CFO
    bool hard_failure = false; // degenerate signal; errors above are not meaningful

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct SweepCell {
    double snr_db = 0.0;
    EstimatorKind estimator = EstimatorKind::Proposed;
    ChannelMode mode = ChannelMode::Varying;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double failure_prob = 0.0;
    double ffo_mse = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;

    friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepResult {
    std::vector<SweepCell> cells;  // ordered by snr index, then estimator order in the config

    const SweepCell* find(double snr_db, EstimatorKind estimator) const;
    friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// 95% Wilson score interval for `failures` out of `trials`.
WilsonInterval wilson_interval(std::size_t failures, std::size_t trials);

/// Seed for one trial, derived from the master seed and the cell coordinates.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t snr_index, EstimatorKind estimator,
                         std::uint64_t trial_index);

/// Runs one Monte Carlo trial at cfg.snr_grid_db[snr_index].
TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t snr_index, EstimatorKind estimator,
                      std::uint64_t trial_index);

/// All trials for every (snr, estimator) cell. Output is independent of the
/// thread count.
SweepResult run_sweep(const ExperimentConfig& cfg);

struct CorrelationRow {
    std::size_t tau = 0;
    double corr_r1 = 0.0;
    double corr_r2 = 0.0;
};

struct CorrelationDump {
    std::vector<CorrelationRow> rows;
    std::vector<ChannelRealization> realizations;
    double residual_offset = 0.0;  // cfo minus the compensated fractional part
};

/// One frame through the channel at `snr_db`, returning both |R_f| profiles.
CorrelationDump dump_correlations(const ExperimentConfig& cfg, double snr_db, std::uint64_t seed);

}  // namespace chirpsync
