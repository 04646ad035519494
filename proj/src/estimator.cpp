#include "chirpsync/estimator.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chirpsync {

namespace {

constexpr double kDegenerateMagnitude = 1e-12;

void require_length(std::span<const Complex> y, std::size_t n, const char* what) {
    if (y.size() != n) {
        throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " samples, got " +
                          std::to_string(y.size()));
    }
}

std::vector<double> magnitudes(std::span<const Complex> values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::abs(values[i]);
    return out;
}

}  // namespace

CfoDecomposition decompose_cfo(double eps, std::int64_t r) {
    if (r <= 0) throw ConfigError("rate must be positive");
    CfoDecomposition d;
    d.eps = eps;
    d.eps_int = static_cast<std::int64_t>(std::floor(eps + 0.5));
    d.eps_frac = eps - static_cast<double>(d.eps_int);
    d.eps_mod_r = d.eps_int % r;
    d.quotient = d.eps_int / r;
    return d;
}

FfoPrediction predict_ffo(const CfoDecomposition& d, std::int64_t r) {
    const double base = d.eps_frac + static_cast<double>(d.eps_mod_r);
    // 2*eps_r compared against r avoids halving odd rates.
    if (std::llabs(2 * d.eps_mod_r) < r) return {base, FfoBranch::Direct};
    if (d.eps_mod_r > 0) return {base - static_cast<double>(r), FfoBranch::WrapDown};
    return {base + static_cast<double>(r), FfoBranch::WrapUp};
}

Complex time_autocorr(std::span<const Complex> y, std::size_t r) {
    const std::size_t n = y.size();
    if (r < 2 || n == 0 || n % r != 0) {
        throw ConfigError("autocorrelation rate r=" + std::to_string(r) + " must be >= 2 and divide N=" +
                          std::to_string(n));
    }
    const std::size_t lag = n / r;
    const std::size_t count = n - lag;
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < count; ++i) acc += y[i + lag] * std::conj(y[i]);
    return acc / static_cast<double>(count);
}

double estimate_ffo(std::span<const Complex> y, std::size_t r) {
    const Complex rt = time_autocorr(y, r);
    if (std::abs(rt) < kDegenerateMagnitude) {
        throw DegenerateSignalError("autocorrelation magnitude below 1e-12; phase undefined");
    }
    double phase = std::arg(rt);
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;  // principal value in (-pi, pi]
    return static_cast<double>(r) * phase / (2.0 * std::numbers::pi);
}

SampleBuffer compensate(std::span<const Complex> y, double ffo) {
    const double n_fft = static_cast<double>(y.size());
    SampleBuffer out(y.size());
    for (std::size_t n = 0; n < y.size(); ++n) {
        out[n] = y[n] * std::polar(1.0, -2.0 * std::numbers::pi * ffo * static_cast<double>(n) / n_fft);
    }
    return out;
}

namespace {

// Correlating in frequency is the same as transforming the product x(n)*conj(y'(n))
// back with a positive exponent: R_f(tau) = 1/N * sum_n x(n) conj(y'(n)) e^{+j2pi tau n/N}.
std::vector<Complex> correlate_with_reference(std::span<const Complex> y_comp,
                                              std::span<const Complex> reference, const FftPlan& plan) {
    const std::size_t n = plan.size();
    std::vector<Complex> product(n);
    for (std::size_t i = 0; i < n; ++i) product[i] = reference[i] * std::conj(y_comp[i]);
    plan.inverse(product);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : product) v *= scale;
    return product;
}

}  // namespace

std::vector<Complex> freq_correlate(std::span<const Complex> y_comp, const CazacParams& params) {
    params.validate();
    require_length(y_comp, params.n_fft, "freq_correlate");
    const FftPlan plan(params.n_fft);
    const auto reference = cazac_generate(params);
    return correlate_with_reference(y_comp, reference, plan);
}

std::size_t peak_location(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::optional<std::int64_t> resolve_ifo(std::size_t loc_1, std::size_t loc_2, std::size_t r2,
                                        std::size_t n_fft) {
    if (n_fft == 0 || r2 == 0) throw ConfigError("resolve_ifo needs N > 0 and r2 > 0");
    if (loc_1 >= n_fft || loc_2 >= n_fft) throw ConfigError("peak location outside [0, N)");

    const auto n = static_cast<std::int64_t>(n_fft);
    const auto step = static_cast<std::int64_t>(r2);
    const auto l1 = static_cast<std::int64_t>(loc_1);
    auto l2 = static_cast<std::int64_t>(loc_2);

    // Each loop walks the r2 comb across at most half the spectrum.
    const std::int64_t cap = n / step + 2;
    std::int64_t iterations = 0;
    auto tick = [&] { return ++iterations <= cap; };

    if (l1 < n / 2) {
        while (l2 >= n / 2) {
            if (!tick()) return std::nullopt;
            l2 = (l2 + step) % n;
        }
        while (l2 < l1) {
            if (!tick()) return std::nullopt;
            l2 += step;
        }
    } else {
        while (l2 < l1 && l2 > step) {
            if (!tick()) return std::nullopt;
            l2 += step;
        }
    }

    std::int64_t eps_i = l2 % n;
    if (eps_i > n / 2) eps_i -= n;
    return eps_i;
}

ProposedEstimator::ProposedEstimator(const PreambleSpec& spec) : spec_(spec), plan_(spec.n_fft()) {
    spec_.validate();
    reference_[0] = cazac_generate(spec_.first);
    reference_[1] = cazac_generate(spec_.second);
}

std::vector<Complex> ProposedEstimator::correlate(std::span<const Complex> y_comp, std::size_t k) const {
    require_length(y_comp, spec_.n_fft(), "correlate");
    return correlate_with_reference(y_comp, reference_.at(k), plan_);
}

CfoEstimate ProposedEstimator::estimate(std::span<const SampleBuffer> symbols,
                                        const EstimatorOptions& options) const {
    if (symbols.size() < 2) throw ConfigError("estimator needs both preamble symbols");
    const std::size_t n = spec_.n_fft();
    require_length(symbols[0], n, "symbol 1");
    require_length(symbols[1], n, "symbol 2");

    CfoEstimate est;
    est.ffo = options.ffo_stage ? estimate_ffo(symbols[0], spec_.first.rate) : 0.0;

    const auto corr_1 = correlate(compensate(symbols[0], est.ffo), 0);
    const auto corr_2 = correlate(compensate(symbols[1], est.ffo), 1);
    est.peaks.corr_1 = magnitudes(corr_1);
    est.peaks.corr_2 = magnitudes(corr_2);
    est.peaks.loc_1 = peak_location(est.peaks.corr_1);
    est.peaks.loc_2 = peak_location(est.peaks.corr_2);

    const auto ifo = resolve_ifo(est.peaks.loc_1, est.peaks.loc_2, spec_.second.rate, n);
    if (!ifo) {
        est.failed = true;
        est.total = est.ffo;
        return est;
    }
    est.ifo_residual = *ifo;
    est.total = static_cast<double>(est.ifo_residual) + est.ffo;
    return est;
}

CfoEstimate estimate_cfo(const ReceivedFrame& rx, const PreambleSpec& spec, const EstimatorOptions& options) {
    return ProposedEstimator(spec).estimate(rx.symbols, options);
}

}  // namespace chirpsync
