#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chirpsync/channel.hpp"
#include "chirpsync/signal.hpp"
#include "chirpsync/types.hpp"

namespace chirpsync {

/// Split of a normalized CFO into the pieces the fractional stage reasons about:
/// eps = quotient*r + eps_mod_r + eps_frac.
struct CfoDecomposition {
    double eps = 0.0;
    std::int64_t eps_int = 0;    // nearest integer
    double eps_frac = 0.0;       // eps - eps_int, in [-0.5, 0.5)
    std::int64_t eps_mod_r = 0;  // eps_int % r, truncated (carries the sign of eps_int)
    std::int64_t quotient = 0;   // eps_int / r, truncated toward zero
};

CfoDecomposition decompose_cfo(double eps, std::int64_t r);

/// Which of the three wrap cases of the fractional estimate applies.
enum class FfoBranch { Direct, WrapDown, WrapUp };

struct FfoPrediction {
    double value = 0.0;
    FfoBranch branch = FfoBranch::Direct;
};

/// Case-by-case prediction of the noiseless fractional estimate:
///   eps_f + eps_r         if |eps_r| <  r/2
///   eps_f + eps_r - r     if  r/2 <= eps_r < r
///   eps_f + eps_r + r     if -r < eps_r <= -r/2
/// Agrees with estimate_ffo() modulo r everywhere; exactly unless eps_r = +-r/2
/// and eps_f has the opposite sign, where the principal argument picks the other
/// representative.
FfoPrediction predict_ffo(const CfoDecomposition& d, std::int64_t r);

/// Lag-N/r autocorrelation averaged over the N - N/r overlapping products.
Complex time_autocorr(std::span<const Complex> y, std::size_t r);

/// Fractional offset (r/2pi)*arg(R_t), in (-r/2, r/2].
/// Throws DegenerateSignalError when |R_t| < 1e-12.
double estimate_ffo(std::span<const Complex> y, std::size_t r);

/// y(n) * exp(-j*2*pi*ffo*n/N), with n restarting at 0 for the window.
SampleBuffer compensate(std::span<const Complex> y, double ffo);

/// R_f(tau) = 1/N * sum_k X((k - tau) mod N) * conj(Z(k)) for tau = 0..N-1, where
/// Z = dft(y_comp) and X = dft(cazac_generate(params)).
std::vector<Complex> freq_correlate(std::span<const Complex> y_comp, const CazacParams& params);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t peak_location(std::span<const double> values);

/// Integer offset from the two correlation peak locations. Returns nullopt when
/// the loops exceed their iteration cap, which only happens for inputs no valid
/// comb pair can produce.
std::optional<std::int64_t> resolve_ifo(std::size_t loc_1, std::size_t loc_2, std::size_t r2,
                                        std::size_t n_fft);

struct PeakReport {
    std::vector<double> corr_1;  // |R_f| for the r1 symbol
    std::vector<double> corr_2;  // |R_f| for the r2 symbol
    std::size_t loc_1 = 0;
    std::size_t loc_2 = 0;
};

struct CfoEstimate {
    double ffo = 0.0;
    std::int64_t ifo_residual = 0;
    double total = 0.0;  // ifo_residual + ffo
    PeakReport peaks;
    bool failed = false;
};

struct EstimatorOptions {
    /// When false the fractional stage is skipped and both symbols are
    /// correlated uncompensated (ffo = 0).
    bool ffo_stage = true;
};

/// Two-stage estimator bound to one preamble. Reference spectra and the FFT
/// plan are computed once, so repeated estimate() calls are cheap.
class ProposedEstimator {
public:
    explicit ProposedEstimator(const PreambleSpec& spec);

    const PreambleSpec& spec() const noexcept { return spec_; }

    /// `symbols` are the two CP-free N-sample windows.
    CfoEstimate estimate(std::span<const SampleBuffer> symbols, const EstimatorOptions& options = {}) const;

    /// Same correlation as freq_correlate() against the stored reference for symbol k.
    std::vector<Complex> correlate(std::span<const Complex> y_comp, std::size_t k) const;

private:
    PreambleSpec spec_;
    FftPlan plan_;
    std::array<SampleBuffer, 2> reference_;  // time-domain chirps
};

CfoEstimate estimate_cfo(const ReceivedFrame& rx, const PreambleSpec& spec,
                         const EstimatorOptions& options = {});

}  // namespace chirpsync
