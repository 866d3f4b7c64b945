#pragma once

#include "noisysketch/vector.hpp"

#include <cstdint>
#include <numbers>

namespace noisysketch::bounds {

/// Target distortion ε_S and failure probability δ_S of the sketch, with the
/// hashing constants E and C₂. E and C₂ have no published values; the defaults
/// are calibration knobs.
struct EmbeddingParams {
    double eps_s = 0.5;
    double delta_s = 0.1;
    double E = std::numbers::e;
    double C2 = 1.0;
};

/// Concentration slack ε of ‖r‖², Gaussian tail level t, max-Gaussian
/// constant C₁ and the noise scale σ. Requires 2σt < 1.
struct NoiseTailParams {
    double eps = 0.1;
    double t = 3.0;
    double C1 = 2.0;
    double sigma = 0.1;
};

void validate(const EmbeddingParams& p);
void validate(const NoiseTailParams& q);

/// Largest non-uniformity for which a 1-hashing matrix of hashing_m rows
/// embeds with probability 1 − δ_S:
///   C₂√ε_S · min{ log(E/ε_S)/log(1/δ_S), √(log E / log(1/δ_S)) }.
/// Branches that would be negative (E < ε_S, E < 1) count as zero.
double nu_bar(const EmbeddingParams& p);

/// (εσ²n + 2σt)/(1 + σ²n), the relative half-width of the noisy-norm interval.
double noisy_slack(Index n, const NoiseTailParams& q);

/// Dimension threshold n₀ with the log(2n) term evaluated at n_for_log,
/// clamped below at 1.
double n0_threshold(double nu_x, const EmbeddingParams& p, const NoiseTailParams& q,
                    std::uint64_t n_for_log);

/// Smallest n such that every n' ≥ n satisfies n' ≥ n0_threshold(·, n').
/// Equals the smallest solution whenever the solutions are upward closed.
/// Throws BadParams if none exists below 2⁶².
std::uint64_t solve_n0(double nu_x, const EmbeddingParams& p, const NoiseTailParams& q);

/// Rows for a scaled sampling matrix on noisy input, before the ceiling.
double sampling_m_value(double nu_x, Index n, const EmbeddingParams& p, const NoiseTailParams& q);
Index sampling_m(double nu_x, Index n, const EmbeddingParams& p, const NoiseTailParams& q);

/// Rows for a scaled sampling matrix on clean input: 2nν²ε_S⁻²log(1/δ_S).
double clean_sampling_m_value(double nu_x, Index n, const EmbeddingParams& p);
Index clean_sampling_m(double nu_x, Index n, const EmbeddingParams& p);

/// Rows for a 1-hashing matrix: E·ε_S⁻²·log(1/δ_S). Requires E < 2/(δ_S log(1/δ_S)).
double hashing_m_value(const EmbeddingParams& p);
Index hashing_m(const EmbeddingParams& p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Interval (1+σ²n)(1 ∓ slack)·‖x‖² that holds ‖x̃‖² with high probability.
Interval noisy_norm_interval(double norm2_sq_x, Index n, const NoiseTailParams& q);

struct TailBounds {
    double max_gauss = 0.0;  ///< P(max |X_i| ≥ t) ≤ 2n e^{−t²/2}
    double chi_sq = 0.0;     ///< P(‖r‖² outside n(1 ± ε)) ≤ 2e^{−nε²/12}
    double combined = 0.0;   ///< chi_sq + 2e^{−t²/2} + (2n)^{−(C₁−1)}
};

/// Failure probabilities, each clamped to [0, 1].
TailBounds tail_bounds(Index n, const NoiseTailParams& q);

/// Failure probability of the noisy-norm interval alone: chi_sq + 2e^{−t²/2}.
double interval_failure(Index n, const NoiseTailParams& q);

/// High-probability upper bound on ν(x̃):
///   (ν(x) + σ√(2C₁ log 2n)) / √((1+σ²n)(1 − slack)).
double noisy_nu_bound(double nu_x, Index n, const NoiseTailParams& q);

/// Success probability (1 − combined)(1 − δ_S) of the noisy hashing and
/// sampling guarantees.
double noisy_success_probability(Index n, const EmbeddingParams& p, const NoiseTailParams& q);

}  // namespace noisysketch::bounds
