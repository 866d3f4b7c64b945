#pragma once

#include "noisysketch/vector.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace noisysketch {

/// Additive Gaussian corruption x̃ = x + σ‖x‖₂ r with r ~ N(0, I), r drawn from
/// `seed` in its own randomness domain (independent of any sketch seed).
struct NoiseModel {
    double sigma = 0.1;
    std::uint64_t seed = 0;
};

/// Throws BadParams unless sigma is finite and positive.
void validate(const NoiseModel& nm);

struct NoisyStats {
    Index n = 0;
    double norm2_sq_noisy = 0.0;
    double norm_inf_noisy = 0.0;
    double nu_noisy = 0.0;

    friend bool operator==(const NoisyStats&, const NoisyStats&) = default;
};

/// i-th entry of the standard normal noise vector r for this seed.
double noise_entry(std::uint64_t seed, Index i);

/// Dense x̃. Throws ZeroVector for x = 0.
Vector corrupt(const Vector& x, const NoiseModel& nm);

/// ‖·‖₂², ‖·‖∞ and ν of an already corrupted vector. Throws ZeroVector for 0.
NoisyStats noisy_stats(const Vector& noisy);

/// Same statistics as noisy_stats(corrupt(x, nm)), bit for bit, in one pass
/// over fixed 2¹⁶-entry blocks without materializing x̃. Blocks may be spread
/// over `threads` workers (0 = machine parallelism) without changing results.
NoisyStats corrupt_streaming(const Vector& x, const NoiseModel& nm, unsigned threads = 1);

/// Streaming form for signals given entrywise. `norm2_sq_x` must equal
/// norm2_sq of the vector whose entries `entry` returns.
NoisyStats corrupt_streaming(Index n, const std::function<double(Index)>& entry, double norm2_sq_x,
                             const NoiseModel& nm, unsigned threads = 1);

/// Estimator of ‖x‖₂² from ‖x̃‖₂²: norm2_sq_noisy / (1 + σ²n).
double recover_norm_sq(double norm2_sq_noisy, double sigma, Index n);

inline constexpr const char* kNoisyStatsCsvHeader = "n,sigma,seed,norm2sq,norminf,nu";
std::string to_csv_row(const NoisyStats& stats, const NoiseModel& nm);

}  // namespace noisysketch
