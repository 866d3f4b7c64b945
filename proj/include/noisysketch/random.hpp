#pragma once

// Counter-based randomness shared by the sketch and noise modules.
//
// Every random quantity is a pure function of (seed, domain, index, counter):
//
//   key(seed, domain, index) = combine(combine(seed, domain), index)
//   combine(a, b)            = mix64(a ^ mix64(b + kGolden))
//   word(key, k)             = mix64(key + kGolden * (k + 1))
//
// mix64 is the splitmix64 finalizer, so word(key, ·) is exactly the splitmix64
// output sequence started from state `key`. Standard normals use the inverse
// CDF (Wichura's AS241, PPND16) on one 52-bit uniform in (0, 1), so each normal
// consumes exactly one word and the counter mapping is static.

#include <cmath>
#include <cstdint>

namespace noisysketch::random {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Seed domains. Streams in distinct domains are independent even for equal seeds.
enum class Domain : std::uint64_t {
    gaussian_column = 0x47,
    hashing_column = 0x48,
    sampling_row = 0x53,
    noise = 0x4E,
    trial = 0x54,
    trial_operator = 0x4F,
    trial_noise = 0x52,
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ mix64(b + kGolden));
}

constexpr std::uint64_t stream_key(std::uint64_t seed, Domain domain,
                                   std::uint64_t index) noexcept {
    return combine(combine(seed, static_cast<std::uint64_t>(domain)), index);
}

constexpr std::uint64_t word(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(key + kGolden * (counter + 1));
}

/// Uniform double in the open interval (0, 1) from the top 52 bits of w:
/// (k + 1/2)·2⁻⁵², every value exactly representable.
constexpr double uniform_open(std::uint64_t w) noexcept {
    return (static_cast<double>(w >> 12) + 0.5) * 0x1p-52;
}

/// Standard normal quantile, Wichura (1988) AS241 PPND16. Relative accuracy
/// about 1e-16 on (0, 1).
inline double normal_quantile(double p) noexcept {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

/// N(0, 1) variate from a single word.
inline double standard_normal(std::uint64_t w) noexcept {
    return normal_quantile(uniform_open(w));
}

/// Sequential view over word(key, 0), word(key, 1), ...
class WordStream {
  public:
    explicit constexpr WordStream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next() noexcept { return word(key_, counter_++); }

    /// Unbiased integer in [0, range), Lemire's multiply-shift with rejection.
    /// range must be nonzero.
    std::uint64_t below(std::uint64_t range) noexcept {
        unsigned __int128 product = static_cast<unsigned __int128>(next()) * range;
        auto low = static_cast<std::uint64_t>(product);
        if (low < range) {
            const std::uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(next()) * range;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    std::uint64_t consumed() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace noisysketch::random
