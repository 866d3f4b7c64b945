#include "noisysketch/bounds.hpp"

#include "noisysketch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace noisysketch::bounds {

namespace {

bool open_unit(double x) {
    return x > 0.0 && x < 1.0;
}

bool positive(double x) {
    return x > 0.0 && std::isfinite(x);
}

void check_nu(double nu_x) {
    if (!(nu_x > 0.0 && nu_x <= 1.0)) throw BadParams("non-uniformity must lie in (0, 1]");
}

void check_n(Index n) {
    if (n < 1) throw BadParams("dimension n must be at least 1");
}

double log_inv(double delta) {
    return std::log(1.0 / delta);
}

// σ√(2C₁ log 2n): the high-probability bound on σ‖r‖∞.
double noise_peak(double n, const NoiseTailParams& q) {
    return q.sigma * std::sqrt(2.0 * q.C1 * std::log(2.0 * n));
}

Index ceil_index(double value) {
    return static_cast<Index>(std::ceil(value));
}

}  // namespace

void validate(const EmbeddingParams& p) {
    if (!open_unit(p.eps_s)) throw BadParams("eps_s must lie in (0, 1)");
    if (!open_unit(p.delta_s)) throw BadParams("delta_s must lie in (0, 1)");
    if (!positive(p.E)) throw BadParams("E must be positive");
    if (!positive(p.C2)) throw BadParams("C2 must be positive");
}

void validate(const NoiseTailParams& q) {
    if (!open_unit(q.eps)) throw BadParams("eps must lie in (0, 1)");
    if (!positive(q.t)) throw BadParams("t must be positive");
    if (!positive(q.C1)) throw BadParams("C1 must be positive");
    if (!positive(q.sigma)) throw BadParams("sigma must be positive");
    if (!(2.0 * q.sigma * q.t < 1.0))
        throw BadParams("the noise bounds require 2*sigma*t < 1 (got " +
                        std::to_string(2.0 * q.sigma * q.t) + ")");
}

double nu_bar(const EmbeddingParams& p) {
    validate(p);
    const double L = log_inv(p.delta_s);
    if (!(L > 0.0)) throw BadParams("log(1/delta_s) must be positive");
    const double first = std::max(0.0, std::log(p.E / p.eps_s) / L);
    const double second = std::sqrt(std::max(0.0, std::log(p.E)) / L);
    return p.C2 * std::sqrt(p.eps_s) * std::min(first, second);
}

double noisy_slack(Index n, const NoiseTailParams& q) {
    const double s2n = q.sigma * q.sigma * static_cast<double>(n);
    return (q.eps * s2n + 2.0 * q.sigma * q.t) / (1.0 + s2n);
}

double n0_threshold(double nu_x, const EmbeddingParams& p, const NoiseTailParams& q,
                    std::uint64_t n_for_log) {
    validate(q);
    check_nu(nu_x);
    if (n_for_log < 1) throw BadParams("n_for_log must be at least 1");
    const double nb = nu_bar(p);
    if (!(nb > 0.0)) throw BadParams("nu_bar is zero, no dimension satisfies the threshold");
    const double ratio = (nu_x + noise_peak(static_cast<double>(n_for_log), q)) / nb;
    const double value =
        (ratio * ratio - 1.0 + 2.0 * q.sigma * q.t) / (q.sigma * q.sigma * (1.0 - q.eps));
    return std::max(1.0, value);
}

std::uint64_t solve_n0(double nu_x, const EmbeddingParams& p, const NoiseTailParams& q) {
    constexpr std::uint64_t limit = std::uint64_t{1} << 62;
    n0_threshold(nu_x, p, q, 1);
    auto holds = [&](std::uint64_t n) {
        return static_cast<double>(n) >= n0_threshold(nu_x, p, q, n);
    };
    // n − n0(n) is convex in log 2n: it falls until n√L·c exceeds (a + b√L)·b
    // (L = log 2n) and rises after. Only the rising branch is upward closed.
    const double nb = nu_bar(p);
    const double a = nu_x;
    const double b = q.sigma * std::sqrt(2.0 * q.C1);
    const double c = nb * nb * q.sigma * q.sigma * (1.0 - q.eps);
    auto rising = [&](std::uint64_t n) {
        const double rl = std::sqrt(std::log(2.0 * static_cast<double>(n)));
        return static_cast<double>(n) * rl * c > (a + b * rl) * b;
    };
    auto first = [&](std::uint64_t lo, auto pred) {
        std::uint64_t hi = lo;
        while (!pred(hi)) {
            if (hi >= limit) throw BadParams("solve_n0: no dimension below 2^62 satisfies n >= n0(n)");
            lo = hi;
            hi *= 2;
        }
        while (hi - lo > 1) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            (pred(mid) ? hi : lo) = mid;
        }
        return hi;
    };
    const std::uint64_t turn = rising(1) ? 1 : first(1, rising);
    if (holds(turn)) return turn == 1 || holds(turn - 1) ? 1 : turn;
    return first(turn, holds);
}

double sampling_m_value(double nu_x, Index n, const EmbeddingParams& p, const NoiseTailParams& q) {
    validate(p);
    validate(q);
    check_nu(nu_x);
    check_n(n);
    const double nd = static_cast<double>(n);
    const double factor = 1.0 - noisy_slack(n, q);
    if (!(factor > 0.0)) throw BadParams("sampling_m: noisy distortion factor is not positive");
    const double peak = nu_x + noise_peak(nd, q);
    return 2.0 / (p.eps_s * p.eps_s) * log_inv(p.delta_s) * peak * peak /
           ((q.sigma * q.sigma + 1.0 / nd) * factor);
}

Index sampling_m(double nu_x, Index n, const EmbeddingParams& p, const NoiseTailParams& q) {
    return ceil_index(sampling_m_value(nu_x, n, p, q));
}

double clean_sampling_m_value(double nu_x, Index n, const EmbeddingParams& p) {
    validate(p);
    check_nu(nu_x);
    check_n(n);
    return 2.0 * static_cast<double>(n) * nu_x * nu_x / (p.eps_s * p.eps_s) * log_inv(p.delta_s);
}

Index clean_sampling_m(double nu_x, Index n, const EmbeddingParams& p) {
    return ceil_index(clean_sampling_m_value(nu_x, n, p));
}

double hashing_m_value(const EmbeddingParams& p) {
    validate(p);
    const double L = log_inv(p.delta_s);
    const double E_max = 2.0 / (p.delta_s * L);
    if (!(p.E < E_max))
        throw BadParams("hashing_m: E must be below 2/(delta_s log(1/delta_s)) = " + std::to_string(E_max));
    return p.E / (p.eps_s * p.eps_s) * L;
}

Index hashing_m(const EmbeddingParams& p) {
    return ceil_index(hashing_m_value(p));
}

Interval noisy_norm_interval(double norm2_sq_x, Index n, const NoiseTailParams& q) {
    validate(q);
    check_n(n);
    if (!(norm2_sq_x >= 0.0)) throw BadParams("norm2_sq_x must be nonnegative");
    const double base = 1.0 + q.sigma * q.sigma * static_cast<double>(n);
    const double slack = noisy_slack(n, q);
    return {base * (1.0 - slack) * norm2_sq_x, base * (1.0 + slack) * norm2_sq_x};
}

TailBounds tail_bounds(Index n, const NoiseTailParams& q) {
    const double nd = static_cast<double>(n);
    const double gauss_one = 2.0 * std::exp(-q.t * q.t / 2.0);
    TailBounds b;
    b.max_gauss = std::min(1.0, nd * gauss_one);
    b.chi_sq = std::min(1.0, 2.0 * std::exp(-nd * q.eps * q.eps / 12.0));
    b.combined = std::min(1.0, b.chi_sq + gauss_one + std::pow(2.0 * nd, -(q.C1 - 1.0)));
    return b;
}

double interval_failure(Index n, const NoiseTailParams& q) {
    return std::min(1.0, tail_bounds(n, q).chi_sq + 2.0 * std::exp(-q.t * q.t / 2.0));
}

double noisy_nu_bound(double nu_x, Index n, const NoiseTailParams& q) {
    validate(q);
    check_n(n);
    if (!(nu_x >= 0.0 && nu_x <= 1.0)) throw BadParams("non-uniformity must lie in [0, 1]");
    const double nd = static_cast<double>(n);
    const double denom = (1.0 + q.sigma * q.sigma * nd) * (1.0 - noisy_slack(n, q));
    if (!(denom > 0.0)) throw BadParams("noisy_nu_bound: denominator is not positive");
    return (nu_x + noise_peak(nd, q)) / std::sqrt(denom);
}

double noisy_success_probability(Index n, const EmbeddingParams& p, const NoiseTailParams& q) {
    validate(p);
    return (1.0 - tail_bounds(n, q).combined) * (1.0 - p.delta_s);
}

}  // namespace noisysketch::bounds
