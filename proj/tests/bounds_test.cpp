#include "noisysketch/bounds.hpp"
#include "noisysketch/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace noisysketch;
using namespace noisysketch::bounds;

namespace {

const EmbeddingParams tight{0.25, 0.01, std::numbers::e, 1.0};
const EmbeddingParams loose{0.5, 0.1, std::numbers::e, 1.0};

// Independent long-double evaluation of the n₀ threshold with ν̄ passed in.
long double n0_reference(long double nu_x, long double nb, long double sigma, long double C1, long double t,
                         long double eps, long double n) {
    const long double peak = nu_x + sigma * std::sqrt(2.0L * C1 * std::log(2.0L * n));
    const long double ratio = peak / nb;
    return (ratio * ratio - 1.0L + 2.0L * sigma * t) / (sigma * sigma * (1.0L - eps));
}

}  // namespace

TEST_CASE("nu_bar") {
    CHECK(nu_bar(tight) == doctest::Approx(0.23299530089232803).epsilon(1e-14));
    CHECK(nu_bar(loose) == doctest::Approx(0.4659906017846561).epsilon(1e-14));
    auto doubled = tight;
    doubled.C2 = 2.0;
    CHECK(nu_bar(doubled) == 2.0 * nu_bar(tight));
    auto degenerate = tight;
    degenerate.E = degenerate.eps_s;
    CHECK(nu_bar(degenerate) == 0.0);
    auto small_E = tight;
    small_E.E = 0.5;
    CHECK(nu_bar(small_E) == 0.0);
    CHECK_THROWS_AS(nu_bar({0.5, 1.0, std::numbers::e, 1.0}), BadParams);
    CHECK_THROWS_AS(nu_bar({0.5, 0.0, std::numbers::e, 1.0}), BadParams);
    CHECK_THROWS_AS(nu_bar({1.0, 0.1, std::numbers::e, 1.0}), BadParams);
    CHECK_THROWS_AS(nu_bar({0.5, 0.1, -1.0, 1.0}), BadParams);
    CHECK_THROWS_AS(nu_bar({0.5, 0.1, std::numbers::e, 0.0}), BadParams);
}

TEST_CASE("n0_threshold") {
    const NoiseTailParams q{0.1, 3.0, 2.0, 0.01};
    const double value = n0_threshold(1.0, tight, q, 1000000);
    CHECK(value == doctest::Approx(226601.96108244293).epsilon(1e-13));
    CHECK(std::fabs(value - static_cast<double>(n0_reference(1.0L, nu_bar(tight), 0.01L, 2.0L, 3.0L, 0.1L, 1e6L))) <=
          1e-12 * value);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 500; ++rep) {
        const EmbeddingParams p{0.05 + 0.9 * u(rng), 0.01 + 0.4 * u(rng), 2.0 + 3.0 * u(rng), 0.5 + 1.5 * u(rng)};
        const double sigma = 0.005 + 0.5 * u(rng);
        const NoiseTailParams tq{0.01 + 0.9 * u(rng), (0.01 + 0.98 * u(rng)) / (2 * sigma), 1.1 + 3 * u(rng), sigma};
        const double nu_x = 0.001 + 0.999 * u(rng);
        const auto n = static_cast<std::uint64_t>(1 + u(rng) * 1e9);
        const double got = n0_threshold(nu_x, p, tq, n);
        const long double ref = std::max(
            1.0L, n0_reference(nu_x, nu_bar(p), tq.sigma, tq.C1, tq.t, tq.eps, static_cast<long double>(n)));
        CHECK(std::fabs(got - static_cast<double>(ref)) <= 1e-11 * static_cast<double>(ref));
        CHECK(n0_threshold(std::min(1.0, nu_x * 1.01), p, tq, n) >= got);
    }

    // Numerator at 0⁺: ν(x) + σ√(2C₁ log 2n) = ν̄ and t → 0⁺ clamps to 1.
    const NoiseTailParams small_t{0.1, 1e-12, 2.0, 0.01};
    const double peak = 0.01 * std::sqrt(4.0 * std::log(20.0));
    CHECK(n0_threshold(nu_bar(tight) - peak, tight, small_t, 10) == 1.0);

    CHECK(n0_threshold(0.5, tight, q, 1000) < n0_threshold(0.6, tight, q, 1000));
    CHECK_THROWS_AS(n0_threshold(0.0, tight, q, 1000), BadParams);
    CHECK_THROWS_AS(n0_threshold(1.5, tight, q, 1000), BadParams);
    CHECK_THROWS_AS(n0_threshold(0.5, tight, {0.1, 60.0, 2.0, 0.01}, 1000), BadParams);
}

TEST_CASE("solve_n0 returns the smallest self-consistent dimension") {
    const NoiseTailParams q{0.1, 3.0, 2.0, 0.1};
    CHECK(solve_n0(1.0, loose, q) == 1198);

    const NoiseTailParams q2{0.1, 3.0, 2.0, 0.01};
    for (const auto& [nu_x, p, tq] : {std::tuple{1.0, loose, q}, std::tuple{0.3, loose, q},
                                      std::tuple{1.0, tight, q2}, std::tuple{0.05, tight, q}}) {
        const std::uint64_t n0 = solve_n0(nu_x, p, tq);
        auto holds = [&](std::uint64_t n) {
            return static_cast<long double>(n) >=
                   std::max(1.0L, n0_reference(nu_x, nu_bar(p), tq.sigma, tq.C1, tq.t, tq.eps, n));
        };
        std::uint64_t brute = 1;
        while (!holds(brute)) ++brute;
        CHECK(n0 == brute);
    }
    CHECK(solve_n0(1.0, tight, q2) == 224833);

    // Tiny ν̄ pushes the fixed point past 2⁶².
    EmbeddingParams barely = loose;
    barely.E = 1.0 + 1e-300;
    CHECK_THROWS_AS(solve_n0(1.0, barely, {0.1, 3.0, 2.0, 1e-9}), BadParams);
}

TEST_CASE("solve_n0 skips a leading solution that is not upward closed") {
    // Large ν̄ and σ: n = 1 satisfies the threshold but n = 2 does not.
    const EmbeddingParams p{0.9, 0.3, 4.5, 2.0};
    const NoiseTailParams q{0.5, 0.1, 4.0, 0.45};
    auto holds = [&](std::uint64_t n) {
        return static_cast<long double>(n) >= std::max(1.0L, n0_reference(0.9, nu_bar(p), q.sigma, q.C1, q.t, q.eps, n));
    };
    REQUIRE(holds(1));
    REQUIRE_FALSE(holds(2));
    std::uint64_t last_fail = 0;
    for (std::uint64_t n = 1; n < 100000; ++n)
        if (!holds(n)) last_fail = n;
    CHECK(solve_n0(0.9, p, q) == last_fail + 1);
}

TEST_CASE("cross-consistency of the noisy non-uniformity bound") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const EmbeddingParams p{0.05 + 0.9 * u(rng), 0.01 + 0.4 * u(rng), 2.0 + 3.0 * u(rng), 0.5 + 1.5 * u(rng)};
        const double sigma = 0.01 + 0.5 * u(rng);
        const NoiseTailParams q{0.01 + 0.9 * u(rng), (0.01 + 0.98 * u(rng)) / (2 * sigma), 1.1 + 3 * u(rng), sigma};
        const double nu_x = 0.001 + 0.999 * u(rng);
        const std::uint64_t n0 = solve_n0(nu_x, p, q);
        for (std::uint64_t n : {n0, n0 + 1, 2 * n0, 10 * n0}) {
            const double nb = nu_bar(p);
            CHECK(noisy_nu_bound(nu_x, static_cast<Index>(n), q) <= nb * (1 + 1e-12));
            ++checked;
        }
    }
    CHECK(checked == 4000);
}

TEST_CASE("sampling_m") {
    const NoiseTailParams q{0.1, 3.0, 2.0, 0.1};
    CHECK(sampling_m_value(1 / std::sqrt(3.0), 1000, loose, q) == doctest::Approx(2496.7178471503657).epsilon(1e-13));
    CHECK(sampling_m(1 / std::sqrt(3.0), 1000, loose, q) == 2497);

    auto squared = loose;
    squared.delta_s = loose.delta_s * loose.delta_s;
    CHECK(sampling_m_value(0.3, 500, squared, q) == doctest::Approx(2 * sampling_m_value(0.3, 500, loose, q)).epsilon(1e-14));

    // Large σ: 2ε_S⁻² log(1/δ_S) · 2C₁ log(2n) / (1 − ε).
    const NoiseTailParams loud{0.1, 1e-4, 2.0, 1e3};
    const double limit = 2 / 0.25 * std::log(10.0) * 2 * 2 * std::log(2000.0) / 0.9;
    CHECK(sampling_m_value(1 / std::sqrt(1000.0), 1000, loose, loud) == doctest::Approx(limit).epsilon(1e-4));

    CHECK(sampling_m(0.2, 1000, loose, q) < sampling_m(0.4, 1000, loose, q));
    CHECK_THROWS_AS(sampling_m(0.5, 1000, loose, {0.1, 5.0, 2.0, 0.1}), BadParams);
    CHECK_THROWS_AS(sampling_m(0.5, 0, loose, q), BadParams);

    CHECK(clean_sampling_m_value(1.0, 1000, loose) == doctest::Approx(18420.680743952365).epsilon(1e-14));
    CHECK(clean_sampling_m(1.0, 1000, loose) == 18421);
    CHECK(clean_sampling_m(1 / std::sqrt(1000.0), 1000, loose) == 19);
}

TEST_CASE("hashing_m") {
    CHECK(hashing_m_value(loose) == doctest::Approx(25.03630086706558).epsilon(1e-14));
    CHECK(hashing_m(loose) == 26);
    auto halved = loose;
    halved.eps_s = 0.25;
    CHECK(hashing_m_value(halved) == doctest::Approx(4 * hashing_m_value(loose)).epsilon(1e-15));
    auto at_limit = loose;
    at_limit.E = 2.0 / (0.1 * std::log(10.0));
    CHECK_THROWS_AS(hashing_m(at_limit), BadParams);
    at_limit.E = std::nextafter(at_limit.E, 0.0);
    CHECK(hashing_m(at_limit) == 80);
}

TEST_CASE("noisy_norm_interval") {
    const auto iv = noisy_norm_interval(1.0, 1000, {0.1, 3.0, 2.0, 0.1});
    CHECK(iv.lo == doctest::Approx(9.4).epsilon(1e-14));
    CHECK(iv.hi == doctest::Approx(12.6).epsilon(1e-14));
    CHECK(iv.contains(11.0));
    CHECK_FALSE(iv.contains(9.3));

    const auto iv2 = noisy_norm_interval(1.0, 10000, {0.1, 3.0, 2.0, 0.01});
    CHECK(iv2.lo == doctest::Approx(1.84).epsilon(1e-14));
    CHECK(iv2.hi == doctest::Approx(2.16).epsilon(1e-14));

    const auto point = noisy_norm_interval(3.0, 200, {1e-15, 1e-15, 2.0, 0.2});
    CHECK(point.lo == doctest::Approx(3.0 * 9.0).epsilon(1e-13));
    CHECK(point.hi == doctest::Approx(3.0 * 9.0).epsilon(1e-13));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double sigma = 0.01 + u(rng);
        const NoiseTailParams q{0.01 + 0.9 * u(rng), 0.99 * u(rng) / (2 * sigma) + 1e-9, 2.0, sigma};
        const Index n = 1 + static_cast<Index>(u(rng) * 1e6);
        const double x2 = 0.1 + 10 * u(rng);
        const auto r = noisy_norm_interval(x2, n, q);
        CHECK(r.lo > 0.0);
        CHECK((r.lo + r.hi) / 2 == doctest::Approx((1 + sigma * sigma * n) * x2).epsilon(1e-13));
    }
    CHECK_THROWS_AS(noisy_norm_interval(1.0, 100, {0.1, 5.0, 2.0, 0.1}), BadParams);
    CHECK_THROWS_AS(noisy_norm_interval(1.0, 100, {0.1, 10.0, 2.0, 0.05}), BadParams);
}

TEST_CASE("tail_bounds") {
    const NoiseTailParams q{0.1, 3.0, 2.0, 0.1};
    const auto one = tail_bounds(1, q);
    CHECK(one.max_gauss == doctest::Approx(0.022217993076484612).epsilon(1e-14));
    CHECK(one.chi_sq == 1.0);
    CHECK(one.combined == 1.0);
    const auto big = tail_bounds(10000, q);
    CHECK(big.combined == doctest::Approx(0.02274873202932364).epsilon(1e-13));
    CHECK(big.max_gauss == 1.0);
    CHECK(tail_bounds(1, {0.1, 50.0, 2.0, 0.001}).max_gauss == 0.0);
    CHECK(interval_failure(10000, q) == doctest::Approx(0.02274873202932364 - 0.5e-4).epsilon(1e-13));
    CHECK(noisy_success_probability(10000, loose, q) == doctest::Approx(0.8795261411736087).epsilon(1e-13));
    for (Index n : {1, 10, 1000, 100000000}) {
        const auto b = tail_bounds(n, q);
        for (double v : {b.max_gauss, b.chi_sq, b.combined}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("noisy_nu_bound") {
    const NoiseTailParams q{0.1, 3.0, 2.0, 0.1};
    CHECK(noisy_nu_bound(1 / std::sqrt(3.0), 1000, q) == doctest::Approx(0.36815601038940854).epsilon(1e-13));
    CHECK(noisy_nu_bound(1.0, 10000, q) == doctest::Approx(0.17137302711427841).epsilon(1e-13));
    const double asymptote = std::sqrt(4 * std::log(2e8)) / std::sqrt(0.9 * 1e8);
    CHECK(noisy_nu_bound(1e-4, 100000000, q) == doctest::Approx(asymptote).epsilon(2e-4));
    CHECK(noisy_nu_bound(0.2, 1000, q) < noisy_nu_bound(0.3, 1000, q));
    CHECK_THROWS_AS(noisy_nu_bound(0.2, 1000, {0.1, 5.0, 2.0, 0.1}), BadParams);
}
