// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "noisysketch/bounds.hpp"
#include "noisysketch/experiments.hpp"
#include "noisysketch/sketch.hpp"

#include <bit>
#include <chrono>
#include <limits>
#include <numbers>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace noisysketch;
namespace ex = noisysketch::experiments;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit_s > 0 && secs >= time_limit_s) {
        o.passed = false;
        o.detail += "; runtime " + fmt(secs) + " s exceeds " + fmt(time_limit_s) + " s";
    }
    if (!o.passed) ++failures;
    std::printf("%s %d %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

ex::ExperimentConfig config(ex::ExperimentName name, Index trials) {
    auto cfg = ex::default_config(name);
    cfg.trials = trials;
    cfg.master_seed = 20240601;
    return cfg;
}

Eigen::MatrixXd naive(const Eigen::MatrixXd& M, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Zero(M.rows());
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j) out[i] += M(i, j) * v[j];
    return M;
}

std::int64_t ulps(double a, double b) {
    auto key = [](double x) {
        const auto bits = std::bit_cast<std::int64_t>(x);
        return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
    };
    const auto d = key(a) - key(b);
    return d < 0 ? -d : d;
}

std::vector<SketchKind> kinds_for(Index m) {
    std::vector<SketchKind> kinds{SketchKind::gaussian(), SketchKind::sampling()};
    for (Index s = 1; s <= m; ++s) kinds.push_back(SketchKind::hashing(s));
    return kinds;
}

}  // namespace

int main() {
    criterion(1, "fig1 zero-distortion fraction", 5.0, [] {
        const auto r = ex::run_fig1(config(ex::ExperimentName::fig1, 10000));
        const double miss = std::pow(1.0 - 3.0 / 1000.0, 100);
        const double zf = r.aggregates.zero_fraction;
        return Outcome{std::fabs(zf - miss) <= 0.02,
                       "zero fraction " + fmt(zf) + " vs (1-3/1000)^100 = " + fmt(miss) + " +- 0.02"};
    });

    criterion(2, "fig2 noisy concentration", 10.0, [] {
        const auto r = ex::run_fig2(config(ex::ExperimentName::fig2, 1000));
        const double mean = r.aggregates.mean, sd = r.aggregates.std, fig1_sd = r.theory.at("fig1_std");
        const bool ok = mean >= 0.9 && mean <= 1.35 && sd <= fig1_sd / 3.0;
        return Outcome{ok, "mean " + fmt(mean) + " in [0.9, 1.35], std " + fmt(sd) + " <= fig1 std " +
                               fmt(fig1_sd) + " / 3"};
    });

    criterion(3, "appendix non-uniformity slope", 120.0, [] {
        const auto r = ex::run_appendix_nu(ex::default_config(ex::ExperimentName::appendix_nu));
        const double slope = *r.aggregates.slope;
        return Outcome{slope >= 0.9 && slope <= 1.1,
                       "slope " + fmt(slope) + " in [0.9, 1.1] over " + std::to_string(r.grid.size()) +
                           " points n in [" + std::to_string(r.grid.front()) + ", " +
                           std::to_string(r.grid.back()) + "]"};
    });

    criterion(4, "noisy norm interval coverage", 0, [] {
        const auto r = ex::run_interval_coverage(config(ex::ExperimentName::interval_coverage, 10000));
        const double failure = 2 * std::exp(-1e4 * 0.01 / 12) + 2 * std::exp(-4.5);
        const double rate = *r.aggregates.success_rate, se = *r.aggregates.success_se;
        return Outcome{rate >= 1 - failure - 3 * se, "coverage " + fmt(rate) + " >= 1 - " + fmt(failure) +
                                                         " - 3*" + fmt(se)};
    });

    criterion(5, "noisy non-uniformity coverage", 0, [] {
        const auto r = ex::run_nu_coverage(config(ex::ExperimentName::nu_coverage, 10000));
        const double failure = 2 * std::exp(-1e4 * 0.01 / 12) + 2 * std::exp(-4.5) + 1.0 / 2e4;
        const double rate = *r.aggregates.success_rate, se = *r.aggregates.success_se;
        return Outcome{rate >= 1 - failure - 3 * se,
                       "coverage " + fmt(rate) + " >= 1 - " + fmt(failure) + " - 3*" + fmt(se)};
    });

    criterion(6, "distortion unbiasedness", 0, [] {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> g;
        Eigen::VectorXd x(64);
        for (Index i = 0; i < 64; ++i) x[i] = g(rng);
        const Vector v = Vector::dense(x);
        std::string detail;
        bool ok = true;
        for (const auto kind : {SketchKind::gaussian(), SketchKind::hashing(1), SketchKind::hashing(4),
                                SketchKind::sampling()}) {
            const int seeds = 10000;
            double sum = 0, sq = 0;
            for (int s = 0; s < seeds; ++s) {
                const double d = embedding_distortion(make_operator(kind, 16, 64, s), v);
                sum += d;
                sq += d * d;
            }
            const double mean = sum / seeds;
            const double se = std::sqrt((sq / seeds - mean * mean) / (seeds - 1));
            const bool this_ok = std::fabs(mean - 1.0) <= 5 * se;
            ok = ok && this_ok;
            detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(kind.family)) +
                      (kind.family == SketchFamily::hashing ? "(" + std::to_string(kind.s) + ")" : "") + " " +
                      fmt(mean) + "+-" + fmt(se);
        }
        return Outcome{ok, detail + " (5 SE of 1)"};
    });

    criterion(7, "apply equals materialize times vector", 0, [] {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g;
        std::int64_t worst = 0;
        long cases = 0;
        for (Index n = 2; n <= 8; ++n)
            for (Index m = 2; m <= n; ++m)
                for (const auto kind : kinds_for(m))
                    for (std::uint64_t seed = 0; seed < 100; ++seed) {
                        const auto S = make_operator(kind, m, n, seed);
                        Eigen::VectorXd x(n);
                        for (Index i = 0; i < n; ++i) x[i] = g(rng);
                        Eigen::VectorXd expected;
                        naive(materialize(S), x, expected);
                        const auto y = apply(S, Vector::dense(x));
                        for (Index i = 0; i < m; ++i) worst = std::max(worst, ulps(y[i], expected[i]));
                        ++cases;
                    }
        return Outcome{worst <= 2, std::to_string(cases) + " operators, worst " + std::to_string(worst) + " ulp"};
    });

    criterion(8, "structural invariants", 0, [] {
        std::mt19937_64 rng(8);
        long violations = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            const Index n = std::uniform_int_distribution<Index>(1, 60)(rng);
            const Index m = std::uniform_int_distribution<Index>(1, n)(rng);
            const int family = static_cast<int>(rng() % 3);
            const Index s = std::uniform_int_distribution<Index>(1, m)(rng);
            const SketchKind kind = family == 0 ? SketchKind::gaussian()
                                    : family == 1 ? SketchKind::hashing(s)
                                                  : SketchKind::sampling();
            const auto M = materialize(make_operator(kind, m, n, rng()));
            if (kind.family == SketchFamily::hashing) {
                const double mag = 1.0 / std::sqrt(static_cast<double>(s));
                for (Index j = 0; j < n; ++j) {
                    Index nz = 0;
                    for (Index i = 0; i < m; ++i)
                        if (M(i, j) != 0.0) {
                            ++nz;
                            violations += std::fabs(M(i, j)) != mag;
                        }
                    violations += nz != s;
                }
            } else if (kind.family == SketchFamily::sampling) {
                const double mag = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
                for (Index i = 0; i < m; ++i) {
                    Index nz = 0;
                    for (Index j = 0; j < n; ++j)
                        if (M(i, j) != 0.0) {
                            ++nz;
                            violations += M(i, j) != mag;
                        }
                    violations += nz != 1;
                }
            } else {
                violations += M.rows() != m || M.cols() != n || !M.allFinite();
            }
        }
        return Outcome{violations == 0, "1000 tuples, " + std::to_string(violations) + " violations"};
    });

    criterion(9, "oblivious-rate contrast", 0, [] {
        const Index m = bounds::hashing_m({0.5, 0.1, std::numbers::e, 1.0});
        auto gcfg = config(ex::ExperimentName::oblivious_rate, 10000);
        gcfg.op = ex::OperatorSpec{SketchKind::gaussian(), m};
        const auto g = ex::run_oblivious_rate(gcfg);
        auto scfg = gcfg;
        scfg.op = ex::OperatorSpec{SketchKind::sampling(), m};
        const auto s = ex::run_oblivious_rate(scfg);
        auto hcfg = config(ex::ExperimentName::oblivious_rate, 10000);
        hcfg.signal = {ex::SignalKind::one_hot, 10'000, 1};
        hcfg.noise_sigma = 0.1;
        hcfg.op = ex::OperatorSpec{SketchKind::hashing(1), m};
        const auto h = ex::run_oblivious_rate(hcfg);

        const double g_rate = *g.aggregates.success_rate, g_se = *g.aggregates.success_se;
        const double s_rate = *s.aggregates.success_rate;
        const double h_rate = *h.aggregates.success_rate, h_se = *h.aggregates.success_se;
        const double target = h.theory.at("target_probability");
        const double n0 = h.theory.at("n0");
        const bool ok = m == 26 && g_rate >= 0.9 - 3 * g_se && s_rate <= 0.2 && 10'000 >= n0 &&
                        h_rate >= target - 3 * h_se;
        return Outcome{ok, "m=" + std::to_string(m) + "; gaussian " + fmt(g_rate) + " >= 0.9 - 3*" + fmt(g_se) +
                               "; sampling " + fmt(s_rate) + " <= 0.2; noisy 1-hashing (n=10000 >= n0=" +
                               fmt(n0) + ") " + fmt(h_rate) + " >= " + fmt(target) + " - 3*" + fmt(h_se)};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
