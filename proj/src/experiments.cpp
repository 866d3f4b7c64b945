#include "noisysketch/experiments.hpp"

#include "noisysketch/detail/parallel.hpp"
#include "noisysketch/detail/summation.hpp"
#include "noisysketch/errors.hpp"
#include "noisysketch/noise.hpp"
#include "noisysketch/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace noisysketch::experiments {

std::string_view to_string(ExperimentName name) noexcept {
    switch (name) {
        case ExperimentName::fig1: return "fig1";
        case ExperimentName::fig2: return "fig2";
        case ExperimentName::appendix_nu: return "appendix_nu";
        case ExperimentName::oblivious_rate: return "oblivious_rate";
        case ExperimentName::interval_coverage: return "interval_coverage";
        case ExperimentName::nu_coverage: return "nu_coverage";
    }
    return "unknown";
}

std::string_view to_string(Normalization norm) noexcept {
    return norm == Normalization::sigma2n ? "sigma2n" : "one_plus_sigma2n";
}

std::string_view to_string(SignalKind kind) noexcept {
    switch (kind) {
        case SignalKind::one_hot: return "one_hot";
        case SignalKind::equal_sparse: return "equal_sparse";
        case SignalKind::ones: return "ones";
    }
    return "unknown";
}

ExperimentName parse_experiment_name(std::string_view s) {
    for (auto n : {ExperimentName::fig1, ExperimentName::fig2, ExperimentName::appendix_nu,
                   ExperimentName::oblivious_rate, ExperimentName::interval_coverage,
                   ExperimentName::nu_coverage})
        if (s == to_string(n)) return n;
    throw ConfigMismatch("unknown experiment '" + std::string(s) + "'");
}

Normalization parse_normalization(std::string_view s) {
    if (s == "sigma2n") return Normalization::sigma2n;
    if (s == "one_plus_sigma2n") return Normalization::one_plus_sigma2n;
    throw ConfigMismatch("unknown normalization '" + std::string(s) + "'");
}

SignalKind parse_signal_kind(std::string_view s) {
    for (auto k : {SignalKind::one_hot, SignalKind::equal_sparse, SignalKind::ones})
        if (s == to_string(k)) return k;
    throw ConfigMismatch("unknown signal '" + std::string(s) + "'");
}

Vector SignalSpec::build() const {
    if (n < 1) throw ConfigMismatch("signal dimension must be positive");
    switch (kind) {
        case SignalKind::one_hot: return Vector::one_hot(n);
        case SignalKind::equal_sparse:
            if (k < 1 || k > n) throw ConfigMismatch("equal_sparse signal needs 1 <= k <= n");
            return Vector::equal_sparse(n, k);
        case SignalKind::ones: return Vector::ones(n);
    }
    throw ConfigMismatch("unknown signal kind");
}

ExperimentConfig default_config(ExperimentName name) {
    ExperimentConfig cfg;
    cfg.name = name;
    switch (name) {
        case ExperimentName::fig1:
            cfg.signal = {SignalKind::equal_sparse, 1000, 3};
            cfg.op = OperatorSpec{SketchKind::sampling(), 100};
            break;
        case ExperimentName::fig2:
            cfg.signal = {SignalKind::equal_sparse, 1000, 3};
            cfg.op = OperatorSpec{SketchKind::sampling(), 100};
            cfg.noise_sigma = 0.1;
            break;
        case ExperimentName::appendix_nu:
            cfg.signal = {SignalKind::one_hot, 10'000, 1};
            cfg.noise_sigma = 0.01;
            cfg.trials = 1;
            break;
        case ExperimentName::oblivious_rate:
            cfg.signal = {SignalKind::one_hot, 1000, 1};
            cfg.op = OperatorSpec{SketchKind::gaussian(), 0};
            cfg.trials = 1000;
            break;
        case ExperimentName::interval_coverage:
        case ExperimentName::nu_coverage:
            cfg.signal = {SignalKind::one_hot, 10'000, 1};
            cfg.noise_sigma = 0.01;
            cfg.trials = 1000;
            break;
    }
    return cfg;
}

std::uint64_t trial_seed(std::uint64_t master_seed, Index trial) {
    return random::stream_key(master_seed, random::Domain::trial, static_cast<std::uint64_t>(trial));
}

std::uint64_t operator_seed(std::uint64_t seed) {
    return random::combine(seed, static_cast<std::uint64_t>(random::Domain::trial_operator));
}

std::uint64_t noise_seed(std::uint64_t seed) {
    return random::combine(seed, static_cast<std::uint64_t>(random::Domain::trial_noise));
}

double binomial_se(double p, Index n) {
    if (n < 1) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigMismatch("regression needs >= 2 paired points");
    const double nd = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= nd;
    my /= nd;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw ConfigMismatch("regression abscissae are all equal");
    return sxy / sxx;
}

Aggregates aggregate(const std::vector<TrialRecord>& records, const std::vector<Index>& grid) {
    Aggregates a;
    a.count = static_cast<Index>(records.size());
    if (records.empty()) return a;
    detail::KahanSum sum;
    Index zeros = 0, successes = 0, flagged = 0;
    a.min = records.front().distortion;
    a.max = records.front().distortion;
    for (const auto& r : records) {
        sum.add(r.distortion);
        a.min = std::min(a.min, r.distortion);
        a.max = std::max(a.max, r.distortion);
        if (r.distortion == 0.0) ++zeros;
        if (r.in_interval) {
            ++flagged;
            if (*r.in_interval) ++successes;
        }
    }
    const double nd = static_cast<double>(records.size());
    a.mean = sum.sum / nd;
    if (records.size() > 1) {
        detail::KahanSum sq;
        for (const auto& r : records) sq.add((r.distortion - a.mean) * (r.distortion - a.mean));
        a.std = std::sqrt(sq.sum / (nd - 1.0));
    }
    a.zero_fraction = static_cast<double>(zeros) / nd;
    if (flagged > 0) {
        a.success_rate = static_cast<double>(successes) / static_cast<double>(flagged);
        a.success_se = binomial_se(*a.success_rate, flagged);
    }
    if (!grid.empty()) {
        if (grid.size() != records.size()) throw ConfigMismatch("grid and records differ in length");
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!records[i].nu_noisy) throw ConfigMismatch("regression needs nu_noisy on every record");
            const double n = static_cast<double>(grid[i]);
            lx.push_back(std::log(std::sqrt(std::log(n) / n)));
            ly.push_back(std::log(*records[i].nu_noisy));
        }
        a.slope = ols_slope(lx, ly);
    }
    return a;
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Index> log_grid(Index lo, Index hi, Index points) {
    if (lo < 2 || hi < lo || points < 2) throw ConfigMismatch("grid needs 2 <= grid_min <= grid_max and >= 2 points");
    std::vector<Index> grid;
    const double a = std::log10(static_cast<double>(lo));
    const double b = std::log10(static_cast<double>(hi));
    for (Index k = 0; k < points; ++k) {
        const double e = a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1);
        grid.push_back(static_cast<Index>(std::llround(std::pow(10.0, e))));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

unsigned threads_of(const ExperimentConfig& cfg) {
    return cfg.threads == 0 ? detail::default_threads() : cfg.threads;
}

void require_trials(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw ConfigMismatch("trials must be at least 1");
}

const OperatorSpec& require_operator(const ExperimentConfig& cfg, std::optional<SketchFamily> family) {
    if (!cfg.op) throw ConfigMismatch(std::string(to_string(cfg.name)) + " needs an operator");
    if (family && cfg.op->kind.family != *family)
        throw ConfigMismatch(std::string(to_string(cfg.name)) + " needs a " +
                             std::string(to_string(*family)) + " operator");
    return *cfg.op;
}

double require_noise(const ExperimentConfig& cfg) {
    if (!cfg.noise_sigma) throw ConfigMismatch(std::string(to_string(cfg.name)) + " needs noise (sigma)");
    validate(NoiseModel{*cfg.noise_sigma, 0});
    return *cfg.noise_sigma;
}

bounds::NoiseTailParams tail_with_sigma(const ExperimentConfig& cfg, double sigma) {
    auto q = cfg.tail;
    q.sigma = sigma;
    bounds::validate(q);
    return q;
}

// At least `target` up to 3 standard errors of the observed frequency.
Check rate_check(std::string name, double rate, double se, double target) {
    const double threshold = target - 3.0 * se;
    return {std::move(name), rate >= threshold,
            "rate " + fmt(rate) + " >= " + fmt(target) + " - 3*SE (" + fmt(threshold) + ")"};
}

ExperimentReport start(const ExperimentConfig& cfg) {
    ExperimentReport r;
    r.config = cfg;
    r.config.threads = 0;
    if (cfg.noise_sigma) r.config.tail.sigma = *cfg.noise_sigma;
    return r;
}

void index_plot(ExperimentReport& r) {
    for (const auto& rec : r.records)
        r.plot.emplace_back(static_cast<double>(rec.trial), rec.distortion);
}

// Clean ‖Sx‖²/‖x‖² with the same per-trial operator seeds fig1 and fig2 use.
std::vector<TrialRecord> sampling_clean_trials(const ExperimentConfig& cfg, const Vector& x, Index m) {
    std::vector<TrialRecord> out(static_cast<std::size_t>(cfg.trials));
    detail::parallel_for(cfg.trials, threads_of(cfg), [&](std::int64_t t) {
        const auto S = make_operator(SketchKind::sampling(), m, x.size(),
                                     operator_seed(trial_seed(cfg.master_seed, t)));
        out[static_cast<std::size_t>(t)] = {t, embedding_distortion(S, x), {}, {}, {}};
    });
    return out;
}

}  // namespace

ExperimentReport run_fig1(const ExperimentConfig& cfg) {
    require_trials(cfg);
    const auto& op = require_operator(cfg, SketchFamily::sampling);
    if (cfg.noise_sigma) throw ConfigMismatch("fig1 runs on the clean signal; remove sigma");
    const Vector x = cfg.signal.build();
    const Index m = op.m == 0 ? 100 : op.m;

    auto r = start(cfg);
    r.config.op->m = m;
    r.operator_descriptor = to_descriptor(make_operator(SketchKind::sampling(), m, x.size(),
                                                        operator_seed(trial_seed(cfg.master_seed, 0))));
    r.records = sampling_clean_trials(cfg, x, m);
    r.aggregates = aggregate(r.records);
    index_plot(r);

    // A trial is exactly zero iff all m samples miss the support.
    const double miss = std::pow(1.0 - static_cast<double>(x.nnz()) / static_cast<double>(x.size()),
                                 static_cast<double>(m));
    r.theory["predicted_zero_fraction"] = miss;
    r.theory["expected_distortion"] = 1.0;
    r.theory["m"] = static_cast<double>(m);
    const double tol = std::max(0.02, 4.0 * binomial_se(miss, cfg.trials));
    r.checks.push_back({"zero_fraction", std::fabs(r.aggregates.zero_fraction - miss) <= tol,
                        "|" + fmt(r.aggregates.zero_fraction) + " - " + fmt(miss) + "| <= " + fmt(tol)});
    return r;
}

ExperimentReport run_fig2(const ExperimentConfig& cfg) {
    require_trials(cfg);
    const auto& op = require_operator(cfg, SketchFamily::sampling);
    const double sigma = require_noise(cfg);
    const auto q = tail_with_sigma(cfg, sigma);
    const Vector x = cfg.signal.build();
    const Index n = x.size();
    const Index m = op.m == 0 ? 100 : op.m;
    const double nx = norm2_sq(x);
    const double s2n = sigma * sigma * static_cast<double>(n);
    const double normalizer = cfg.normalization == Normalization::sigma2n ? s2n : 1.0 + s2n;
    const auto interval = bounds::noisy_norm_interval(nx, n, q);

    auto r = start(cfg);
    r.config.op->m = m;
    r.operator_descriptor = to_descriptor(make_operator(SketchKind::sampling(), m, n,
                                                        operator_seed(trial_seed(cfg.master_seed, 0))));
    r.records.resize(static_cast<std::size_t>(cfg.trials));
    detail::parallel_for(cfg.trials, threads_of(cfg), [&](std::int64_t t) {
        const auto seed = trial_seed(cfg.master_seed, t);
        const auto S = make_operator(SketchKind::sampling(), m, n, operator_seed(seed));
        const Vector noisy = corrupt(x, {sigma, noise_seed(seed)});
        const auto stats = noisy_stats(noisy);
        const double sketched = norm2_sq(apply(S, noisy));
        r.records[static_cast<std::size_t>(t)] = {t, sketched / (normalizer * nx), stats.norm2_sq_noisy,
                                                  stats.nu_noisy, interval.contains(stats.norm2_sq_noisy)};
    });
    r.aggregates = aggregate(r.records);
    index_plot(r);

    const auto clean = aggregate(sampling_clean_trials(cfg, x, m));
    const double center = (1.0 + s2n) / normalizer;
    const double lo = center * 0.9 / 1.1;
    const double hi = center * 1.35 / 1.1;
    r.theory["center"] = center;
    r.theory["fig1_std"] = clean.std;
    r.theory["std_ratio"] = clean.std > 0.0 ? r.aggregates.std / clean.std : 0.0;
    r.theory["interval_lo"] = interval.lo;
    r.theory["interval_hi"] = interval.hi;
    r.theory["m"] = static_cast<double>(m);
    r.checks.push_back({"mean_band", lo <= r.aggregates.mean && r.aggregates.mean <= hi,
                        fmt(r.aggregates.mean) + " in [" + fmt(lo) + ", " + fmt(hi) + "]"});
    r.checks.push_back({"std_contrast", r.aggregates.std * 3.0 <= clean.std,
                        "std " + fmt(r.aggregates.std) + " <= fig1 std " + fmt(clean.std) + " / 3"});
    r.checks.push_back({"no_zero_trials", r.aggregates.zero_fraction == 0.0,
                        "zero fraction " + fmt(r.aggregates.zero_fraction)});
    return r;
}

ExperimentReport run_appendix_nu(const ExperimentConfig& cfg) {
    require_trials(cfg);
    const double sigma = require_noise(cfg);
    const Index top = cfg.full ? 100'000'000 : cfg.grid_max;
    auto r = start(cfg);
    r.config.grid_max = top;
    r.grid = log_grid(cfg.grid_min, top, cfg.grid_points);
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
        auto spec = cfg.signal;
        spec.n = r.grid[k];
        const Vector x = spec.build();
        const auto stats = corrupt_streaming(
            x, {sigma, noise_seed(trial_seed(cfg.master_seed, static_cast<Index>(k)))}, threads_of(cfg));
        const double recovered = recover_norm_sq(stats.norm2_sq_noisy, sigma, stats.n) / norm2_sq(x);
        r.records.push_back({static_cast<Index>(k), recovered, stats.norm2_sq_noisy, stats.nu_noisy, {}});
        const double n = static_cast<double>(r.grid[k]);
        r.plot.emplace_back(std::sqrt(std::log(n) / n), stats.nu_noisy);
    }
    r.aggregates = aggregate(r.records, r.grid);
    r.theory["reported_slope"] = 1.02;
    const double slope = *r.aggregates.slope;
    r.checks.push_back({"slope", 0.9 <= slope && slope <= 1.1, "slope " + fmt(slope) + " in [0.9, 1.1]"});
    return r;
}

ExperimentReport run_oblivious_rate(const ExperimentConfig& cfg) {
    require_trials(cfg);
    const auto& op = require_operator(cfg, std::nullopt);
    const Vector x = cfg.signal.build();
    const Index n = x.size();
    const double nx = norm2_sq(x);
    const double nu_x = nu(x);
    const auto& p = cfg.embedding;
    const bool noisy = cfg.noise_sigma.has_value();
    const double sigma = noisy ? require_noise(cfg) : 0.0;
    const auto q = noisy ? tail_with_sigma(cfg, sigma) : cfg.tail;

    const Index m_hash = bounds::hashing_m(p);
    Index m = op.m;
    if (m == 0) {
        m = (noisy && op.kind.family == SketchFamily::sampling) ? bounds::sampling_m(nu_x, n, p, q) : m_hash;
    }

    bool guarantee = false;
    double target = 1.0 - p.delta_s;
    double window_lo = 1.0 - p.eps_s;
    double window_hi = 1.0 + p.eps_s;
    double normalizer = 1.0;
    auto r = start(cfg);
    if (noisy) {
        const double slack = bounds::noisy_slack(n, q);
        window_lo = (1.0 - p.eps_s) * (1.0 - slack);
        window_hi = (1.0 + p.eps_s) * (1.0 + slack);
        normalizer = 1.0 + sigma * sigma * static_cast<double>(n);
        target = bounds::noisy_success_probability(n, p, q);
        r.theory["slack"] = slack;
    }
    switch (op.kind.family) {
        case SketchFamily::gaussian:
            guarantee = m >= m_hash;
            break;
        case SketchFamily::hashing:
            if (op.kind.s == 1) {
                const double nb = bounds::nu_bar(p);
                r.theory["nu_bar"] = nb;
                if (noisy) {
                    const auto n0 = bounds::solve_n0(nu_x, p, q);
                    r.theory["n0"] = static_cast<double>(n0);
                    guarantee = m >= m_hash && static_cast<std::uint64_t>(n) >= n0;
                } else {
                    guarantee = m >= m_hash && nu_x <= nb;
                }
            }
            break;
        case SketchFamily::sampling: {
            const Index needed = noisy ? bounds::sampling_m(nu_x, n, p, q) : bounds::clean_sampling_m(nu_x, n, p);
            r.theory["sampling_m"] = static_cast<double>(needed);
            r.theory["miss_probability"] =
                std::pow(1.0 - static_cast<double>(x.nnz()) / static_cast<double>(n), static_cast<double>(m));
            guarantee = m >= needed;
            break;
        }
    }

    r.config.op->m = m;
    r.operator_descriptor =
        to_descriptor(make_operator(op.kind, m, n, operator_seed(trial_seed(cfg.master_seed, 0))));
    r.records.resize(static_cast<std::size_t>(cfg.trials));
    detail::parallel_for(cfg.trials, threads_of(cfg), [&](std::int64_t t) {
        const auto seed = trial_seed(cfg.master_seed, t);
        const auto S = make_operator(op.kind, m, n, operator_seed(seed));
        TrialRecord rec{t, 0.0, {}, {}, {}};
        if (noisy) {
            const Vector noisy_x = corrupt(x, {sigma, noise_seed(seed)});
            const auto stats = noisy_stats(noisy_x);
            rec.distortion = norm2_sq(apply(S, noisy_x)) / (normalizer * nx);
            rec.noisy_norm_sq = stats.norm2_sq_noisy;
            rec.nu_noisy = stats.nu_noisy;
        } else {
            rec.distortion = embedding_distortion(S, x);
        }
        rec.in_interval = window_lo <= rec.distortion && rec.distortion <= window_hi;
        r.records[static_cast<std::size_t>(t)] = rec;
    });
    r.aggregates = aggregate(r.records);
    index_plot(r);

    r.theory["m"] = static_cast<double>(m);
    r.theory["hashing_m"] = static_cast<double>(m_hash);
    r.theory["nu_x"] = nu_x;
    r.theory["target_probability"] = target;
    r.theory["guarantee_applies"] = guarantee ? 1.0 : 0.0;
    r.theory["window_lo"] = window_lo;
    r.theory["window_hi"] = window_hi;
    if (guarantee)
        r.checks.push_back(rate_check("success_rate", *r.aggregates.success_rate, *r.aggregates.success_se, target));
    return r;
}

namespace {

enum class CoverageEvent { interval, nu };

ExperimentReport run_coverage(const ExperimentConfig& cfg, CoverageEvent event) {
    require_trials(cfg);
    const double sigma = require_noise(cfg);
    const auto q = tail_with_sigma(cfg, sigma);
    const Vector x = cfg.signal.build();
    const Index n = x.size();
    const double nx = norm2_sq(x);
    const double nu_x = nu(x);
    const auto interval = bounds::noisy_norm_interval(nx, n, q);
    const double nu_limit = bounds::noisy_nu_bound(nu_x, n, q);
    const auto tails = bounds::tail_bounds(n, q);

    auto r = start(cfg);
    r.records.resize(static_cast<std::size_t>(cfg.trials));
    detail::parallel_for(cfg.trials, threads_of(cfg), [&](std::int64_t t) {
        const auto stats = corrupt_streaming(x, {sigma, noise_seed(trial_seed(cfg.master_seed, t))}, 1);
        const bool hit = event == CoverageEvent::interval ? interval.contains(stats.norm2_sq_noisy)
                                                          : stats.nu_noisy <= nu_limit;
        r.records[static_cast<std::size_t>(t)] = {t, recover_norm_sq(stats.norm2_sq_noisy, sigma, n) / nx,
                                                  stats.norm2_sq_noisy, stats.nu_noisy, hit};
    });
    r.aggregates = aggregate(r.records);
    for (const auto& rec : r.records)
        r.plot.emplace_back(static_cast<double>(rec.trial),
                            event == CoverageEvent::interval ? *rec.noisy_norm_sq : *rec.nu_noisy);

    const double failure = event == CoverageEvent::interval ? bounds::interval_failure(n, q) : tails.combined;
    r.theory["interval_lo"] = interval.lo;
    r.theory["interval_hi"] = interval.hi;
    r.theory["nu_bound"] = nu_limit;
    r.theory["tail_max_gauss"] = tails.max_gauss;
    r.theory["tail_chi_sq"] = tails.chi_sq;
    r.theory["tail_combined"] = tails.combined;
    r.theory["target_probability"] = 1.0 - failure;
    r.checks.push_back(
        rate_check("coverage", *r.aggregates.success_rate, *r.aggregates.success_se, 1.0 - failure));
    return r;
}

}  // namespace

ExperimentReport run_interval_coverage(const ExperimentConfig& cfg) {
    return run_coverage(cfg, CoverageEvent::interval);
}

ExperimentReport run_nu_coverage(const ExperimentConfig& cfg) {
    return run_coverage(cfg, CoverageEvent::nu);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.name) {
        case ExperimentName::fig1: return run_fig1(cfg);
        case ExperimentName::fig2: return run_fig2(cfg);
        case ExperimentName::appendix_nu: return run_appendix_nu(cfg);
        case ExperimentName::oblivious_rate: return run_oblivious_rate(cfg);
        case ExperimentName::interval_coverage: return run_interval_coverage(cfg);
        case ExperimentName::nu_coverage: return run_nu_coverage(cfg);
    }
    throw ConfigMismatch("unknown experiment");
}

// ---------------------------------------------------------------------------
// Output formats

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << kTrialsCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.trial << ',' << r.distortion << ',';
        if (r.noisy_norm_sq) out << *r.noisy_norm_sq;
        out << ',';
        if (r.nu_noisy) out << *r.nu_noisy;
        out << ',';
        if (r.in_interval) out << (*r.in_interval ? 1 : 0);
        out << '\n';
    }
    out.precision(old);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double csv_double(std::string_view s) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("trials csv: bad number '" + std::string(s) + "'");
    return x;
}

}  // namespace

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTrialsCsvHeader) throw IoError("trials csv: missing header");
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 5) throw IoError("trials csv: expected 5 fields");
        TrialRecord r;
        r.trial = static_cast<Index>(csv_double(f[0]));
        r.distortion = csv_double(f[1]);
        if (!f[2].empty()) r.noisy_norm_sq = csv_double(f[2]);
        if (!f[3].empty()) r.nu_noisy = csv_double(f[3]);
        if (!f[4].empty()) r.in_interval = f[4] == "1";
        records.push_back(r);
    }
    return records;
}

void write_plot_data(std::ostream& out, const std::vector<std::pair<double, double>>& plot) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "x,y\n";
    for (const auto& [x, y] : plot) out << x << ',' << y << '\n';
    out.precision(old);
}

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["name"] = to_string(c.name);
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["signal"] = {{"kind", to_string(c.signal.kind)}, {"n", c.signal.n}, {"k", c.signal.k}};
    j["sigma"] = c.noise_sigma ? nlohmann::ordered_json(*c.noise_sigma) : nlohmann::ordered_json(nullptr);
    if (c.op) {
        j["operator"] = {{"kind", to_string(c.op->kind.family)}, {"s", c.op->kind.s}, {"m", c.op->m}};
    } else {
        j["operator"] = nullptr;
    }
    j["embedding"] = {{"eps_s", c.embedding.eps_s}, {"delta_s", c.embedding.delta_s},
                      {"E", c.embedding.E}, {"C2", c.embedding.C2}};
    j["tail"] = {{"eps", c.tail.eps}, {"t", c.tail.t}, {"C1", c.tail.C1}, {"sigma", c.tail.sigma}};
    j["normalization"] = to_string(c.normalization);
    j["grid"] = {{"min", c.grid_min}, {"max", c.grid_max}, {"points", c.grid_points}, {"full", c.full}};
    return j;
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["config"] = config_json(report.config);
    if (!report.operator_descriptor.empty()) j["operator_descriptor"] = report.operator_descriptor;
    const auto& a = report.aggregates;
    nlohmann::ordered_json agg = {{"count", a.count}, {"mean", a.mean}, {"std", a.std},
                                  {"min", a.min},     {"max", a.max},   {"zero_fraction", a.zero_fraction}};
    if (a.success_rate) agg["success_rate"] = *a.success_rate;
    if (a.success_se) agg["success_se"] = *a.success_se;
    if (a.slope) agg["slope"] = *a.slope;
    j["aggregates"] = agg;
    nlohmann::ordered_json theory = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.theory) theory[k] = v;
    j["theory"] = theory;
    if (!report.grid.empty()) j["grid"] = report.grid;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    j["passed"] = report.passed();
    return j.dump(2) + "\n";
}

std::string summary_line(const ExperimentReport& report) {
    const auto& a = report.aggregates;
    std::ostringstream os;
    os << std::setprecision(6) << "name=" << to_string(report.config.name) << " trials=" << a.count
       << " mean=" << a.mean << " std=" << a.std << " min=" << a.min << " max=" << a.max
       << " zero_fraction=" << a.zero_fraction;
    if (a.success_rate) os << " success_rate=" << *a.success_rate << " se=" << *a.success_se;
    if (a.slope) os << " slope=" << *a.slope;
    os << " checks=" << (report.passed() ? "pass" : "FAIL");
    return os.str();
}

OutputPaths write_outputs(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem(to_string(report.config.name));
    OutputPaths paths{dir / (stem + "_trials.csv"), dir / (stem + "_report.json"), dir / (stem + "_plot.csv")};
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot open " + p.string() + " for writing");
        return out;
    };
    {
        auto out = open(paths.trials_csv);
        write_trials_csv(out, report.records);
        if (!out) throw IoError("write failed for " + paths.trials_csv.string());
    }
    {
        auto out = open(paths.report_json);
        out << report_json(report);
        if (!out) throw IoError("write failed for " + paths.report_json.string());
    }
    {
        auto out = open(paths.plot_data);
        write_plot_data(out, report.plot);
        if (!out) throw IoError("write failed for " + paths.plot_data.string());
    }
    return paths;
}

}  // namespace noisysketch::experiments
