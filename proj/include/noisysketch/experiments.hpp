#pragma once

#include "noisysketch/bounds.hpp"
#include "noisysketch/sketch.hpp"
#include "noisysketch/vector.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace noisysketch::experiments {

enum class ExperimentName { fig1, fig2, appendix_nu, oblivious_rate, interval_coverage, nu_coverage };
enum class Normalization { sigma2n, one_plus_sigma2n };
enum class SignalKind { one_hot, equal_sparse, ones };

std::string_view to_string(ExperimentName name) noexcept;
std::string_view to_string(Normalization norm) noexcept;
std::string_view to_string(SignalKind kind) noexcept;
// These throw ConfigMismatch on unknown names.
ExperimentName parse_experiment_name(std::string_view s);
Normalization parse_normalization(std::string_view s);
SignalKind parse_signal_kind(std::string_view s);

struct SignalSpec {
    SignalKind kind = SignalKind::equal_sparse;
    Index n = 1000;
    Index k = 3;  ///< support size for equal_sparse

    Vector build() const;
};

struct OperatorSpec {
    SketchKind kind = SketchKind::sampling();
    Index m = 0;  ///< 0 derives m from the bounds module
};

struct ExperimentConfig {
    ExperimentName name = ExperimentName::fig1;
    Index trials = 100;
    std::uint64_t master_seed = 0;
    SignalSpec signal;
    std::optional<double> noise_sigma;  ///< noise seeds are derived per trial
    std::optional<OperatorSpec> op;
    bounds::EmbeddingParams embedding;
    bounds::NoiseTailParams tail;  ///< tail.sigma is overwritten by noise_sigma
    Normalization normalization = Normalization::sigma2n;
    Index grid_min = 10'000;
    Index grid_max = 10'000'000;
    Index grid_points = 20;
    bool full = false;     ///< appendix grid up to 10⁸
    unsigned threads = 0;  ///< 0 = machine parallelism; never changes results
};

/// Defaults for each experiment: signal, operator, noise and trial count.
ExperimentConfig default_config(ExperimentName name);

/// Per-trial seed: stream_key(master_seed, trial domain, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, Index trial);
/// Independent operator and noise seeds derived from one trial seed.
std::uint64_t operator_seed(std::uint64_t trial_seed);
std::uint64_t noise_seed(std::uint64_t trial_seed);

struct TrialRecord {
    Index trial = 0;
    double distortion = 0.0;
    std::optional<double> noisy_norm_sq;
    std::optional<double> nu_noisy;
    std::optional<bool> in_interval;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct Aggregates {
    Index count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation (n − 1)
    double min = 0.0;
    double max = 0.0;
    double zero_fraction = 0.0;
    std::optional<double> success_rate;  ///< over records with in_interval set
    std::optional<double> success_se;    ///< binomial standard error of success_rate
    std::optional<double> slope;         ///< appendix log-log regression

    friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

/// Aggregates from records alone. With a grid (one n per record) the
/// log ν(x̃) against log √(log n / n) least-squares slope is included.
Aggregates aggregate(const std::vector<TrialRecord>& records, const std::vector<Index>& grid = {});

/// Ordinary least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Binomial standard error √(p(1−p)/n).
double binomial_se(double p, Index n);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    Aggregates aggregates;
    std::map<std::string, double> theory;  ///< comparators from the bounds module
    std::vector<Check> checks;
    std::vector<Index> grid;  ///< appendix only
    std::vector<std::pair<double, double>> plot;
    std::string operator_descriptor;  ///< operator of trial 0, when one is used

    bool passed() const;
};

ExperimentReport run_fig1(const ExperimentConfig& cfg);
ExperimentReport run_fig2(const ExperimentConfig& cfg);
ExperimentReport run_appendix_nu(const ExperimentConfig& cfg);
ExperimentReport run_oblivious_rate(const ExperimentConfig& cfg);
ExperimentReport run_interval_coverage(const ExperimentConfig& cfg);
ExperimentReport run_nu_coverage(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Appendix grid: grid_points log-spaced integers in [grid_min, grid_max].
std::vector<Index> log_grid(Index lo, Index hi, Index points);

// Output formats.
inline constexpr const char* kTrialsCsvHeader = "trial,distortion,noisy_norm_sq,nu_noisy,in_interval";
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& in);
void write_plot_data(std::ostream& out, const std::vector<std::pair<double, double>>& plot);
std::string report_json(const ExperimentReport& report);
std::string summary_line(const ExperimentReport& report);

struct OutputPaths {
    std::filesystem::path trials_csv;
    std::filesystem::path report_json;
    std::filesystem::path plot_data;
};
/// Writes <name>_trials.csv, <name>_report.json and <name>_plot.csv into dir.
OutputPaths write_outputs(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace noisysketch::experiments
