#include "noisysketch/cli.hpp"

#include "noisysketch/bounds.hpp"
#include "noisysketch/errors.hpp"
#include "noisysketch/noise.hpp"
#include "noisysketch/sketch.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

namespace noisysketch::cli {

namespace ex = experiments;

std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string{};
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigMismatch("config line " + std::to_string(line_no) + ": expected key=value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

namespace {

template <class T>
T number(std::string_view key, std::string_view value) {
    T x{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigMismatch("setting " + std::string(key) + ": cannot parse '" + std::string(value) + "'");
    return x;
}

bool boolean(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ConfigMismatch("setting " + std::string(key) + ": expected true or false");
}

ex::OperatorSpec& op_of(ex::ExperimentConfig& cfg) {
    if (!cfg.op) cfg.op = ex::OperatorSpec{};
    return *cfg.op;
}

}  // namespace

void apply_setting(ex::ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "trials") cfg.trials = number<Index>(key, value);
    else if (key == "seed") cfg.master_seed = number<std::uint64_t>(key, value);
    else if (key == "signal") cfg.signal.kind = ex::parse_signal_kind(value);
    else if (key == "n") cfg.signal.n = number<Index>(key, value);
    else if (key == "k") cfg.signal.k = number<Index>(key, value);
    else if (key == "sigma") {
        if (value == "none") cfg.noise_sigma.reset();
        else cfg.noise_sigma = number<double>(key, value);
    } else if (key == "kind") {
        try {
            const auto family = parse_family(value);
            op_of(cfg).kind = {family, family == SketchFamily::hashing ? std::max<Index>(1, op_of(cfg).kind.s) : 0};
        } catch (const BadDimensions& e) {
            throw ConfigMismatch(e.what());
        }
    } else if (key == "s") op_of(cfg).kind.s = number<Index>(key, value);
    else if (key == "m") op_of(cfg).m = number<Index>(key, value);
    else if (key == "eps_s") cfg.embedding.eps_s = number<double>(key, value);
    else if (key == "delta_s") cfg.embedding.delta_s = number<double>(key, value);
    else if (key == "E") cfg.embedding.E = number<double>(key, value);
    else if (key == "C2") cfg.embedding.C2 = number<double>(key, value);
    else if (key == "eps") cfg.tail.eps = number<double>(key, value);
    else if (key == "t") cfg.tail.t = number<double>(key, value);
    else if (key == "C1") cfg.tail.C1 = number<double>(key, value);
    else if (key == "normalization") cfg.normalization = ex::parse_normalization(value);
    else if (key == "grid_min") cfg.grid_min = number<Index>(key, value);
    else if (key == "grid_max") cfg.grid_max = number<Index>(key, value);
    else if (key == "grid_points") cfg.grid_points = number<Index>(key, value);
    else if (key == "full") cfg.full = boolean(key, value);
    else throw ConfigMismatch("unknown setting '" + std::string(key) + "'");
}

namespace {

std::string with_precision(double x) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return os.str();
}

// Maps library errors onto exit codes; anything else propagates.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return dimension_error;
    } catch (const BadDimensions& e) {
        err << "error: " << e.what() << '\n';
        return dimension_error;
    } catch (const ZeroVector& e) {
        err << "error: " << e.what() << '\n';
        return dimension_error;
    } catch (const BadVector& e) {
        err << "error: " << e.what() << '\n';
        return dimension_error;
    } catch (const BadParams& e) {
        err << "error: " << e.what() << '\n';
        return bad_arguments;
    } catch (const ConfigMismatch& e) {
        err << "error: " << e.what() << '\n';
        return bad_arguments;
    }
}

struct SketchArgs {
    std::string kind;
    Index s = 1;
    Index m = 0;
    Index n = 0;
    std::uint64_t seed = 0;
    std::string in, out;
};

int cmd_sketch(const SketchArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Vector v = read_vector(std::filesystem::path(a.in));
        if (v.size() != a.n)
            throw DimensionMismatch("--n is " + std::to_string(a.n) + " but the vector has length " +
                                    std::to_string(v.size()));
        const auto family = parse_family(a.kind);
        const SketchKind kind{family, family == SketchFamily::hashing ? a.s : 0};
        const auto S = make_operator(kind, a.m, a.n, a.seed);
        const Vector y = apply(S, v);
        const double in_sq = norm2_sq(v);
        if (in_sq == 0.0) throw ZeroVector("input vector is zero; distortion is undefined");
        write_vector(std::filesystem::path(a.out), y);
        const double out_sq = norm2_sq(y);
        out << "norm_in,norm_out,distortion\n"
            << with_precision(std::sqrt(in_sq)) << ',' << with_precision(std::sqrt(out_sq)) << ','
            << with_precision(out_sq / in_sq) << '\n';
        return static_cast<int>(ok);
    });
}

struct CorruptArgs {
    double sigma = 0.1;
    std::uint64_t seed = 0;
    std::string in, out;
    bool streaming = false;
    unsigned threads = 1;
};

int cmd_corrupt(const CorruptArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Vector x = read_vector(std::filesystem::path(a.in));
        const NoiseModel nm{a.sigma, a.seed};
        validate(nm);
        NoisyStats stats;
        if (a.streaming) {
            if (!a.out.empty()) throw ConfigMismatch("--streaming does not materialize the noisy vector; drop --out");
            stats = corrupt_streaming(x, nm, a.threads);
        } else {
            const Vector noisy = corrupt(x, nm);
            if (!a.out.empty()) write_vector(std::filesystem::path(a.out), noisy);
            stats = noisy_stats(noisy);
        }
        out << kNoisyStatsCsvHeader << '\n' << to_csv_row(stats, nm) << '\n';
        return static_cast<int>(ok);
    });
}

int cmd_nu(const std::string& in, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Vector v = read_vector(std::filesystem::path(in));
        const double value = nu(v);
        out << "n,norm2sq,norminf,nu\n"
            << v.size() << ',' << with_precision(norm2_sq(v)) << ',' << with_precision(norm_inf(v)) << ','
            << with_precision(value) << '\n';
        return static_cast<int>(ok);
    });
}

struct BoundsArgs {
    bounds::EmbeddingParams p;
    bounds::NoiseTailParams q;
    Index n = 1000;
    double nu_x = 1.0;
    double norm2_sq_x = 1.0;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        bounds::validate(a.p);
        bounds::validate(a.q);
        const auto interval = bounds::noisy_norm_interval(a.norm2_sq_x, a.n, a.q);
        const auto tails = bounds::tail_bounds(a.n, a.q);
        nlohmann::ordered_json j;
        j["params"] = {{"eps_s", a.p.eps_s}, {"delta_s", a.p.delta_s}, {"E", a.p.E},   {"C2", a.p.C2},
                       {"eps", a.q.eps},     {"t", a.q.t},             {"C1", a.q.C1}, {"sigma", a.q.sigma},
                       {"n", a.n},           {"nu_x", a.nu_x},         {"norm2sq_x", a.norm2_sq_x}};
        j["nu_bar"] = bounds::nu_bar(a.p);
        j["n0_solved"] = bounds::solve_n0(a.nu_x, a.p, a.q);
        j["hashing_m"] = bounds::hashing_m(a.p);
        j["sampling_m"] = bounds::sampling_m(a.nu_x, a.n, a.p, a.q);
        j["interval"] = {{"lo", interval.lo}, {"hi", interval.hi}};
        j["tails"] = {{"max_gauss", tails.max_gauss}, {"chi_sq", tails.chi_sq}, {"combined", tails.combined}};
        j["noisy_nu_bound"] = bounds::noisy_nu_bound(a.nu_x, a.n, a.q);
        out << j.dump(2) << '\n';
        return static_cast<int>(ok);
    });
}

// Experiment flags that map one-to-one onto config-file keys.
const std::vector<std::pair<std::string, std::string>> kExperimentFlags = {
    {"--trials", "trials"},   {"--seed", "seed"},
    {"--signal", "signal"},   {"--n", "n"},
    {"--k", "k"},             {"--sigma", "sigma"},
    {"--kind", "kind"},       {"--s", "s"},
    {"--m", "m"},             {"--eps-s", "eps_s"},
    {"--delta-s", "delta_s"}, {"--E", "E"},
    {"--C2", "C2"},           {"--eps", "eps"},
    {"--t", "t"},             {"--C1", "C1"},
    {"--normalization", "normalization"}, {"--grid-min", "grid_min"},
    {"--grid-max", "grid_max"},           {"--grid-points", "grid_points"},
};

struct ExperimentArgs {
    std::string name;
    std::string config;
    std::string out_dir = ".";
    bool check = false;
    bool full = false;
    unsigned threads = 0;
    std::map<std::string, std::string> overrides;  // config key -> value, explicit flags only
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto cfg = ex::default_config(ex::parse_experiment_name(a.name));
        if (!a.config.empty()) {
            std::ifstream in(a.config);
            if (!in) throw IoError("cannot open config " + a.config);
            for (const auto& [k, v] : parse_settings(in)) apply_setting(cfg, k, v);
        }
        for (const auto& [k, v] : a.overrides) apply_setting(cfg, k, v);
        if (a.full) cfg.full = true;
        cfg.threads = a.threads;

        ex::ExperimentReport report;
        try {
            report = ex::run_experiment(cfg);
        } catch (const BadDimensions& e) {
            throw ConfigMismatch(e.what());
        } catch (const BadVector& e) {
            throw ConfigMismatch(e.what());
        }
        ex::write_outputs(report, a.out_dir);
        out << ex::summary_line(report) << '\n';
        if (a.check && !report.passed()) {
            for (const auto& c : report.checks)
                if (!c.passed) err << "check failed: " << c.name << ": " << c.detail << '\n';
            return static_cast<int>(check_failed);
        }
        return static_cast<int>(ok);
    });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Seeded sketching operators, noisy-input bounds and Monte Carlo experiments", "noisysketch"};
    app.require_subcommand(1, 1);

    SketchArgs sk;
    auto* sketch = app.add_subcommand("sketch", "Apply a sketch operator to a vector file");
    sketch->add_option("--kind", sk.kind, "gaussian | hashing | sampling")
        ->required()
        ->check(CLI::IsMember({"gaussian", "hashing", "sampling"}));
    sketch->add_option("--s", sk.s, "Nonzeros per column for hashing")->capture_default_str();
    sketch->add_option("--m", sk.m, "Output dimension")->required();
    sketch->add_option("--n", sk.n, "Input dimension")->required();
    sketch->add_option("--seed", sk.seed, "Operator seed")->capture_default_str();
    sketch->add_option("--in", sk.in, "Input vector file")->required();
    sketch->add_option("--out", sk.out, "Output vector file")->required();

    CorruptArgs co;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Add Gaussian noise sigma*|x|*r and report its statistics");
    corrupt_cmd->add_option("--sigma", co.sigma, "Noise scale")->required();
    corrupt_cmd->add_option("--seed", co.seed, "Noise seed")->capture_default_str();
    corrupt_cmd->add_option("--in", co.in, "Input vector file")->required();
    corrupt_cmd->add_option("--out", co.out, "Write the noisy vector here");
    corrupt_cmd->add_flag("--streaming", co.streaming, "Single pass without materializing the noisy vector");
    corrupt_cmd->add_option("--threads", co.threads, "Workers for --streaming")->capture_default_str();

    std::string nu_in;
    auto* nu_cmd = app.add_subcommand("nu", "Norms and non-uniformity of a vector file");
    nu_cmd->add_option("--in", nu_in, "Input vector file")->required();

    BoundsArgs bd;
    auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate every bound for one parameter set, as JSON");
    bounds_cmd->add_option("--eps-s", bd.p.eps_s, "Sketch distortion")->capture_default_str();
    bounds_cmd->add_option("--delta-s", bd.p.delta_s, "Sketch failure probability")->capture_default_str();
    bounds_cmd->add_option("--E", bd.p.E, "Hashing dimension constant")->capture_default_str();
    bounds_cmd->add_option("--C2", bd.p.C2, "Non-uniformity constant")->capture_default_str();
    bounds_cmd->add_option("--eps", bd.q.eps, "Noise norm concentration slack")->capture_default_str();
    bounds_cmd->add_option("--t", bd.q.t, "Gaussian tail level")->capture_default_str();
    bounds_cmd->add_option("--C1", bd.q.C1, "Max-Gaussian constant")->capture_default_str();
    bounds_cmd->add_option("--sigma", bd.q.sigma, "Noise scale")->capture_default_str();
    bounds_cmd->add_option("--n", bd.n, "Dimension")->capture_default_str();
    bounds_cmd->add_option("--nu-x", bd.nu_x, "Non-uniformity of the clean signal")->capture_default_str();
    bounds_cmd->add_option("--norm2sq-x", bd.norm2_sq_x, "Squared norm of the clean signal")->capture_default_str();

    ExperimentArgs xa;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo experiment and write CSV/JSON outputs");
    exp_cmd->add_option("--name", xa.name, "Experiment")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "appendix_nu", "oblivious_rate", "interval_coverage", "nu_coverage"}));
    exp_cmd->add_option("--config", xa.config, "Flat key=value config file; flags override it");
    exp_cmd->add_option("--out-dir", xa.out_dir, "Output directory")->capture_default_str();
    exp_cmd->add_flag("--check", xa.check, "Exit 5 when an embedded acceptance check fails");
    exp_cmd->add_flag("--full", xa.full, "Appendix grid up to 1e8");
    exp_cmd->add_option("--threads", xa.threads, "Worker cap, 0 = all cores; results do not depend on it");
    std::map<std::string, std::string> raw;
    for (const auto& [flag, key] : kExperimentFlags) exp_cmd->add_option(flag, raw[key], "Overrides '" + key + "'");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? static_cast<int>(ok) : static_cast<int>(bad_arguments);
    }

    if (*sketch) return cmd_sketch(sk, out, err);
    if (*corrupt_cmd) return cmd_corrupt(co, out, err);
    if (*nu_cmd) return cmd_nu(nu_in, out, err);
    if (*bounds_cmd) return cmd_bounds(bd, out, err);
    for (const auto& [flag, key] : kExperimentFlags)
        if (exp_cmd->count(flag) > 0) xa.overrides[key] = raw[key];
    return cmd_experiment(xa, out, err);
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace noisysketch::cli
