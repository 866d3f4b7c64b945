#include "noisysketch/sketch.hpp"

#include "noisysketch/errors.hpp"
#include "noisysketch/random.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

namespace noisysketch {

std::string_view to_string(SketchFamily family) noexcept {
    switch (family) {
        case SketchFamily::gaussian: return "gaussian";
        case SketchFamily::hashing: return "hashing";
        case SketchFamily::sampling: return "sampling";
    }
    return "unknown";
}

SketchFamily parse_family(std::string_view name) {
    if (name == "gaussian") return SketchFamily::gaussian;
    if (name == "hashing") return SketchFamily::hashing;
    if (name == "sampling") return SketchFamily::sampling;
    throw BadDimensions("unknown sketch kind '" + std::string(name) + "'");
}

SketchOperator make_operator(SketchKind kind, Index m, Index n, std::uint64_t seed) {
    if (m < 1 || n < 1)
        throw BadDimensions("sketch dimensions must be positive (m=" + std::to_string(m) +
                            ", n=" + std::to_string(n) + ")");
    if (kind.family != SketchFamily::gaussian && m > n)
        throw BadDimensions("hashing and sampling operators need m <= n (m=" + std::to_string(m) +
                            ", n=" + std::to_string(n) + ")");
    if (kind.family == SketchFamily::hashing && (kind.s < 1 || kind.s > m))
        throw BadDimensions("s-hashing draws s distinct rows per column without replacement, so "
                            "it needs 1 <= s <= m (s=" + std::to_string(kind.s) +
                            ", m=" + std::to_string(m) + ")");

    SketchOperator S;
    S.kind_ = kind;
    S.m_ = m;
    S.n_ = n;
    S.seed_ = seed;
    switch (kind.family) {
        case SketchFamily::gaussian:
            S.kind_.s = 0;
            S.scale_ = 1.0 / std::sqrt(static_cast<double>(m));
            break;
        case SketchFamily::hashing:
            S.scale_ = 1.0 / std::sqrt(static_cast<double>(kind.s));
            break;
        case SketchFamily::sampling: {
            S.kind_.s = 0;
            S.scale_ = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
            S.sources_.resize(static_cast<std::size_t>(m));
            for (Index i = 0; i < m; ++i) {
                random::WordStream ws(random::stream_key(seed, random::Domain::sampling_row,
                                                         static_cast<std::uint64_t>(i)));
                S.sources_[static_cast<std::size_t>(i)] =
                    static_cast<Index>(ws.below(static_cast<std::uint64_t>(n)));
            }
            break;
        }
    }
    return S;
}

std::vector<SketchOperator::Placement> SketchOperator::hashing_column(Index j) const {
    random::WordStream ws(
        random::stream_key(seed_, random::Domain::hashing_column, static_cast<std::uint64_t>(j)));
    // Partial Fisher-Yates over [0, m) recording only displaced slots.
    std::vector<std::pair<Index, Index>> displaced;
    auto slot = [&](Index pos) {
        for (const auto& [p, v] : displaced)
            if (p == pos) return v;
        return pos;
    };
    auto assign = [&](Index pos, Index value) {
        for (auto& [p, v] : displaced)
            if (p == pos) {
                v = value;
                return;
            }
        displaced.emplace_back(pos, value);
    };

    std::vector<Placement> out;
    out.reserve(static_cast<std::size_t>(kind_.s));
    for (Index k = 0; k < kind_.s; ++k) {
        const Index r = k + static_cast<Index>(ws.below(static_cast<std::uint64_t>(m_ - k)));
        const Index at_k = slot(k);
        const Index at_r = slot(r);
        assign(k, at_r);
        assign(r, at_k);
        const double sign = (ws.next() >> 63) != 0 ? -1.0 : 1.0;
        out.push_back({at_r, sign * scale_});
    }
    return out;
}

namespace {

double gaussian_entry(std::uint64_t column_key, Index row, double scale) {
    return random::standard_normal(random::word(column_key, static_cast<std::uint64_t>(row))) * scale;
}

}  // namespace

Vector apply(const SketchOperator& S, const Vector& v) {
    if (v.size() != S.cols())
        throw DimensionMismatch("operator expects length " + std::to_string(S.cols()) +
                                ", got " + std::to_string(v.size()));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(S.rows());
    switch (S.kind().family) {
        case SketchFamily::gaussian:
            v.for_each_nonzero([&](Index j, double x) {
                const auto key = random::stream_key(S.seed(), random::Domain::gaussian_column,
                                                    static_cast<std::uint64_t>(j));
                for (Index i = 0; i < S.rows(); ++i) out[i] += gaussian_entry(key, i, S.scale()) * x;
            });
            break;
        case SketchFamily::hashing:
            v.for_each_nonzero([&](Index j, double x) {
                for (const auto& p : S.hashing_column(j)) out[p.row] += p.value * x;
            });
            break;
        case SketchFamily::sampling:
            for (Index i = 0; i < S.rows(); ++i)
                out[i] = S.scale() * v[S.sources()[static_cast<std::size_t>(i)]];
            break;
    }
    return Vector::dense(std::move(out));
}

Eigen::MatrixXd materialize(const SketchOperator& S, Index cap) {
    if (S.rows() > cap / S.cols())
        throw TooLarge("materializing " + std::to_string(S.rows()) + "x" + std::to_string(S.cols()) +
                       " exceeds the cap of " + std::to_string(cap) + " entries");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(S.rows(), S.cols());
    switch (S.kind().family) {
        case SketchFamily::gaussian:
            for (Index j = 0; j < S.cols(); ++j) {
                const auto key = random::stream_key(S.seed(), random::Domain::gaussian_column,
                                                    static_cast<std::uint64_t>(j));
                for (Index i = 0; i < S.rows(); ++i) M(i, j) = gaussian_entry(key, i, S.scale());
            }
            break;
        case SketchFamily::hashing:
            for (Index j = 0; j < S.cols(); ++j)
                for (const auto& p : S.hashing_column(j)) M(p.row, j) = p.value;
            break;
        case SketchFamily::sampling:
            for (Index i = 0; i < S.rows(); ++i) M(i, S.sources()[static_cast<std::size_t>(i)]) = S.scale();
            break;
    }
    return M;
}

double embedding_distortion(const SketchOperator& S, const Vector& v) {
    const double denom = norm2_sq(v);
    if (denom == 0.0) throw ZeroVector("embedding_distortion: input vector is zero");
    return norm2_sq(apply(S, v)) / denom;
}

std::string to_descriptor(const SketchOperator& S) {
    std::ostringstream os;
    os << to_string(S.kind().family) << ',';
    if (S.kind().family == SketchFamily::hashing) os << S.kind().s;
    os << ',' << S.rows() << ',' << S.cols() << ',' << S.seed();
    return os.str();
}

namespace {

template <class T>
T parse_field(std::string_view s, const char* name) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw BadDimensions(std::string("operator descriptor: bad ") + name + " '" + std::string(s) + "'");
    return value;
}

}  // namespace

SketchOperator parse_descriptor(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (fields.size() != 5)
        throw BadDimensions("operator descriptor needs 5 fields 'kind,s,m,n,seed'");
    SketchKind kind{parse_family(fields[0]), 0};
    if (kind.family == SketchFamily::hashing) {
        kind.s = parse_field<Index>(fields[1], "s");
    } else if (!fields[1].empty()) {
        throw BadDimensions("operator descriptor: s must be empty for " + std::string(fields[0]));
    }
    return make_operator(kind, parse_field<Index>(fields[2], "m"), parse_field<Index>(fields[3], "n"),
                         parse_field<std::uint64_t>(fields[4], "seed"));
}

}  // namespace noisysketch
