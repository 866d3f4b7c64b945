#include "noisysketch/noise.hpp"

#include "noisysketch/detail/parallel.hpp"
#include "noisysketch/detail/summation.hpp"
#include "noisysketch/errors.hpp"
#include "noisysketch/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace noisysketch {

void validate(const NoiseModel& nm) {
    if (!(nm.sigma > 0.0) || !std::isfinite(nm.sigma))
        throw BadParams("noise scale sigma must be positive and finite");
}

namespace {

std::uint64_t noise_key(std::uint64_t seed) {
    return random::stream_key(seed, random::Domain::noise, 0);
}

double noise_at(std::uint64_t key, Index i) {
    return random::standard_normal(random::word(key, static_cast<std::uint64_t>(i)));
}

NoisyStats finish(Index n, const detail::NormTotals& t) {
    if (t.norm2_sq == 0.0) throw ZeroVector("noisy vector is zero");
    return {n, t.norm2_sq, t.norm_inf, t.norm_inf / std::sqrt(t.norm2_sq)};
}

// Fills buf with x[begin, begin + buf.size()).
using ChunkFiller = std::function<void(Index begin, std::vector<double>& buf)>;

NoisyStats stream_blocks(Index n, const ChunkFiller& fill, double norm2_sq_x, const NoiseModel& nm,
                         unsigned threads) {
    validate(nm);
    if (!(norm2_sq_x > 0.0)) throw ZeroVector("corrupt: signal is zero");
    const double amplitude = nm.sigma * std::sqrt(norm2_sq_x);
    const auto key = noise_key(nm.seed);
    const Index chunks = (n + detail::kChunkSize - 1) / detail::kChunkSize;
    std::vector<detail::ChunkPartial> partials(static_cast<std::size_t>(chunks));
    detail::parallel_for(chunks, threads == 0 ? detail::default_threads() : threads, [&](std::int64_t c) {
        thread_local std::vector<double> buf;
        const Index begin = c * detail::kChunkSize;
        const Index end = std::min(n, begin + detail::kChunkSize);
        buf.assign(static_cast<std::size_t>(end - begin), 0.0);
        fill(begin, buf);
        auto& part = partials[static_cast<std::size_t>(c)];
        for (Index i = begin; i < end; ++i)
            part.add(buf[static_cast<std::size_t>(i - begin)] + amplitude * noise_at(key, i));
    });
    return finish(n, detail::combine(partials));
}

}  // namespace

double noise_entry(std::uint64_t seed, Index i) {
    return noise_at(noise_key(seed), i);
}

Vector corrupt(const Vector& x, const NoiseModel& nm) {
    validate(nm);
    const double nx = norm2_sq(x);
    if (nx == 0.0) throw ZeroVector("corrupt: signal is zero");
    const double amplitude = nm.sigma * std::sqrt(nx);
    const auto key = noise_key(nm.seed);
    Eigen::VectorXd out = x.to_dense();
    for (Index i = 0; i < out.size(); ++i) out[i] = out[i] + amplitude * noise_at(key, i);
    return Vector::dense(std::move(out));
}

NoisyStats noisy_stats(const Vector& noisy) {
    detail::NormAccumulator acc;
    noisy.for_each_nonzero([&](Index i, double v) { acc.add(i, v); });
    return finish(noisy.size(), acc.totals());
}

NoisyStats corrupt_streaming(const Vector& x, const NoiseModel& nm, unsigned threads) {
    ChunkFiller fill;
    if (x.is_sparse()) {
        const auto& s = x.sparse_entries();
        fill = [&s](Index begin, std::vector<double>& buf) {
            const Index end = begin + static_cast<Index>(buf.size());
            auto it = std::lower_bound(s.indices.begin(), s.indices.end(), begin);
            for (; it != s.indices.end() && *it < end; ++it)
                buf[static_cast<std::size_t>(*it - begin)] =
                    s.values[static_cast<std::size_t>(it - s.indices.begin())];
        };
    } else {
        const auto& d = x.dense_values();
        fill = [&d](Index begin, std::vector<double>& buf) {
            for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = d[begin + static_cast<Index>(k)];
        };
    }
    return stream_blocks(x.size(), fill, norm2_sq(x), nm, threads);
}

NoisyStats corrupt_streaming(Index n, const std::function<double(Index)>& entry, double norm2_sq_x,
                             const NoiseModel& nm, unsigned threads) {
    const ChunkFiller fill = [&entry](Index begin, std::vector<double>& buf) {
        for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = entry(begin + static_cast<Index>(k));
    };
    return stream_blocks(n, fill, norm2_sq_x, nm, threads);
}

double recover_norm_sq(double norm2_sq_noisy, double sigma, Index n) {
    return norm2_sq_noisy / (1.0 + sigma * sigma * static_cast<double>(n));
}

std::string to_csv_row(const NoisyStats& stats, const NoiseModel& nm) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << stats.n << ',' << nm.sigma
       << ',' << nm.seed << ',' << stats.norm2_sq_noisy << ',' << stats.norm_inf_noisy << ','
       << stats.nu_noisy;
    return os.str();
}

}  // namespace noisysketch
