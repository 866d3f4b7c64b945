#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

namespace noisysketch::detail {

/// Entries are reduced in fixed index blocks of this size. Each block is
/// Kahan-summed on its own, then block totals are Kahan-summed in block order.
inline constexpr std::int64_t kChunkBits = 16;
inline constexpr std::int64_t kChunkSize = std::int64_t{1} << kChunkBits;

struct KahanSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) noexcept {
        const double y = x - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
};

/// Reduction of one block. `touched` is false when the block held no nonzeros.
struct ChunkPartial {
    KahanSum squares;
    double max_abs = 0.0;
    bool touched = false;

    void add(double v) noexcept {
        if (v == 0.0) return;
        squares.add(v * v);
        max_abs = std::max(max_abs, std::fabs(v));
        touched = true;
    }
};

struct NormTotals {
    double norm2_sq = 0.0;
    double norm_inf = 0.0;
};

inline NormTotals combine(std::span<const ChunkPartial> partials) noexcept {
    KahanSum outer;
    double max_abs = 0.0;
    for (const auto& p : partials) {
        if (!p.touched) continue;
        outer.add(p.squares.sum);
        max_abs = std::max(max_abs, p.max_abs);
    }
    return {outer.sum, max_abs};
}

/// Sequential form of the blocked reduction. Feed (index, value) pairs with
/// strictly increasing indices; zeros are skipped.
class NormAccumulator {
  public:
    void add(std::int64_t index, double value) noexcept {
        if (value == 0.0) return;
        const std::int64_t chunk = index >> kChunkBits;
        if (chunk != chunk_) flush();
        chunk_ = chunk;
        current_.add(value);
    }

    NormTotals totals() const noexcept {
        KahanSum outer = outer_;
        double max_abs = max_abs_;
        if (current_.touched) {
            outer.add(current_.squares.sum);
            max_abs = std::max(max_abs, current_.max_abs);
        }
        return {outer.sum, max_abs};
    }

  private:
    void flush() noexcept {
        if (current_.touched) {
            outer_.add(current_.squares.sum);
            max_abs_ = std::max(max_abs_, current_.max_abs);
        }
        current_ = {};
    }

    KahanSum outer_;
    double max_abs_ = 0.0;
    ChunkPartial current_;
    std::int64_t chunk_ = -1;
};

}  // namespace noisysketch::detail
