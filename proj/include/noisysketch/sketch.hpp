#pragma once

#include "noisysketch/vector.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace noisysketch {

enum class SketchFamily { gaussian, hashing, sampling };

/// Operator family plus the per-column sparsity s for hashing.
struct SketchKind {
    SketchFamily family = SketchFamily::gaussian;
    Index s = 1;

    static constexpr SketchKind gaussian() noexcept { return {SketchFamily::gaussian, 0}; }
    static constexpr SketchKind hashing(Index s = 1) noexcept { return {SketchFamily::hashing, s}; }
    static constexpr SketchKind sampling() noexcept { return {SketchFamily::sampling, 0}; }

    friend bool operator==(const SketchKind&, const SketchKind&) = default;
};

std::string_view to_string(SketchFamily family) noexcept;
/// Accepts "gaussian", "hashing" and "sampling". Throws BadDimensions otherwise.
SketchFamily parse_family(std::string_view name);

/// A seeded random embedding S ∈ ℝ^{m×n}, realized lazily from counter-based
/// randomness so that (kind, m, n, seed) fixes every entry:
///
///  - gaussian: S_ij ~ N(0, 1/m); column j is drawn from its own stream, one
///    word per row. O(1) storage.
///  - hashing(s): column j picks s distinct rows by a partial Fisher-Yates
///    shuffle of [0, m) and gives each an independent sign; entries ±1/√s.
///    Columns are regenerated on demand, O(1) storage.
///  - sampling: row i selects one source column uniformly with replacement;
///    the entry is √(n/m). The m source columns are stored.
class SketchOperator {
  public:
    SketchKind kind() const noexcept { return kind_; }
    Index rows() const noexcept { return m_; }
    Index cols() const noexcept { return n_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Source column of each row (sampling only, empty otherwise).
    const std::vector<Index>& sources() const noexcept { return sources_; }

    /// Row/value pairs of column j (hashing only).
    struct Placement {
        Index row;
        double value;
    };
    std::vector<Placement> hashing_column(Index j) const;

    /// Entry scale: 1/√m (gaussian), 1/√s (hashing), √(n/m) (sampling).
    double scale() const noexcept { return scale_; }

    friend SketchOperator make_operator(SketchKind kind, Index m, Index n, std::uint64_t seed);

  private:
    SketchOperator() = default;

    SketchKind kind_;
    Index m_ = 0;
    Index n_ = 0;
    std::uint64_t seed_ = 0;
    double scale_ = 1.0;
    std::vector<Index> sources_;
};

/// Throws BadDimensions when m < 1, n < 1, m > n for hashing or sampling, or
/// s outside [1, m] for hashing.
SketchOperator make_operator(SketchKind kind, Index m, Index n, std::uint64_t seed);

/// S·v as a dense vector of length m. Throws DimensionMismatch if v.size() != n.
/// Sparse v costs O(nnz·s) for hashing, O(m log nnz) for sampling and
/// O(nnz·m) for gaussian.
Vector apply(const SketchOperator& S, const Vector& v);

inline constexpr Index kDefaultMaterializeCap = 1'000'000;

/// Explicit matrix with the same randomness as apply. Throws TooLarge when
/// m·n exceeds cap.
Eigen::MatrixXd materialize(const SketchOperator& S, Index cap = kDefaultMaterializeCap);

/// ‖Sv‖₂² / ‖v‖₂². Throws ZeroVector for v = 0.
double embedding_distortion(const SketchOperator& S, const Vector& v);

// Operator descriptor "kind,s,m,n,seed"; s is empty for non-hashing kinds.
std::string to_descriptor(const SketchOperator& S);
SketchOperator parse_descriptor(std::string_view line);

}  // namespace noisysketch
