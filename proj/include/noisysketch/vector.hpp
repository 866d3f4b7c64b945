#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

namespace noisysketch {

using Index = Eigen::Index;

/// Parallel index/value lists; indices strictly increasing, values nonzero.
struct SparseEntries {
    std::vector<Index> indices;
    std::vector<double> values;
};

/// A vector in ℝⁿ held either densely or as sorted sparse entries.
///
/// Every reduction walks the nonzero entries in ascending index order, so the
/// dense and sparse forms of the same vector give bit-identical results.
/// Immutable after construction.
class Vector {
  public:
    /// Zero vector of dimension n, stored sparse.
    explicit Vector(Index n = 0);

    static Vector dense(Eigen::VectorXd values);
    /// Throws BadVector on unsorted, duplicate, out-of-range or zero entries.
    static Vector sparse(Index n, std::vector<Index> indices, std::vector<double> values);

    static Vector one_hot(Index n, Index position = 0);
    /// k nonzeros of equal magnitude 1 at positions 0..k-1.
    static Vector equal_sparse(Index n, Index k);
    static Vector ones(Index n);

    Index size() const noexcept { return n_; }
    bool is_sparse() const noexcept { return std::holds_alternative<SparseEntries>(storage_); }
    Index nnz() const noexcept;

    double operator[](Index i) const;

    const Eigen::VectorXd& dense_values() const;
    const SparseEntries& sparse_entries() const;

    Eigen::VectorXd to_dense() const;
    Vector as_dense() const;
    Vector as_sparse() const;

    /// Calls f(index, value) for each nonzero in ascending index order.
    template <class F>
    void for_each_nonzero(F&& f) const {
        if (const auto* d = std::get_if<Eigen::VectorXd>(&storage_)) {
            for (Index i = 0; i < d->size(); ++i)
                if ((*d)[i] != 0.0) f(i, (*d)[i]);
        } else {
            const auto& s = std::get<SparseEntries>(storage_);
            for (std::size_t k = 0; k < s.indices.size(); ++k) f(s.indices[k], s.values[k]);
        }
    }

    friend bool operator==(const Vector& a, const Vector& b);

  private:
    Index n_ = 0;
    std::variant<Eigen::VectorXd, SparseEntries> storage_;
};

Vector operator*(double c, const Vector& v);

double norm2_sq(const Vector& v);
double norm2(const Vector& v);
double norm_inf(const Vector& v);

/// Non-uniformity ‖v‖∞ / ‖v‖₂, in [1/√n, 1]. Throws ZeroVector for v = 0.
double nu(const Vector& v);

// Vector files. Dense: one value per line. Sparse: a header line "n=<dim>"
// followed by "index,value" lines. Blank lines and lines starting with '#' are
// ignored. Values are written with 17 significant digits.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);
void write_vector(std::ostream& out, const Vector& v);
void write_vector(const std::filesystem::path& path, const Vector& v);

}  // namespace noisysketch
