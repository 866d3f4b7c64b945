#include "noisysketch/vector.hpp"

#include "noisysketch/detail/summation.hpp"
#include "noisysketch/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace noisysketch {

Vector::Vector(Index n) : n_(n), storage_(SparseEntries{}) {
    if (n < 0) throw BadVector("vector dimension must be nonnegative");
}

Vector Vector::dense(Eigen::VectorXd values) {
    Vector v(values.size());
    v.storage_ = std::move(values);
    return v;
}

Vector Vector::sparse(Index n, std::vector<Index> indices, std::vector<double> values) {
    if (indices.size() != values.size())
        throw BadVector("sparse index and value lists differ in length");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] < 0 || indices[k] >= n)
            throw BadVector("sparse index " + std::to_string(indices[k]) + " outside [0, " +
                            std::to_string(n) + ")");
        if (k > 0 && indices[k] <= indices[k - 1])
            throw BadVector("sparse indices must be strictly increasing");
        if (values[k] == 0.0)
            throw BadVector("sparse value at index " + std::to_string(indices[k]) + " is zero");
    }
    Vector v(n);
    v.storage_ = SparseEntries{std::move(indices), std::move(values)};
    return v;
}

Vector Vector::one_hot(Index n, Index position) {
    return sparse(n, {position}, {1.0});
}

Vector Vector::equal_sparse(Index n, Index k) {
    if (k < 1 || k > n) throw BadVector("equal_sparse needs 1 <= k <= n");
    std::vector<Index> idx(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    return sparse(n, std::move(idx), std::vector<double>(static_cast<std::size_t>(k), 1.0));
}

Vector Vector::ones(Index n) {
    return dense(Eigen::VectorXd::Ones(n));
}

Index Vector::nnz() const noexcept {
    Index count = 0;
    for_each_nonzero([&](Index, double) { ++count; });
    return count;
}

double Vector::operator[](Index i) const {
    if (i < 0 || i >= n_) throw BadVector("index out of range");
    if (const auto* d = std::get_if<Eigen::VectorXd>(&storage_)) return (*d)[i];
    const auto& s = std::get<SparseEntries>(storage_);
    const auto it = std::lower_bound(s.indices.begin(), s.indices.end(), i);
    if (it == s.indices.end() || *it != i) return 0.0;
    return s.values[static_cast<std::size_t>(it - s.indices.begin())];
}

const Eigen::VectorXd& Vector::dense_values() const {
    return std::get<Eigen::VectorXd>(storage_);
}

const SparseEntries& Vector::sparse_entries() const {
    return std::get<SparseEntries>(storage_);
}

Eigen::VectorXd Vector::to_dense() const {
    if (!is_sparse()) return dense_values();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for_each_nonzero([&](Index i, double x) { out[i] = x; });
    return out;
}

Vector Vector::as_dense() const {
    return dense(to_dense());
}

Vector Vector::as_sparse() const {
    SparseEntries s;
    for_each_nonzero([&](Index i, double x) {
        s.indices.push_back(i);
        s.values.push_back(x);
    });
    Vector v(n_);
    v.storage_ = std::move(s);
    return v;
}

bool operator==(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    const Vector sa = a.as_sparse();
    const Vector sb = b.as_sparse();
    return sa.sparse_entries().indices == sb.sparse_entries().indices &&
           sa.sparse_entries().values == sb.sparse_entries().values;
}

Vector operator*(double c, const Vector& v) {
    if (!v.is_sparse()) return Vector::dense(c * v.dense_values());
    SparseEntries s;
    v.for_each_nonzero([&](Index i, double x) {
        const double y = c * x;
        if (y != 0.0) {
            s.indices.push_back(i);
            s.values.push_back(y);
        }
    });
    return Vector::sparse(v.size(), std::move(s.indices), std::move(s.values));
}

namespace {

detail::NormTotals totals(const Vector& v) {
    detail::NormAccumulator acc;
    v.for_each_nonzero([&](Index i, double x) { acc.add(i, x); });
    return acc.totals();
}

}  // namespace

double norm2_sq(const Vector& v) {
    return totals(v).norm2_sq;
}

double norm2(const Vector& v) {
    return std::sqrt(norm2_sq(v));
}

double norm_inf(const Vector& v) {
    double m = 0.0;
    v.for_each_nonzero([&](Index, double x) { m = std::max(m, std::fabs(x)); });
    return m;
}

double nu(const Vector& v) {
    const auto t = totals(v);
    if (t.norm2_sq == 0.0) throw ZeroVector("nu: the non-uniformity of the zero vector is undefined");
    return t.norm_inf / std::sqrt(t.norm2_sq);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view s, std::size_t line) {
    s = trim(s);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(x))
        throw IoError("line " + std::to_string(line) + ": cannot parse value '" + std::string(s) + "'");
    return x;
}

Index parse_index(std::string_view s, std::size_t line) {
    s = trim(s);
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IoError("line " + std::to_string(line) + ": cannot parse index '" + std::string(s) + "'");
    return static_cast<Index>(x);
}

}  // namespace

Vector read_vector(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    bool sparse = false;
    Index n = -1;
    std::vector<double> dense_values;
    std::vector<Index> indices;
    std::vector<double> values;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.starts_with("n=")) {
            if (sparse || !dense_values.empty())
                throw IoError("line " + std::to_string(line_no) + ": unexpected header");
            sparse = true;
            n = parse_index(line.substr(2), line_no);
            if (n < 1) throw IoError("sparse header: dimension must be positive");
            continue;
        }
        if (sparse) {
            const auto comma = line.find(',');
            if (comma == std::string_view::npos)
                throw IoError("line " + std::to_string(line_no) + ": expected 'index,value'");
            const Index i = parse_index(line.substr(0, comma), line_no);
            const double x = parse_double(line.substr(comma + 1), line_no);
            if (x == 0.0) continue;
            indices.push_back(i);
            values.push_back(x);
        } else {
            dense_values.push_back(parse_double(line, line_no));
        }
    }
    if (in.bad()) throw IoError("read error");
    if (sparse) {
        try {
            return Vector::sparse(n, std::move(indices), std::move(values));
        } catch (const BadVector& e) {
            throw IoError(std::string("invalid sparse vector file: ") + e.what());
        }
    }
    if (dense_values.empty()) throw IoError("vector file holds no values");
    return Vector::dense(Eigen::Map<Eigen::VectorXd>(dense_values.data(),
                                                     static_cast<Index>(dense_values.size())));
}

Vector read_vector(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_vector(in);
}

void write_vector(std::ostream& out, const Vector& v) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    if (v.is_sparse()) {
        out << "n=" << v.size() << '\n';
        v.for_each_nonzero([&](Index i, double x) { out << i << ',' << x << '\n'; });
    } else {
        for (Index i = 0; i < v.size(); ++i) out << v.dense_values()[i] << '\n';
    }
    out.precision(old);
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_vector(out, v);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace noisysketch
