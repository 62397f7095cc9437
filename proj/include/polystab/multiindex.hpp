#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace polystab {

/// Exponent vector alpha of a monomial z^alpha = z_1^{a_1} ... z_n^{a_n}.
struct MultiIndex {
    std::vector<int> exponents;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : exponents(std::move(e)) {
        for (int v : exponents)
            if (v < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    }

    int dimension() const { return static_cast<int>(exponents.size()); }

    /// Total degree |alpha|.
    int degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

    int operator[](int i) const { return exponents[static_cast<std::size_t>(i)]; }

    bool operator==(const MultiIndex& other) const { return exponents == other.exponents; }
    bool operator!=(const MultiIndex& other) const { return !(*this == other); }
};

/// Unit multi-index e_l (component l is 1-based, as everywhere in this library).
inline MultiIndex unit_multiindex(int n, int l) {
    if (l < 1 || l > n) throw std::invalid_argument("unit_multiindex: component out of range");
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(l - 1)] = 1;
    return MultiIndex(std::move(e));
}

/// Graded ordering of the monomial basis: lower total degree first; within a
/// degree block, alpha precedes beta when alpha_j > beta_j at the smallest
/// position j where they differ.
struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        const std::size_t n = a.exponents.size();
        for (std::size_t j = 0; j < n && j < b.exponents.size(); ++j) {
            if (a.exponents[j] != b.exponents[j]) return a.exponents[j] > b.exponents[j];
        }
        return false;
    }
};

/// (alpha_j - alpha_k)_l: componentwise difference with +1 added at component l
/// (1-based). Undefined (nullopt) when any resulting entry is negative; the
/// corresponding Taylor coefficient is then treated as zero.
inline std::optional<MultiIndex> shifted_index(const MultiIndex& alpha_j,
                                               const MultiIndex& alpha_k, int l) {
    const int n = alpha_j.dimension();
    if (alpha_k.dimension() != n)
        throw std::invalid_argument("shifted_index: dimension mismatch");
    if (l < 1 || l > n) throw std::invalid_argument("shifted_index: component out of range");
    std::vector<int> e(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int v = alpha_j[i] - alpha_k[i] + (i == l - 1 ? 1 : 0);
        if (v < 0) return std::nullopt;
        e[static_cast<std::size_t>(i)] = v;
    }
    return MultiIndex(std::move(e));
}

/// Bijective enumeration k <-> alpha(k) of N^n under GradedLess, generated
/// degree block by degree block on demand. Index 0 is the constant monomial;
/// indices 1..n are z_1..z_n. Extension is mutex-guarded, so concurrent reads
/// are safe.
class MonomialIndexMap {
public:
    explicit MonomialIndexMap(int dimension) : n_(dimension) {
        if (dimension < 1) throw std::invalid_argument("MonomialIndexMap: dimension must be positive");
    }

    int dimension() const { return n_; }

    /// Number of multi-indices of exact degree m: binomial(m+n-1, n-1).
    static std::uint64_t block_size(int degree, int dimension) {
        if (degree < 0) return 0;
        std::uint64_t num = 1, den = 1;
        for (int i = 1; i <= dimension - 1; ++i) {
            num *= static_cast<std::uint64_t>(degree + i);
            den *= static_cast<std::uint64_t>(i);
        }
        return num / den;
    }

    MultiIndex index_to_alpha(std::size_t k) const {
        std::lock_guard<std::mutex> lock(mutex_);
        while (enumeration_.size() <= k) extend_one_block();
        return enumeration_[k];
    }

    std::size_t alpha_to_index(const MultiIndex& alpha) const {
        if (alpha.dimension() != n_)
            throw std::invalid_argument("alpha_to_index: dimension mismatch");
        std::lock_guard<std::mutex> lock(mutex_);
        while (max_degree_ < alpha.degree()) extend_one_block();
        return ranks_.at(alpha);
    }

    /// Extends the enumeration so that every index of total degree <= degree
    /// exists; returns the total number of enumerated indices.
    std::size_t ensure_degree(int degree) const {
        std::lock_guard<std::mutex> lock(mutex_);
        while (max_degree_ < degree) extend_one_block();
        return enumeration_.size();
    }

    /// First enumeration index whose multi-index has the given total degree.
    std::size_t first_index_of_degree(int degree) const {
        std::lock_guard<std::mutex> lock(mutex_);
        while (max_degree_ < degree) extend_one_block();
        std::size_t first = 0;
        for (int m = 0; m < degree; ++m) first += block_size(m, n_);
        return first;
    }

private:
    void extend_one_block() const {
        const int m = max_degree_ + 1;
        std::vector<int> current(static_cast<std::size_t>(n_), 0);
        emit_block(m, 0, current);
        max_degree_ = m;
    }

    // Descending-lex emission of all compositions of remaining degree.
    void emit_block(int remaining, int pos, std::vector<int>& current) const {
        if (pos == n_ - 1) {
            current[static_cast<std::size_t>(pos)] = remaining;
            MultiIndex alpha(current);
            ranks_.emplace(alpha, enumeration_.size());
            enumeration_.push_back(std::move(alpha));
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            current[static_cast<std::size_t>(pos)] = v;
            emit_block(remaining - v, pos + 1, current);
        }
    }

    int n_;
    mutable std::mutex mutex_;
    mutable int max_degree_ = -1;
    mutable std::vector<MultiIndex> enumeration_;
    mutable std::map<MultiIndex, std::size_t, GradedLess> ranks_;
};

}  // namespace polystab
