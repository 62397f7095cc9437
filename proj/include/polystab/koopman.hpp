#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polystab/multiindex.hpp"
#include "polystab/sparse_polynomial.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab {

struct GeneratorEntry {
    std::size_t row = 0;  // j
    std::size_t col = 0;  // k
    Complex value;
};

/// Finite section of the generator matrix: every nonzero <L_F e_k, e_j> among
/// the indices of total degree <= max_degree, sorted by (row, col).
struct GeneratorWindow {
    int max_degree = 0;
    std::vector<GeneratorEntry> entries;

    Complex value(std::size_t row, std::size_t col) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(row, col),
                                   [](const GeneratorEntry& e, const std::pair<std::size_t, std::size_t>& key) {
                                       return std::make_pair(e.row, e.col) < key;
                                   });
        if (it != entries.end() && it->row == row && it->col == col) return it->value;
        return Complex(0.0, 0.0);
    }
};

/// Matrix element <L_F e_k, e_j> of the Koopman generator in the monomial
/// basis of the unit polydisc: zero when |alpha(j)| < |alpha(k)|, otherwise
/// sum_l alpha_l(k) a_{l,(alpha(j)-alpha(k))_l} with absent coefficients
/// read as zero. Callers working on D^n(mu) rescale the field first.
inline Complex generator_entry(const TaylorVectorField& F, const MonomialIndexMap& map,
                               std::size_t k, std::size_t j) {
    const MultiIndex alpha_k = map.index_to_alpha(k);
    const MultiIndex alpha_j = map.index_to_alpha(j);
    if (alpha_j.degree() < alpha_k.degree()) return Complex(0.0, 0.0);
    Complex sum(0.0, 0.0);
    for (int l = 1; l <= F.dimension(); ++l) {
        const int power = alpha_k[l - 1];
        if (power == 0) continue;
        const auto shifted = shifted_index(alpha_j, alpha_k, l);
        if (!shifted) continue;
        sum += static_cast<double>(power) * F.coefficient(l, *shifted);
    }
    return sum;
}

inline GeneratorWindow generator_window(const TaylorVectorField& F, const MonomialIndexMap& map,
                                        int max_degree) {
    if (max_degree < 1) throw std::invalid_argument("generator_window: max_degree must be >= 1");
    const std::size_t count = map.ensure_degree(max_degree);
    const int n = F.dimension();

    // Candidate rows per column from the coefficient support, values from the
    // Eq.-(4) gather above.
    std::map<std::pair<std::size_t, std::size_t>, Complex> found;
    for (std::size_t k = 1; k < count; ++k) {
        const MultiIndex alpha_k = map.index_to_alpha(k);
        for (int l = 1; l <= n; ++l) {
            if (alpha_k[l - 1] == 0) continue;
            for (const auto& [beta, coeff] : F.component(l)) {
                std::vector<int> e(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i)
                    e[static_cast<std::size_t>(i)] = alpha_k[i] - (i == l - 1 ? 1 : 0) + beta[i];
                MultiIndex alpha_j{std::move(e)};
                if (alpha_j.degree() > max_degree) continue;
                const std::size_t j = map.alpha_to_index(alpha_j);
                auto key = std::make_pair(j, k);
                if (found.count(key)) continue;
                const Complex value = generator_entry(F, map, k, j);
                if (value != Complex(0.0, 0.0)) found.emplace(key, value);
            }
        }
    }

    GeneratorWindow window;
    window.max_degree = max_degree;
    window.entries.reserve(found.size());
    for (const auto& [key, value] : found) window.entries.push_back({key.first, key.second, value});
    return window;
}

/// Brute-force oracle: expands L_F e_k = F . grad z^{alpha(k)} symbolically as
/// a polynomial and reads off the coefficient of z^{alpha(j)}. Requires a
/// polynomial field. Independent of the Eq.-(4) gather above by construction.
inline Complex generator_entry_oracle(const TaylorVectorField& F, const MonomialIndexMap& map,
                                      std::size_t k, std::size_t j) {
    if (F.kind() != FieldKind::polynomial)
        throw std::invalid_argument("generator_entry_oracle: requires a polynomial field");
    const int n = F.dimension();
    const MultiIndex alpha_k = map.index_to_alpha(k);
    SparsePolynomial expansion(n);
    for (int l = 1; l <= n; ++l) {
        const int power = alpha_k[l - 1];
        if (power == 0) continue;
        std::vector<int> e = alpha_k.exponents;
        e[static_cast<std::size_t>(l - 1)] -= 1;
        const SparsePolynomial partial =
            SparsePolynomial::monomial(MultiIndex(std::move(e)), Complex(static_cast<double>(power), 0.0));
        expansion += partial * component_polynomial(F, l);
    }
    return expansion.coefficient(map.index_to_alpha(j));
}

}  // namespace polystab
