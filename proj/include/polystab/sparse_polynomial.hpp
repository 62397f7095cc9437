#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "polystab/multiindex.hpp"

namespace polystab {

using Complex = std::complex<double>;

/// Sparse multivariate polynomial with complex coefficients, keyed by exponent
/// vector in the graded order. Small and exact-by-construction; used for
/// coordinate changes and as the symbolic expansion oracle, not as a
/// performance-oriented type.
class SparsePolynomial {
public:
    using TermMap = std::map<MultiIndex, Complex, GradedLess>;

    explicit SparsePolynomial(int dimension) : n_(dimension) {
        if (dimension < 1) throw std::invalid_argument("SparsePolynomial: dimension must be positive");
    }

    int dimension() const { return n_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    int degree() const {
        return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
    }

    Complex coefficient(const MultiIndex& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
    }

    /// Accumulates c * z^alpha; exact zeros are dropped.
    void add_term(const MultiIndex& alpha, Complex c) {
        if (alpha.dimension() != n_)
            throw std::invalid_argument("SparsePolynomial: dimension mismatch");
        auto [it, inserted] = terms_.emplace(alpha, c);
        if (!inserted) it->second += c;
        if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
    }

    SparsePolynomial& operator+=(const SparsePolynomial& rhs) {
        if (rhs.n_ != n_) throw std::invalid_argument("SparsePolynomial: dimension mismatch");
        for (const auto& [alpha, c] : rhs.terms_) add_term(alpha, c);
        return *this;
    }

    SparsePolynomial& operator*=(Complex s) {
        if (s == Complex(0.0, 0.0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [alpha, c] : terms_) c *= s;
        return *this;
    }

    friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
        if (a.n_ != b.n_) throw std::invalid_argument("SparsePolynomial: dimension mismatch");
        SparsePolynomial out(a.n_);
        std::vector<int> e(static_cast<std::size_t>(a.n_));
        for (const auto& [alpha, ca] : a.terms_) {
            for (const auto& [beta, cb] : b.terms_) {
                for (int i = 0; i < a.n_; ++i)
                    e[static_cast<std::size_t>(i)] = alpha[i] + beta[i];
                out.add_term(MultiIndex(e), ca * cb);
            }
        }
        return out;
    }

    SparsePolynomial pow(int k) const {
        if (k < 0) throw std::invalid_argument("SparsePolynomial::pow: negative exponent");
        SparsePolynomial out = constant(n_, Complex(1.0, 0.0));
        for (int i = 0; i < k; ++i) out = out * (*this);
        return out;
    }

    Complex evaluate(const std::vector<Complex>& z) const {
        if (static_cast<int>(z.size()) != n_)
            throw std::invalid_argument("SparsePolynomial::evaluate: dimension mismatch");
        Complex sum(0.0, 0.0);
        for (const auto& [alpha, c] : terms_) {
            Complex m(1.0, 0.0);
            for (int i = 0; i < n_; ++i)
                for (int p = 0; p < alpha[i]; ++p) m *= z[static_cast<std::size_t>(i)];
            sum += c * m;
        }
        return sum;
    }

    static SparsePolynomial constant(int n, Complex c) {
        SparsePolynomial out(n);
        out.add_term(MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)), c);
        return out;
    }

    static SparsePolynomial monomial(const MultiIndex& alpha, Complex c = Complex(1.0, 0.0)) {
        SparsePolynomial out(alpha.dimension());
        out.add_term(alpha, c);
        return out;
    }

private:
    int n_;
    TermMap terms_;
};

}  // namespace polystab
