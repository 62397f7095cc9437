#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "polystab/multiindex.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab::testing {

// ---------------------------------------------------------------------------
// Worked example 1: planar polynomial field with parameters a = -1/4, c = 8,
// b = -1/50, diagonalizable by P = [[1,-1],[1,1]].
//
// The raw quadratic coefficient is a^2 b = -1/800: that is the unique reading
// under which the transformed field below, the criterion quantities
// (S = 1/800) and the radius 50/3 are all mutually consistent; the
// alternative reading a*b of the same source display is inconsistent with
// them (see the regression tests).
// ---------------------------------------------------------------------------

inline MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

inline TaylorVectorField example1_raw(double mu = 20.0) {
    const double a = -0.25, c = 8.0, b = -0.02;
    std::vector<CoefficientEntry> entries = {
        {1, mi({1, 0}), Complex(a, 0.0)},
        {1, mi({0, 1}), Complex(-1.0 / c, 0.0)},
        {2, mi({0, 1}), Complex(a, 0.0)},
        {2, mi({1, 0}), Complex(-1.0 / c, 0.0)},
        {2, mi({2, 0}), Complex(a * a * b, 0.0)},
    };
    return TaylorVectorField(2, mu, FieldKind::polynomial, entries);
}

inline Eigen::MatrixXcd example1_basis() {
    Eigen::MatrixXcd P(2, 2);
    P << Complex(1, 0), Complex(-1, 0), Complex(1, 0), Complex(1, 0);
    return P;
}

/// Diagonalized example-1 field: linear part (-3/8, -1/8), both components
/// sharing the quadratic form (q, -2q, q) with q = a^2 b / 2 = -1/1600.
inline TaylorVectorField example1_transformed(double mu = 20.0) {
    const double q = -1.0 / 1600.0;
    std::vector<CoefficientEntry> entries = {
        {1, mi({1, 0}), Complex(-0.375, 0.0)}, {1, mi({2, 0}), Complex(q, 0.0)},
        {1, mi({1, 1}), Complex(-2.0 * q, 0.0)}, {1, mi({0, 2}), Complex(q, 0.0)},
        {2, mi({0, 1}), Complex(-0.125, 0.0)}, {2, mi({2, 0}), Complex(q, 0.0)},
        {2, mi({1, 1}), Complex(-2.0 * q, 0.0)}, {2, mi({0, 2}), Complex(q, 0.0)},
    };
    return TaylorVectorField(2, mu, FieldKind::polynomial, entries);
}

// ---------------------------------------------------------------------------
// Worked example 2: planar analytic field
//   F1 = -z1 + 2 z2^2/(30 - z2),   F2 = -z2 + 4 z1^2/(20 - z1)^2
// on D^2(10), ingested as the truncated Taylor table
//   a_{1,(0,m)} = 2/30^{m-1},  a_{2,(m,0)} = 4(m-1)/20^m   (m >= 2)
// with fixed geometric envelopes valid for every truncation degree >= 2:
//   |a_{1,alpha}| <= 58 * 0.034^{|alpha|},  |a_{2,alpha}| <= 147 * 0.0505^{|alpha|}.
// ---------------------------------------------------------------------------

inline TaylorVectorField example2_field(int truncation = 60, double mu = 10.0) {
    std::vector<CoefficientEntry> entries = {
        {1, mi({1, 0}), Complex(-1.0, 0.0)},
        {2, mi({0, 1}), Complex(-1.0, 0.0)},
    };
    for (int m = 2; m <= truncation; ++m) {
        entries.push_back({1, mi({0, m}), Complex(2.0 / std::pow(30.0, m - 1), 0.0)});
        entries.push_back({2, mi({m, 0}), Complex(4.0 * (m - 1) / std::pow(20.0, m), 0.0)});
    }
    std::vector<TailEnvelope> tail = {{58.0, 0.034}, {147.0, 0.0505}};
    return TaylorVectorField(2, mu, FieldKind::analytic, entries, truncation, tail);
}

/// Closed-form summation oracle for the two coefficient series of example 2:
/// L_mu = 2 mu + 2 mu^2/(30 - mu) + 4 (mu/20)^2 / (1 - mu/20)^2, mu < 20.
inline double example2_L_mu_closed_form(double mu) {
    const double x = mu / 20.0;
    return 2.0 * mu + 2.0 * mu * mu / (30.0 - mu) + 4.0 * x * x / ((1.0 - x) * (1.0 - x));
}

/// Rational closed form of the example-2 field itself.
inline std::vector<Complex> example2_closed_form(const std::vector<Complex>& z) {
    const Complex z1 = z[0], z2 = z[1];
    return {-z1 + 2.0 * z2 * z2 / (30.0 - z2), -z2 + 4.0 * z1 * z1 / ((20.0 - z1) * (20.0 - z1))};
}

// ---------------------------------------------------------------------------
// Random fields. Coefficients are dyadic (k/64) so that generator-entry
// arithmetic is exact and route-equality tests can compare with ==.
// ---------------------------------------------------------------------------

inline double u01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

inline double dyadic(std::mt19937_64& gen, int max_num = 192) {
    const int num = static_cast<int>(u01(gen) * (2 * max_num)) - max_num;
    return static_cast<double>(num) / 64.0;
}

inline MultiIndex random_alpha(std::mt19937_64& gen, int n, int degree) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    for (int unit = 0; unit < degree; ++unit)
        e[static_cast<std::size_t>(u01(gen) * n) % static_cast<std::size_t>(n)] += 1;
    return MultiIndex(std::move(e));
}

/// Random polynomial field with a diagonal Hurwitz linear part and dyadic
/// higher-order coefficients.
inline TaylorVectorField random_diagonal_field(std::mt19937_64& gen, int n, int max_degree,
                                               int max_terms, double mu = 4.0,
                                               bool complex_coeffs = true) {
    std::vector<CoefficientEntry> entries;
    for (int l = 1; l <= n; ++l) {
        const double re = -(1.0 + static_cast<double>(static_cast<int>(u01(gen) * 64)) / 16.0);
        const double im = complex_coeffs ? dyadic(gen, 32) : 0.0;
        entries.push_back({l, unit_multiindex(n, l), Complex(re, im)});
    }
    const int extra = 1 + static_cast<int>(u01(gen) * max_terms);
    for (int t = 0; t < extra; ++t) {
        const int l = 1 + static_cast<int>(u01(gen) * n) % n;
        const int degree =
            max_degree > 2 ? 2 + static_cast<int>(u01(gen) * (max_degree - 1)) % (max_degree - 1) : 2;
        const double re = dyadic(gen);
        const double im = complex_coeffs ? dyadic(gen) : 0.0;
        if (re == 0.0 && im == 0.0) continue;
        entries.push_back({l, random_alpha(gen, n, degree), Complex(re, im)});
    }
    return TaylorVectorField(n, mu, FieldKind::polynomial, entries);
}

/// Independent restatement of the basis enumeration: generate every exponent
/// vector with |alpha| <= max_degree by an odometer and sort by (total degree,
/// then descending entries at the first differing position).
inline std::vector<MultiIndex> brute_force_enumeration(int n, int max_degree) {
    std::vector<MultiIndex> all;
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    while (true) {
        int degree = 0;
        for (int v : e) degree += v;
        if (degree <= max_degree) all.push_back(MultiIndex(e));
        int pos = n - 1;
        while (pos >= 0 && e[static_cast<std::size_t>(pos)] == max_degree) {
            e[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        e[static_cast<std::size_t>(pos)] += 1;
    }
    std::sort(all.begin(), all.end(), [](const MultiIndex& a, const MultiIndex& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        for (int j = 0; j < a.dimension(); ++j)
            if (a[j] != b[j]) return a[j] > b[j];
        return false;
    });
    return all;
}

}  // namespace polystab::testing
