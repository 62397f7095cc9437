#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polystab/certify.hpp"
#include "polystab/koopman.hpp"
#include "polystab/multiindex.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab {

enum class WeightSchemeKind { automatic, appendix_a, appendix_b, custom };

/// Double sequence b_{jk} used by the Lyapunov recursion. appendix_a is the
/// flat polynomial scheme (b_jj = 1-xi, b_jk = xi/2K on couplings);
/// appendix_b is the coupling-normalized scheme for analytic fields (slack
/// kappa). automatic resolves by field kind.
struct WeightScheme {
    WeightSchemeKind kind = WeightSchemeKind::automatic;
    double slack = 0.99;  // xi (appendix_a) or kappa (appendix_b), in ]0,1[
    std::map<std::pair<std::size_t, std::size_t>, double> custom;
};

namespace detail {

inline WeightSchemeKind resolve_scheme_kind(const WeightScheme& scheme, const TaylorVectorField& F) {
    if (scheme.kind != WeightSchemeKind::automatic) return scheme.kind;
    return F.kind() == FieldKind::polynomial ? WeightSchemeKind::appendix_a
                                             : WeightSchemeKind::appendix_b;
}

inline void check_slack(const WeightScheme& scheme) {
    if (!(scheme.slack > 0.0 && scheme.slack < 1.0))
        throw std::invalid_argument("WeightScheme: slack must lie in ]0,1[");
}

/// Upper bound for sum_l |<L e_l, e_j>| (couplings into e_j, diagonal
/// included). Exact over the stored table; for analytic fields the
/// coefficients beyond the truncation are bounded through the envelope.
inline double coupling_sum_into_upper(const TaylorVectorField& F, const MonomialIndexMap& map,
                                      std::size_t j) {
    const int n = F.dimension();
    const MultiIndex alpha_j = map.index_to_alpha(j);
    std::map<MultiIndex, bool, GradedLess> seen;
    double sum = 0.0;
    for (int p = 1; p <= n; ++p) {
        for (const auto& [beta, coeff] : F.component(p)) {
            std::vector<int> e(static_cast<std::size_t>(n));
            bool valid = true;
            for (int i = 0; i < n && valid; ++i) {
                e[static_cast<std::size_t>(i)] = alpha_j[i] + (i == p - 1 ? 1 : 0) - beta[i];
                if (e[static_cast<std::size_t>(i)] < 0) valid = false;
            }
            if (!valid) continue;
            MultiIndex alpha_l{std::move(e)};
            if (alpha_l.degree() < 1) continue;
            if (!seen.emplace(alpha_l, true).second) continue;
            const std::size_t l = map.alpha_to_index(alpha_l);
            sum += std::abs(generator_entry(F, map, l, j));
        }
    }
    if (F.kind() == FieldKind::analytic && alpha_j.degree() > F.truncation_degree()) {
        for (int p = 1; p <= n; ++p) {
            const auto& env = F.tail_envelope()[static_cast<std::size_t>(p - 1)];
            if (env.C <= 0.0) continue;
            if (env.r >= 1.0)
                throw std::domain_error("coupling sums: envelope diverges on the unit polydisc");
            sum += alpha_j.degree() * env.C *
                   detail::block_tail_sum(n, F.truncation_degree(), env.r);
        }
    }
    return sum;
}

/// Upper bound for sum_l |<L e_k, e_l>| (couplings out of e_k, diagonal
/// included), same enclosure policy as above.
inline double coupling_sum_out_of_upper(const TaylorVectorField& F, const MonomialIndexMap& map,
                                        std::size_t k) {
    const int n = F.dimension();
    const MultiIndex alpha_k = map.index_to_alpha(k);
    std::map<MultiIndex, Complex, GradedLess> targets;
    for (int p = 1; p <= n; ++p) {
        const int power = alpha_k[p - 1];
        if (power == 0) continue;
        for (const auto& [beta, coeff] : F.component(p)) {
            std::vector<int> e(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                e[static_cast<std::size_t>(i)] = alpha_k[i] - (i == p - 1 ? 1 : 0) + beta[i];
            MultiIndex target{std::move(e)};
            auto [it, inserted] = targets.emplace(target, Complex(0.0, 0.0));
            it->second += static_cast<double>(power) * coeff;
        }
    }
    double sum = 0.0;
    for (const auto& [alpha, value] : targets) sum += std::abs(value);
    if (F.kind() == FieldKind::analytic) {
        for (int p = 1; p <= n; ++p) {
            const int power = alpha_k[p - 1];
            if (power == 0) continue;
            const auto& env = F.tail_envelope()[static_cast<std::size_t>(p - 1)];
            if (env.C <= 0.0) continue;
            if (env.r >= 1.0)
                throw std::domain_error("coupling sums: envelope diverges on the unit polydisc");
            sum += power * env.C * detail::block_tail_sum(n, F.truncation_degree(), env.r);
        }
    }
    return sum;
}

inline void validate_custom_row(const WeightScheme& scheme, std::size_t j) {
    double row = 0.0;
    for (const auto& [key, b] : scheme.custom) {
        if (b < 0.0) throw std::invalid_argument("custom weights must be non-negative");
        if (key.first == j) row += b;
    }
    if (row > 1.0 + 1e-12)
        throw std::invalid_argument("custom weight scheme violates the row-sum invariant");
}

}  // namespace detail

/// b_{jk} for the selected scheme, evaluated on a unit-polydisc field.
inline double weights(const WeightScheme& scheme, const TaylorVectorField& F,
                      const MonomialIndexMap& map, std::size_t j, std::size_t k) {
    detail::check_slack(scheme);
    const WeightSchemeKind kind = detail::resolve_scheme_kind(scheme, F);

    if (kind == WeightSchemeKind::custom) {
        detail::validate_custom_row(scheme, j);
        auto it = scheme.custom.find({j, k});
        return it == scheme.custom.end() ? 0.0 : it->second;
    }

    if (kind == WeightSchemeKind::appendix_a) {
        if (j == k) return 1.0 - scheme.slack;
        const long K = polynomial_quantities(F).K;
        const bool coupled = generator_entry(F, map, k, j) != Complex(0.0, 0.0) ||
                             generator_entry(F, map, j, k) != Complex(0.0, 0.0);
        if (!coupled || K == 0) return 0.0;
        return scheme.slack / (2.0 * static_cast<double>(K));
    }

    // appendix_b
    if (j == k) return 1.0 - scheme.slack;
    const int dj = map.index_to_alpha(j).degree();
    const int dk = map.index_to_alpha(k).degree();
    if (dj == dk) return 0.0;
    if (dk < dj) {
        const double c = std::abs(generator_entry(F, map, k, j));
        if (c == 0.0) return 0.0;
        return 0.5 * scheme.slack * c / detail::coupling_sum_into_upper(F, map, j);
    }
    const double c = std::abs(generator_entry(F, map, j, k));
    if (c == 0.0) return 0.0;
    return 0.5 * scheme.slack * c / detail::coupling_sum_out_of_upper(F, map, j);
}

/// Double sequence Q_{jk} (j >= 2, k < j) of the Lyapunov recursion:
/// |<L e_k,e_j>|^2 / (4 |Re<L e_j,e_j>| |Re<L e_k,e_k>| b_jk b_kj), zero
/// where the coupling vanishes. Requires a hyperbolic diagonal Jacobian.
struct QTable {
    int max_degree = 0;
    std::map<std::pair<std::size_t, std::size_t>, double> values;

    double value(std::size_t j, std::size_t k) const {
        auto it = values.find({j, k});
        return it == values.end() ? 0.0 : it->second;
    }

    double max_value() const {
        double m = 0.0;
        for (const auto& [key, q] : values) m = std::max(m, q);
        return m;
    }
};

inline QTable q_sequence(const TaylorVectorField& F, const MonomialIndexMap& map,
                         const WeightScheme& scheme, int max_degree) {
    detail::check_slack(scheme);
    const auto report = check_assumptions(F);
    if (!report.jacobian_diagonal || !report.hyperbolic)
        throw std::invalid_argument("q_sequence: requires a hyperbolic diagonal Jacobian");
    const WeightSchemeKind kind = detail::resolve_scheme_kind(scheme, F);
    const long K = kind == WeightSchemeKind::appendix_a ? polynomial_quantities(F).K : 0;

    const GeneratorWindow window = generator_window(F, map, max_degree);
    std::map<std::size_t, double> diag_re;
    const std::size_t count = map.ensure_degree(max_degree);
    for (std::size_t j = 1; j < count; ++j)
        diag_re[j] = std::abs(generator_entry(F, map, j, j).real());

    std::map<std::size_t, double> into_upper, out_upper;
    const auto into = [&](std::size_t j) {
        auto it = into_upper.find(j);
        if (it == into_upper.end())
            it = into_upper.emplace(j, detail::coupling_sum_into_upper(F, map, j)).first;
        return it->second;
    };
    const auto out_of = [&](std::size_t k) {
        auto it = out_upper.find(k);
        if (it == out_upper.end())
            it = out_upper.emplace(k, detail::coupling_sum_out_of_upper(F, map, k)).first;
        return it->second;
    };

    QTable table;
    table.max_degree = max_degree;
    for (const auto& entry : window.entries) {
        const std::size_t j = entry.row, k = entry.col;
        if (j == k) continue;
        if (k == 0 || j <= k)
            throw std::logic_error("q_sequence: unexpected non-triangular coupling");
        const double c2 = std::norm(entry.value);
        double bjk = 0.0, bkj = 0.0;
        switch (kind) {
            case WeightSchemeKind::appendix_a: {
                if (K == 0) break;
                bjk = bkj = scheme.slack / (2.0 * static_cast<double>(K));
                break;
            }
            case WeightSchemeKind::appendix_b: {
                const double c = std::sqrt(c2);
                bjk = 0.5 * scheme.slack * c / into(j);
                bkj = 0.5 * scheme.slack * c / out_of(k);
                break;
            }
            case WeightSchemeKind::custom: {
                detail::validate_custom_row(scheme, j);
                auto fjk = scheme.custom.find({j, k});
                auto fkj = scheme.custom.find({k, j});
                bjk = fjk == scheme.custom.end() ? 0.0 : fjk->second;
                bkj = fkj == scheme.custom.end() ? 0.0 : fkj->second;
                break;
            }
            case WeightSchemeKind::automatic:
                break;  // resolved above
        }
        if (!(bjk * bkj > 0.0))
            throw std::invalid_argument("q_sequence: scheme assigns zero weight to a live coupling");
        const double q = c2 / (4.0 * diag_re[j] * diag_re[k] * bjk * bkj);
        table.values[{j, k}] = q;
    }
    return table;
}

/// Positive weights satisfying the strict recursion
/// eps_j > max_{k<j} eps_k Q_{jk}, constructed in enumeration order with a
/// multiplicative margin (1 + slack_delta) and floor 1.
struct EpsilonSequence {
    std::vector<double> values;  // index-aligned; values[0] (constant) unused
    double slack_delta = 1e-6;
    int max_degree = 0;
};

inline EpsilonSequence epsilon_sequence(const QTable& table, const MonomialIndexMap& map,
                                        int max_degree, double slack_delta = 1e-6) {
    if (!(slack_delta > 0.0))
        throw std::invalid_argument("epsilon_sequence: slack_delta must be positive");
    const std::size_t count = map.ensure_degree(max_degree);
    EpsilonSequence eps;
    eps.slack_delta = slack_delta;
    eps.max_degree = max_degree;
    eps.values.assign(count, 0.0);
    for (std::size_t j = 1; j < count; ++j) {
        double constraint = 0.0;
        const auto begin = table.values.lower_bound({j, 0});
        const auto end = table.values.lower_bound({j + 1, 0});
        for (auto it = begin; it != end; ++it)
            constraint = std::max(constraint, eps.values[it->first.second] * it->second);
        eps.values[j] = std::max(1.0, (1.0 + slack_delta) * constraint);
    }
    return eps;
}

/// Largest rho for which sum_k |alpha(k)| eps_k rho^{2|alpha(k)|} converges,
/// estimated from the truncated sequence by the per-degree growth ratio:
/// radius = 1/sqrt(Q-hat). Non-stabilizing ratios are flagged and the radius
/// is the conservative one.
struct ConvergenceEstimate {
    double radius = 0.0;
    double growth = 1.0;  // fitted Q-hat
    bool geometric = true;
    std::vector<double> block_maxima;  // E_m for m = 1..max_degree
};

inline ConvergenceEstimate convergence_radius(const EpsilonSequence& eps,
                                              const MonomialIndexMap& map) {
    const int D = eps.max_degree;
    if (D < 1) throw std::invalid_argument("convergence_radius: need at least degree 1");
    ConvergenceEstimate est;
    est.block_maxima.assign(static_cast<std::size_t>(D), 0.0);
    for (std::size_t k = 1; k < eps.values.size(); ++k) {
        const int m = map.index_to_alpha(k).degree();
        if (m >= 1 && m <= D)
            est.block_maxima[static_cast<std::size_t>(m - 1)] =
                std::max(est.block_maxima[static_cast<std::size_t>(m - 1)], eps.values[k]);
    }
    double growth = std::pow(est.block_maxima.back(), 1.0 / D);
    double ratio_min = std::numeric_limits<double>::infinity();
    double ratio_max = 0.0;
    const int first = std::max(1, D - 5);
    for (int m = first; m < D; ++m) {
        const double r = est.block_maxima[static_cast<std::size_t>(m)] /
                         est.block_maxima[static_cast<std::size_t>(m - 1)];
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
        growth = std::max(growth, r);
    }
    if (D > 1 && ratio_max > 1.1 * ratio_min) est.geometric = false;
    est.growth = growth;
    est.radius = 1.0 / std::sqrt(growth);
    return est;
}

/// Truncated Lyapunov function V(z) = sum_k eps_k |(z/scale)^{alpha(k)}|^2,
/// valid on D^n(rho) in the original coordinates.
struct LyapunovFunction {
    int dimension = 0;
    double rho = 0.0;
    double scale = 1.0;
    int truncation_degree = 0;
    double slack = 0.0;
    double slack_delta = 0.0;
    WeightSchemeKind scheme_kind = WeightSchemeKind::appendix_a;
    std::vector<MultiIndex> alphas;  // enumeration indices 1..M
    std::vector<double> epsilon;     // aligned with alphas
    double growth = 1.0;             // fitted Q-hat of the eps sequence
    double tail_bound = 0.0;         // dropped part of the convergence series at rho

    double evaluate(const std::vector<Complex>& z) const {
        if (static_cast<int>(z.size()) != dimension)
            throw std::invalid_argument("LyapunovFunction::evaluate: dimension mismatch");
        std::vector<Complex> w(z);
        for (auto& wi : w) wi /= scale;
        double sum = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            double mag2 = 1.0;
            for (int c = 0; c < dimension; ++c) {
                const double m2 = std::norm(w[static_cast<std::size_t>(c)]);
                for (int p = 0; p < alphas[i][c]; ++p) mag2 *= m2;
            }
            sum += epsilon[i] * mag2;
        }
        return sum;
    }
};

namespace detail {

/// Estimate of the dropped series tail sum_{m>N} m E(m) binom(m+n-1,n-1)
/// rho^{2m} with E extrapolated geometrically from the last block.
inline double epsilon_series_tail(int n, int N, double last_block_max, double growth, double rho) {
    const double q = growth * rho * rho;
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    double e = last_block_max;
    for (int m = N + 1; m < N + 2000000; ++m) {
        e *= growth;
        const double term = static_cast<double>(m) *
                            static_cast<double>(MonomialIndexMap::block_size(m, n)) * e *
                            std::pow(rho, 2.0 * m);
        sum += term;
        const double step = q * ((m + 1.0) / m) * ((m + n) / (m + 1.0));
        if (step < 1.0 && term * step / (1.0 - step) <= 1e-18 * sum + 1e-300)
            return sum + term * step / (1.0 - step);
    }
    return sum;
}

}  // namespace detail

/// End-to-end Lemma-1 construction for a certificate: rescale to the unit
/// polydisc, build the Q table and eps sequence for the scheme, check the
/// convergence radius against rho/scale, and assemble the truncated V.
inline LyapunovFunction build_lyapunov(const TaylorVectorField& F, const StabilityCertificate& cert,
                                       const WeightScheme& scheme = {}, int truncation_degree = 12,
                                       double slack_delta = 1e-6) {
    if (!cert.certified)
        throw std::invalid_argument("build_lyapunov: certificate does not certify the requested rho");
    if (truncation_degree < 1)
        throw std::invalid_argument("build_lyapunov: truncation degree must be >= 1");
    const double rho = cert.requested_rho;

    double rescale = 1.0;
    if (cert.theorem == 1) {
        switch (cert.polynomial->branch) {
            case Theorem1Branch::ratio_ge_one:
                rescale = std::min(1.0, F.mu());
                break;
            case Theorem1Branch::ratio_lt_one:
            case Theorem1Branch::degenerate_linear: {
                const double hi = std::min(cert.polynomial->rho_sup, F.mu());
                const double lo = std::max(rho, std::min(1.0, hi));
                rescale = 0.5 * (lo + hi);
                break;
            }
        }
    } else {
        rescale = cert.analytic->mu;
    }

    const TaylorVectorField unit_field = rescale_to_unit(F.with_domain_radius(rescale));
    MonomialIndexMap map(F.dimension());
    const QTable table = q_sequence(unit_field, map, scheme, truncation_degree);
    const EpsilonSequence eps = epsilon_sequence(table, map, truncation_degree, slack_delta);
    const ConvergenceEstimate conv = convergence_radius(eps, map);
    const double rho_unit = rho / rescale;
    if (!(rho_unit < conv.radius))
        throw std::domain_error(
            "build_lyapunov: epsilon series convergence radius falls short of rho "
            "(increase the scheme slack or the truncation degree)");

    LyapunovFunction V;
    V.dimension = F.dimension();
    V.rho = rho;
    V.scale = rescale;
    V.truncation_degree = truncation_degree;
    V.slack = scheme.slack;
    V.slack_delta = slack_delta;
    V.scheme_kind = detail::resolve_scheme_kind(scheme, F);
    const std::size_t count = map.ensure_degree(truncation_degree);
    for (std::size_t k = 1; k < count; ++k) {
        V.alphas.push_back(map.index_to_alpha(k));
        V.epsilon.push_back(eps.values[k]);
    }
    V.growth = conv.growth;
    V.tail_bound = detail::epsilon_series_tail(F.dimension(), truncation_degree,
                                               conv.block_maxima.back(), conv.growth, rho_unit);
    return V;
}

/// Convenience: certify rho first (Theorem 1 for polynomial fields, Theorem 2
/// at the declared domain radius otherwise), then build.
inline LyapunovFunction build_lyapunov(const TaylorVectorField& F, double rho,
                                       const WeightScheme& scheme = {}, int truncation_degree = 12,
                                       double slack_delta = 1e-6, const CertifyOptions& opts = {}) {
    const StabilityCertificate cert = F.kind() == FieldKind::polynomial
                                          ? certify_polynomial(F, rho, opts)
                                          : certify_analytic(F, F.mu(), rho, opts);
    return build_lyapunov(F, cert, scheme, truncation_degree, slack_delta);
}

/// d/dt V(phi^t(z)) at t = 0:
/// 2 sum_k eps_k Re( conj(w^{alpha(k)}) sum_l alpha_l(k) w^{alpha(k)-e_l} F_l(z)/scale ),
/// with w = z/scale.
inline double lyapunov_derivative(const LyapunovFunction& V, const TaylorVectorField& F,
                                  const std::vector<Complex>& z) {
    const int n = V.dimension;
    if (F.dimension() != n || static_cast<int>(z.size()) != n)
        throw std::invalid_argument("lyapunov_derivative: dimension mismatch");
    std::vector<Complex> w(z);
    for (auto& wi : w) wi /= V.scale;
    const std::vector<Complex> field = F.value_at(z);

    int max_power = 0;
    for (const auto& alpha : V.alphas)
        for (int c = 0; c < n; ++c) max_power = std::max(max_power, alpha[c]);
    std::vector<std::vector<Complex>> powers(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        auto& col = powers[static_cast<std::size_t>(c)];
        col.assign(static_cast<std::size_t>(max_power) + 1, Complex(1.0, 0.0));
        for (int p = 1; p <= max_power; ++p) col[static_cast<std::size_t>(p)] = col[p - 1] * w[static_cast<std::size_t>(c)];
    }
    const auto monomial = [&](const MultiIndex& alpha, int skip) {
        Complex m(1.0, 0.0);
        for (int c = 0; c < n; ++c) {
            const int e = alpha[c] - (c == skip ? 1 : 0);
            m *= powers[static_cast<std::size_t>(c)][static_cast<std::size_t>(e)];
        }
        return m;
    };

    double sum = 0.0;
    for (std::size_t i = 0; i < V.alphas.size(); ++i) {
        const MultiIndex& alpha = V.alphas[i];
        Complex inner(0.0, 0.0);
        for (int l = 0; l < n; ++l) {
            if (alpha[l] == 0) continue;
            inner += static_cast<double>(alpha[l]) * monomial(alpha, l) *
                     field[static_cast<std::size_t>(l)] / V.scale;
        }
        sum += 2.0 * V.epsilon[i] * (std::conj(monomial(alpha, -1)) * inner).real();
    }
    return sum;
}

}  // namespace polystab
