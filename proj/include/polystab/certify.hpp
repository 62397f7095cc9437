#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polystab/numerics.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab {

enum class InvarianceStatus { certified, sampled_only, user_asserted, failed };

enum class Theorem1Branch { ratio_ge_one, ratio_lt_one, degenerate_linear };

/// Quantities of the polynomial stability criterion. K and S exclude the
/// self-monomial z_l of component l.
struct PolynomialCriterion {
    int d = 0;
    long K = 0;
    double S = 0.0;
    double R = 0.0;
    double ratio = 0.0;  // K*S/R
    Theorem1Branch branch = Theorem1Branch::degenerate_linear;
    double rho_sup = 0.0;  // supremal open bound for the certified radius
};

struct LmuEnclosure {
    double lower = 0.0;
    double upper = 0.0;
};

struct AnalyticCriterion {
    double mu = 0.0;
    LmuEnclosure L_mu;
    std::optional<double> reference_L_mu;  // externally claimed value, printed alongside
    double L_mu_used = 0.0;                // conservative: max(upper, reference)
    double R = 0.0;
    double rho_sup = 0.0;
};

struct CertifyOptions {
    enum class Invariance { automatic, user_asserted };
    Invariance invariance = Invariance::automatic;
    long boundary_samples = 10000;  // per face, for the sampled fallback
    std::uint64_t seed = 42;
    std::optional<double> reference_L_mu;
};

struct StabilityCertificate {
    int theorem = 0;  // 1 or 2
    std::optional<PolynomialCriterion> polynomial;
    std::optional<AnalyticCriterion> analytic;
    double requested_rho = 0.0;
    bool certified = false;
    InvarianceStatus invariance_status = InvarianceStatus::failed;
    AssumptionReport assumptions;
    std::vector<std::string> diagnostics;

    double rho_sup() const {
        if (polynomial) return polynomial->rho_sup;
        if (analytic) return analytic->rho_sup;
        return 0.0;
    }
};

/// d, K, S, R of Theorem 1 plus the branch and supremal radius. The
/// degenerate linear-diagonal case (K = 0, equivalently d <= 1 under a
/// diagonal Jacobian) certifies any radius inside the declared domain.
inline PolynomialCriterion polynomial_quantities(const TaylorVectorField& F) {
    if (F.kind() != FieldKind::polynomial)
        throw std::invalid_argument("polynomial_quantities: field is not polynomial");
    const int n = F.dimension();
    for (int l = 1; l <= n; ++l)
        for (const auto& [alpha, value] : F.component(l))
            if (alpha.degree() == 1 && alpha != unit_multiindex(n, l))
                throw std::invalid_argument("polynomial_quantities: jacobian not diagonal");

    PolynomialCriterion q;
    for (int l = 1; l <= n; ++l) {
        const MultiIndex self = unit_multiindex(n, l);
        for (const auto& [alpha, value] : F.component(l)) {
            q.d = std::max(q.d, alpha.degree());
            if (alpha != self) {
                ++q.K;
                q.S = std::max(q.S, std::abs(value));
            }
        }
    }
    q.R = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= n; ++l)
        q.R = std::min(q.R, std::abs(F.coefficient(l, unit_multiindex(n, l)).real()));

    if (q.K == 0 || q.d <= 1) {
        q.branch = Theorem1Branch::degenerate_linear;
        q.ratio = 0.0;
        q.rho_sup = F.mu();
    } else {
        q.ratio = static_cast<double>(q.K) * q.S / q.R;
        if (q.ratio >= 1.0) {
            q.branch = Theorem1Branch::ratio_ge_one;
            q.rho_sup = q.R / (static_cast<double>(q.K) * q.S);
        } else {
            q.branch = Theorem1Branch::ratio_lt_one;
            q.rho_sup = std::pow(q.R / (static_cast<double>(q.K) * q.S), 1.0 / (q.d - 1));
        }
    }
    return q;
}

namespace detail {

inline InvarianceStatus resolve_invariance(const TaylorVectorField& F, double rho,
                                           const CertifyOptions& opts,
                                           std::vector<std::string>& diagnostics) {
    if (opts.invariance == CertifyOptions::Invariance::user_asserted) {
        diagnostics.push_back("forward invariance asserted by user, not verified");
        return InvarianceStatus::user_asserted;
    }
    try {
        if (invariance_certificate(F, rho).holds) return InvarianceStatus::certified;
    } catch (const std::domain_error&) {
        diagnostics.push_back("invariance certificate unavailable: divergent tail at rho");
    }
    const auto sampled = sample_boundary_invariance(F, rho, opts.boundary_samples, opts.seed);
    if (sampled.violations == 0) {
        diagnostics.push_back("invariance supported by boundary sampling only (not proved)");
        return InvarianceStatus::sampled_only;
    }
    diagnostics.push_back("boundary sampling found outward-pointing samples");
    return InvarianceStatus::failed;
}

inline bool invariance_acceptable(InvarianceStatus s) {
    return s == InvarianceStatus::certified || s == InvarianceStatus::user_asserted;
}

}  // namespace detail

/// Theorem-1 certificate for a polynomial field on D^n(mu), mu > rho required.
inline StabilityCertificate certify_polynomial(const TaylorVectorField& F, double requested_rho,
                                               const CertifyOptions& opts = {}) {
    if (!(requested_rho > 0.0))
        throw std::invalid_argument("certify_polynomial: requested rho must be positive");
    if (!(F.mu() > requested_rho))
        throw std::invalid_argument("certify_polynomial: domain radius mu must exceed requested rho");

    StabilityCertificate cert;
    cert.theorem = 1;
    cert.requested_rho = requested_rho;
    cert.assumptions = check_assumptions(F);
    if (!cert.assumptions.jacobian_diagonal || !cert.assumptions.hyperbolic) {
        cert.diagnostics.insert(cert.diagnostics.end(), cert.assumptions.notes.begin(),
                                cert.assumptions.notes.end());
        return cert;
    }
    cert.polynomial = polynomial_quantities(F);
    cert.invariance_status = detail::resolve_invariance(F, requested_rho, opts, cert.diagnostics);
    cert.certified = requested_rho < cert.polynomial->rho_sup &&
                     detail::invariance_acceptable(cert.invariance_status);
    return cert;
}

/// Enclosure of L_mu = sum_l sum_k mu^{|alpha(k)|} |a_{l,k}|: the lower bound
/// sums the stored coefficients, the upper bound adds the envelope tail
/// sum_l C_l sum_{m>N} binomial(m+n-1, n-1) (mu r_l)^m in closed form.
inline LmuEnclosure compute_L_mu(const TaylorVectorField& F, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("compute_L_mu: mu must be positive");
    LmuEnclosure enc;
    for (int l = 1; l <= F.dimension(); ++l)
        for (const auto& [alpha, value] : F.component(l))
            enc.lower += std::pow(mu, alpha.degree()) * std::abs(value);
    enc.upper = enc.lower;
    if (F.kind() == FieldKind::analytic) {
        for (int l = 1; l <= F.dimension(); ++l) {
            const auto& env = F.tail_envelope()[static_cast<std::size_t>(l - 1)];
            if (env.C <= 0.0) continue;
            if (mu * env.r >= 1.0)
                throw std::domain_error("compute_L_mu: divergent tail at this mu");
            enc.upper += env.C * detail::block_tail_sum(F.dimension(), F.truncation_degree(), mu * env.r);
        }
    }
    return enc;
}

/// Theorem-2 certificate: rho_sup = mu R / L_mu, with the conservative
/// (largest) L_mu among the computed upper bound and any externally claimed
/// reference value.
inline StabilityCertificate certify_analytic(const TaylorVectorField& F, double mu,
                                             double requested_rho, const CertifyOptions& opts = {}) {
    if (!(requested_rho > 0.0))
        throw std::invalid_argument("certify_analytic: requested rho must be positive");
    if (!(mu > 0.0) || mu > F.mu() * (1.0 + 1e-12))
        throw std::invalid_argument("certify_analytic: mu outside the declared domain polydisc");

    StabilityCertificate cert;
    cert.theorem = 2;
    cert.requested_rho = requested_rho;
    cert.assumptions = check_assumptions(F);
    if (!cert.assumptions.jacobian_diagonal || !cert.assumptions.hyperbolic) {
        cert.diagnostics.insert(cert.diagnostics.end(), cert.assumptions.notes.begin(),
                                cert.assumptions.notes.end());
        return cert;
    }

    AnalyticCriterion crit;
    crit.mu = mu;
    crit.L_mu = compute_L_mu(F, mu);
    crit.reference_L_mu = opts.reference_L_mu;
    crit.L_mu_used = crit.L_mu.upper;
    if (crit.reference_L_mu && *crit.reference_L_mu > crit.L_mu_used) {
        crit.L_mu_used = *crit.reference_L_mu;
    }
    if (crit.reference_L_mu &&
        std::abs(*crit.reference_L_mu - crit.L_mu.upper) >
            1e-6 * std::max(1.0, crit.L_mu.upper)) {
        cert.diagnostics.push_back(
            "reference L_mu disagrees with the computed enclosure; certifying with the larger value");
    }
    crit.R = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= F.dimension(); ++l)
        crit.R = std::min(crit.R,
                          std::abs(F.coefficient(l, unit_multiindex(F.dimension(), l)).real()));
    crit.rho_sup = mu * crit.R / crit.L_mu_used;
    cert.analytic = crit;

    cert.invariance_status = detail::resolve_invariance(F, requested_rho, opts, cert.diagnostics);
    cert.certified = requested_rho < crit.rho_sup &&
                     detail::invariance_acceptable(cert.invariance_status);
    return cert;
}

/// Diagonal dominance conditions for an upper-triangular Hurwitz Jacobian:
/// |a_qr|^2 < (1/D^2)|Re a_qq||Re a_rr| and |a_qr| < (1/D)|Re a_qq| for all
/// q < r, with D the number of nonzero strictly-upper entries. Informational
/// (the main pipeline requires a diagonal Jacobian).
struct DominancePair {
    int q = 0, r = 0;  // 1-based
    double coupling = 0.0;
    double quadratic_margin = 0.0;
    double linear_margin = 0.0;
    bool ok = true;
};

struct DominanceResult {
    bool ok = true;
    int nonzero_upper = 0;
    std::vector<DominancePair> pairs;
};

inline DominanceResult diagonal_dominance_check(const Eigen::MatrixXcd& J) {
    const int n = static_cast<int>(J.rows());
    if (J.cols() != n) throw std::invalid_argument("diagonal_dominance_check: matrix not square");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            if (J(i, j) != Complex(0.0, 0.0))
                throw std::invalid_argument("diagonal_dominance_check: matrix not upper triangular");
    for (int i = 0; i < n; ++i)
        if (!(J(i, i).real() < 0.0))
            throw std::invalid_argument("diagonal_dominance_check: diagonal not Hurwitz");

    DominanceResult result;
    for (int q = 0; q < n; ++q)
        for (int r = q + 1; r < n; ++r)
            if (J(q, r) != Complex(0.0, 0.0)) ++result.nonzero_upper;
    if (result.nonzero_upper == 0) return result;  // vacuous

    const double D = result.nonzero_upper;
    for (int q = 0; q < n; ++q) {
        for (int r = q + 1; r < n; ++r) {
            DominancePair pair;
            pair.q = q + 1;
            pair.r = r + 1;
            pair.coupling = std::abs(J(q, r));
            const double re_q = std::abs(J(q, q).real());
            const double re_r = std::abs(J(r, r).real());
            pair.quadratic_margin = re_q * re_r / (D * D) - pair.coupling * pair.coupling;
            pair.linear_margin = re_q / D - pair.coupling;
            pair.ok = pair.quadratic_margin > 0.0 && pair.linear_margin > 0.0;
            if (!pair.ok) result.ok = false;
            result.pairs.push_back(pair);
        }
    }
    return result;
}

}  // namespace polystab
