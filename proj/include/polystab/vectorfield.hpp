#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "polystab/multiindex.hpp"
#include "polystab/sparse_polynomial.hpp"

namespace polystab {

enum class FieldKind { polynomial, analytic };

/// Geometric coefficient envelope: |a_{l,alpha}| <= C * r^{|alpha|} for every
/// |alpha| > truncation_degree of the field.
struct TailEnvelope {
    double C = 0.0;
    double r = 0.0;
};

struct CoefficientEntry {
    int component = 1;  // l, 1-based
    MultiIndex alpha;
    Complex value;
};

namespace detail {

/// Upper bound for sum_{m > N} binomial(m+n-1, n-1) t^m, requires 0 <= t < 1.
/// Terms are accumulated directly; once the term ratio q = t(m+n)/(m+1) drops
/// below 1 the geometric majorant term*q/(1-q) closes the sum rigorously.
inline double block_tail_sum(int n, int N, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) throw std::domain_error("block_tail_sum: divergent tail (ratio >= 1)");
    int m = N + 1;
    double term = static_cast<double>(MonomialIndexMap::block_size(m, n)) * std::pow(t, m);
    double sum = 0.0;
    while (true) {
        sum += term;
        const double q = t * (m + n) / (m + 1.0);
        if (q < 1.0) {
            const double rest = term * q / (1.0 - q);
            if (rest <= 1e-18 * sum + 1e-300) return sum + rest;
        }
        term *= q;
        ++m;
    }
}

}  // namespace detail

/// Taylor coefficient table of a vector field F on the polydisc D^n(mu) with
/// F(0) = 0: F_l(z) = sum_{|alpha| >= 1} a_{l,alpha} z^alpha. Analytic fields
/// carry a finite table up to truncation_degree plus an optional per-component
/// TailEnvelope. Immutable after construction.
class TaylorVectorField {
public:
    using TermMap = std::map<MultiIndex, Complex, GradedLess>;

    TaylorVectorField(int dimension, double mu, FieldKind kind,
                      const std::vector<CoefficientEntry>& entries,
                      int truncation_degree = -1,
                      std::vector<TailEnvelope> tail = {})
        : n_(dimension), mu_(mu), kind_(kind), components_(static_cast<std::size_t>(dimension)) {
        if (dimension < 1) throw std::invalid_argument("TaylorVectorField: dimension must be positive");
        if (!(mu > 0.0)) throw std::invalid_argument("TaylorVectorField: domain radius mu must be positive");
        int max_degree = 0;
        for (const auto& e : entries) {
            if (e.component < 1 || e.component > n_)
                throw std::invalid_argument("TaylorVectorField: component index out of range");
            if (e.alpha.dimension() != n_)
                throw std::invalid_argument("TaylorVectorField: coefficient multi-index dimension mismatch");
            if (e.alpha.degree() < 1)
                throw std::invalid_argument("TaylorVectorField: degree-0 coefficient (F(0) = 0 is required)");
            auto& comp = components_[static_cast<std::size_t>(e.component - 1)];
            auto [it, inserted] = comp.emplace(e.alpha, e.value);
            if (!inserted) it->second += e.value;
            if (it->second == Complex(0.0, 0.0))
                comp.erase(it);
        }
        for (const auto& comp : components_)
            if (!comp.empty()) max_degree = std::max(max_degree, comp.rbegin()->first.degree());
        if (truncation_degree < 0) truncation_degree = max_degree;
        if (truncation_degree < max_degree)
            throw std::invalid_argument("TaylorVectorField: truncation degree below stored coefficients");
        truncation_ = truncation_degree;

        if (kind_ == FieldKind::polynomial) {
            for (const auto& env : tail)
                if (env.C != 0.0)
                    throw std::invalid_argument("TaylorVectorField: polynomial kind cannot carry a tail envelope");
        } else {
            if (!tail.empty() && static_cast<int>(tail.size()) != n_)
                throw std::invalid_argument("TaylorVectorField: tail envelope must list every component");
            if (tail.empty()) tail.assign(static_cast<std::size_t>(n_), TailEnvelope{});
            for (const auto& env : tail)
                if (env.C < 0.0 || env.r < 0.0)
                    throw std::invalid_argument("TaylorVectorField: tail envelope entries must be non-negative");
            tail_ = std::move(tail);
        }
    }

    int dimension() const { return n_; }
    double mu() const { return mu_; }
    FieldKind kind() const { return kind_; }
    int truncation_degree() const { return truncation_; }

    /// Empty for polynomial kind, size n for analytic kind.
    const std::vector<TailEnvelope>& tail_envelope() const { return tail_; }

    /// Coefficient table of component l (1-based), in graded order.
    const TermMap& component(int l) const {
        check_component(l);
        return components_[static_cast<std::size_t>(l - 1)];
    }

    Complex coefficient(int l, const MultiIndex& alpha) const {
        check_component(l);
        const auto& comp = components_[static_cast<std::size_t>(l - 1)];
        auto it = comp.find(alpha);
        return it == comp.end() ? Complex(0.0, 0.0) : it->second;
    }

    std::size_t term_count() const {
        std::size_t c = 0;
        for (const auto& comp : components_) c += comp.size();
        return c;
    }

    std::vector<CoefficientEntry> entries() const {
        std::vector<CoefficientEntry> out;
        for (int l = 1; l <= n_; ++l)
            for (const auto& [alpha, value] : component(l)) out.push_back({l, alpha, value});
        return out;
    }

    Eigen::MatrixXcd jacobian_at_origin() const {
        Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(n_, n_);
        for (int l = 1; l <= n_; ++l)
            for (const auto& [alpha, value] : component(l))
                if (alpha.degree() == 1)
                    for (int i = 0; i < n_; ++i)
                        if (alpha[i] == 1) J(l - 1, i) = value;
        return J;
    }

    /// Same table on a polydisc of different declared radius.
    TaylorVectorField with_domain_radius(double new_mu) const {
        TaylorVectorField copy(*this);
        if (!(new_mu > 0.0))
            throw std::invalid_argument("with_domain_radius: radius must be positive");
        copy.mu_ = new_mu;
        return copy;
    }

    /// Truncated series value with no domain check and no tail accounting;
    /// fast path for integrators and samplers that manage the domain
    /// themselves.
    std::vector<Complex> value_at(const std::vector<Complex>& z) const {
        std::vector<Complex> out(static_cast<std::size_t>(n_), Complex(0.0, 0.0));
        for (int l = 1; l <= n_; ++l) {
            Complex sum(0.0, 0.0);
            for (const auto& [alpha, c] : components_[static_cast<std::size_t>(l - 1)]) {
                Complex m(1.0, 0.0);
                for (int i = 0; i < n_; ++i)
                    for (int p = 0; p < alpha[i]; ++p) m *= z[static_cast<std::size_t>(i)];
                sum += c * m;
            }
            out[static_cast<std::size_t>(l - 1)] = sum;
        }
        return out;
    }

    struct Evaluation {
        std::vector<Complex> value;
        std::vector<double> tail_bound;  // zero for polynomial kind
    };

    /// Evaluates the stored series at z (|z_l| <= mu required). For analytic
    /// kind, tail_bound[l-1] bounds the dropped remainder
    /// sum_{|alpha| > N} C_l (r_l max|z_i|)^{|alpha|} over whole degree blocks.
    Evaluation evaluate(const std::vector<Complex>& z) const {
        if (static_cast<int>(z.size()) != n_)
            throw std::invalid_argument("evaluate: point dimension mismatch");
        double zmax = 0.0;
        for (const auto& zi : z) {
            const double a = std::abs(zi);
            if (a > mu_ * (1.0 + 1e-12))
                throw std::domain_error("evaluate: point outside the closed domain polydisc");
            zmax = std::max(zmax, a);
        }
        Evaluation out;
        out.value = value_at(z);
        out.tail_bound.assign(static_cast<std::size_t>(n_), 0.0);
        for (int l = 1; l <= n_; ++l) {
            if (kind_ == FieldKind::analytic && tail_[static_cast<std::size_t>(l - 1)].C > 0.0) {
                const double t = tail_[static_cast<std::size_t>(l - 1)].r * zmax;
                if (t >= 1.0)
                    throw std::domain_error("evaluate: divergent tail bound at this point");
                out.tail_bound[static_cast<std::size_t>(l - 1)] =
                    tail_[static_cast<std::size_t>(l - 1)].C * detail::block_tail_sum(n_, truncation_, t);
            }
        }
        return out;
    }

private:
    void check_component(int l) const {
        if (l < 1 || l > n_) throw std::invalid_argument("component index out of range");
    }

    int n_;
    double mu_;
    FieldKind kind_;
    int truncation_ = 0;
    std::vector<TermMap> components_;
    std::vector<TailEnvelope> tail_;
};

struct AssumptionReport {
    bool equilibrium_at_origin = true;
    bool jacobian_diagonal = false;
    bool hyperbolic = false;
    std::vector<Complex> eigenvalues;
    std::vector<std::string> notes;
};

inline AssumptionReport check_assumptions(const TaylorVectorField& F) {
    AssumptionReport report;
    const int n = F.dimension();
    report.jacobian_diagonal = true;
    for (int l = 1; l <= n && report.jacobian_diagonal; ++l)
        for (const auto& [alpha, value] : F.component(l))
            if (alpha.degree() == 1 && alpha != unit_multiindex(n, l)) {
                report.jacobian_diagonal = false;
                break;
            }
    if (report.jacobian_diagonal) {
        for (int l = 1; l <= n; ++l)
            report.eigenvalues.push_back(F.coefficient(l, unit_multiindex(n, l)));
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(F.jacobian_at_origin(), false);
        for (int i = 0; i < n; ++i) report.eigenvalues.push_back(solver.eigenvalues()(i));
        std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
                  [](const Complex& a, const Complex& b) {
                      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
                  });
        report.notes.push_back("jacobian not diagonal");
    }
    report.hyperbolic = true;
    for (const auto& ev : report.eigenvalues)
        if (!(ev.real() < 0.0)) report.hyperbolic = false;
    if (!report.hyperbolic)
        report.notes.push_back("jacobian spectrum not strictly in the open left half-plane");
    report.notes.push_back("equilibrium uniqueness on the domain polydisc asserted by user, not verified");
    return report;
}

inline SparsePolynomial component_polynomial(const TaylorVectorField& F, int l) {
    SparsePolynomial p(F.dimension());
    for (const auto& [alpha, value] : F.component(l)) p.add_term(alpha, value);
    return p;
}

/// Coefficient table of z_hat -> P^{-1} F(P z_hat), exact re-expansion for
/// finite tables. Analytic fields with a nonzero tail envelope are rejected
/// (tails do not compose).
inline TaylorVectorField change_coordinates(const TaylorVectorField& F, const Eigen::MatrixXcd& P) {
    const int n = F.dimension();
    if (P.rows() != n || P.cols() != n)
        throw std::invalid_argument("change_coordinates: matrix size mismatch");
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(P);
    if (!lu.isInvertible())
        throw std::invalid_argument("change_coordinates: singular change of basis");
    for (const auto& env : F.tail_envelope())
        if (env.C > 0.0)
            throw std::invalid_argument("change_coordinates: analytic tail envelopes do not compose");
    const Eigen::MatrixXcd Pinv = lu.inverse();

    std::vector<SparsePolynomial> linear_forms;
    for (int i = 0; i < n; ++i) {
        SparsePolynomial form(n);
        for (int j = 0; j < n; ++j)
            if (P(i, j) != Complex(0.0, 0.0)) form.add_term(unit_multiindex(n, j + 1), P(i, j));
        linear_forms.push_back(std::move(form));
    }

    // G_i(z_hat) = F_i(P z_hat)
    std::vector<SparsePolynomial> composed;
    for (int i = 1; i <= n; ++i) {
        SparsePolynomial g(n);
        for (const auto& [alpha, c] : F.component(i)) {
            SparsePolynomial term = SparsePolynomial::constant(n, c);
            for (int j = 0; j < n; ++j)
                if (alpha[j] > 0) term = term * linear_forms[static_cast<std::size_t>(j)].pow(alpha[j]);
            g += term;
        }
        composed.push_back(std::move(g));
    }

    std::vector<CoefficientEntry> entries;
    for (int l = 1; l <= n; ++l) {
        SparsePolynomial fl(n);
        for (int i = 0; i < n; ++i) {
            if (Pinv(l - 1, i) == Complex(0.0, 0.0)) continue;
            SparsePolynomial scaled = composed[static_cast<std::size_t>(i)];
            scaled *= Pinv(l - 1, i);
            fl += scaled;
        }
        for (const auto& [alpha, c] : fl.terms()) entries.push_back({l, alpha, c});
    }
    return TaylorVectorField(n, F.mu(), F.kind(), entries, F.truncation_degree(),
                             F.tail_envelope());
}

/// Rescaled dynamics on the unit polydisc: a'_{l,alpha} = mu^{|alpha|-1} a_{l,alpha}.
/// The tail envelope transports as C' = C/mu, r' = mu r.
inline TaylorVectorField rescale_to_unit(const TaylorVectorField& F) {
    const double mu = F.mu();
    std::vector<CoefficientEntry> entries;
    for (int l = 1; l <= F.dimension(); ++l)
        for (const auto& [alpha, value] : F.component(l))
            entries.push_back({l, alpha, value * std::pow(mu, alpha.degree() - 1)});
    std::vector<TailEnvelope> tail;
    for (const auto& env : F.tail_envelope()) tail.push_back({env.C / mu, env.r * mu});
    return TaylorVectorField(F.dimension(), 1.0, F.kind(), entries, F.truncation_degree(),
                             std::move(tail));
}

}  // namespace polystab
