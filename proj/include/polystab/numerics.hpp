#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "polystab/multiindex.hpp"
#include "polystab/sparse_polynomial.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab {

namespace detail {

// Derived stream seeds: splitmix64 finalizer over golden-ratio strides, so
// sample batches are independent and merge order-free.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// std::uniform_real_distribution streams are implementation-defined; this
// 53-bit conversion keeps reports byte-identical across standard libraries.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline Complex uniform_on_circle(std::mt19937_64& gen, double radius) {
    const double theta = 2.0 * std::numbers::pi * uniform01(gen);
    return Complex(radius * std::cos(theta), radius * std::sin(theta));
}

inline Complex uniform_in_disc(std::mt19937_64& gen, double radius) {
    const double r = radius * std::sqrt(uniform01(gen));
    const double theta = 2.0 * std::numbers::pi * uniform01(gen);
    return Complex(r * std::cos(theta), r * std::sin(theta));
}

inline double sup_norm(const std::vector<Complex>& z) {
    double m = 0.0;
    for (const auto& zi : z) m = std::max(m, std::abs(zi));
    return m;
}

inline double euclidean_norm(const std::vector<Complex>& z) {
    double s = 0.0;
    for (const auto& zi : z) s += std::norm(zi);
    return std::sqrt(s);
}

}  // namespace detail

/// Fixed-step classical 4th-order one-step scheme over the 2n real
/// coordinates of z (equivalently, complex RK4).
struct FlowIntegrator {
    double step = 1e-3;
    double max_time = 200.0;
    double growth_guard = 10.0;  // per-step sup-norm growth factor flagged as stiffness
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Complex>> states;
    bool exited_domain = false;
    bool step_rejected = false;  // stiffness flag
};

struct IntegrateOptions {
    std::size_t record_stride = 1;
    double domain_radius = -1.0;  // default: F.mu()
    double growth_guard = 10.0;
};

inline Trajectory integrate(const TaylorVectorField& F, const std::vector<Complex>& z0,
                            double T, double h, const IntegrateOptions& opt = {}) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate: step size must be positive");
    if (!(T >= 0.0)) throw std::invalid_argument("integrate: horizon must be non-negative");
    if (static_cast<int>(z0.size()) != F.dimension())
        throw std::invalid_argument("integrate: initial point dimension mismatch");
    const double radius = opt.domain_radius > 0.0 ? opt.domain_radius : F.mu();
    if (detail::sup_norm(z0) > radius * (1.0 + 1e-12))
        throw std::invalid_argument("integrate: initial point outside the domain polydisc");

    const std::size_t n = z0.size();
    const auto rhs = [&F](const std::vector<Complex>& z) { return F.value_at(z); };

    Trajectory traj;
    std::vector<Complex> z = z0;
    traj.times.push_back(0.0);
    traj.states.push_back(z);

    const auto steps = static_cast<std::size_t>(std::ceil(T / h - 1e-12));
    std::vector<Complex> stage(n), k1, k2, k3, k4;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = static_cast<double>(s) * h;
        const double dt = std::min(h, T - t0);
        k1 = rhs(z);
        for (std::size_t i = 0; i < n; ++i) stage[i] = z[i] + 0.5 * dt * k1[i];
        k2 = rhs(stage);
        for (std::size_t i = 0; i < n; ++i) stage[i] = z[i] + 0.5 * dt * k2[i];
        k3 = rhs(stage);
        for (std::size_t i = 0; i < n; ++i) stage[i] = z[i] + dt * k3[i];
        k4 = rhs(stage);
        std::vector<Complex> z_next(n);
        for (std::size_t i = 0; i < n; ++i)
            z_next[i] = z[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        const double before = detail::sup_norm(z);
        const double after = detail::sup_norm(z_next);
        if (after > opt.growth_guard * std::max(1.0, before)) {
            traj.step_rejected = true;
            break;
        }
        if (after > radius * (1.0 + 1e-9)) {
            traj.exited_domain = true;
            break;
        }
        z = std::move(z_next);
        const bool last = (s + 1 == steps);
        if (last || (s + 1) % opt.record_stride == 0) {
            traj.times.push_back(t0 + dt);
            traj.states.push_back(z);
        }
    }
    return traj;
}

/// Sufficient forward-invariance certificate for D^n(rho): for every l,
///   sum_{alpha != e_l} |a_{l,alpha}| rho^{|alpha|} + tail  <  -Re(a_{l,l}) rho,
/// which forces Re(conj(z_l) F_l(z)) < 0 on the face |z_l| = rho. True implies
/// forward invariance; false is inconclusive.
struct InvarianceCertificate {
    bool holds = false;
    std::vector<double> lhs, rhs, margin;
};

inline InvarianceCertificate invariance_certificate(const TaylorVectorField& F, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("invariance_certificate: rho must be positive");
    const int n = F.dimension();
    InvarianceCertificate cert;
    cert.holds = true;
    for (int l = 1; l <= n; ++l) {
        const MultiIndex self = unit_multiindex(n, l);
        double lhs = 0.0;
        for (const auto& [alpha, value] : F.component(l))
            if (alpha != self) lhs += std::abs(value) * std::pow(rho, alpha.degree());
        if (F.kind() == FieldKind::analytic) {
            const auto& env = F.tail_envelope()[static_cast<std::size_t>(l - 1)];
            if (env.C > 0.0) {
                if (env.r * rho >= 1.0)
                    throw std::domain_error("invariance_certificate: divergent tail at rho");
                lhs += env.C * detail::block_tail_sum(n, F.truncation_degree(), env.r * rho);
            }
        }
        const double rhs = -F.coefficient(l, self).real() * rho;
        cert.lhs.push_back(lhs);
        cert.rhs.push_back(rhs);
        cert.margin.push_back(rhs - lhs);
        if (!(rhs - lhs > 0.0)) cert.holds = false;
    }
    return cert;
}

/// Seeded sampling of the distinguished-boundary faces: z_l on the circle of
/// radius rho, other coordinates uniform in the closed disc. Counts
/// Re(conj(z_l) F_l(z)) >= 0 events. Zero violations is evidence, not proof.
struct BoundarySamplingResult {
    long violations = 0;
    long samples = 0;
    std::vector<long> per_face;
};

inline BoundarySamplingResult sample_boundary_invariance(const TaylorVectorField& F, double rho,
                                                         long samples_per_face,
                                                         std::uint64_t seed) {
    if (!(rho > 0.0) || rho > F.mu() * (1.0 + 1e-12))
        throw std::invalid_argument("sample_boundary_invariance: rho outside the domain polydisc");
    const int n = F.dimension();
    BoundarySamplingResult result;
    result.per_face.assign(static_cast<std::size_t>(n), 0);
    std::vector<Complex> z(static_cast<std::size_t>(n));
    for (int l = 1; l <= n; ++l) {
        std::mt19937_64 gen(detail::mix_seed(seed, static_cast<std::uint64_t>(l)));
        long face_violations = 0;
        for (long s = 0; s < samples_per_face; ++s) {
            for (int i = 1; i <= n; ++i)
                z[static_cast<std::size_t>(i - 1)] = (i == l)
                                                         ? detail::uniform_on_circle(gen, rho)
                                                         : detail::uniform_in_disc(gen, rho);
            const auto value = F.value_at(z);
            const double re = (std::conj(z[static_cast<std::size_t>(l - 1)]) *
                               value[static_cast<std::size_t>(l - 1)])
                                  .real();
            if (re >= 0.0) ++face_violations;
        }
        result.per_face[static_cast<std::size_t>(l - 1)] = face_violations;
        result.violations += face_violations;
        result.samples += samples_per_face;
    }
    return result;
}

/// |(f(phi^dt(z)) - f(z))/dt - (F . grad f)(z)| for a polynomial observable f.
/// phi^dt is resolved by RK4 substeps, so the O(dt) difference error dominates.
inline double generator_fd_check(const TaylorVectorField& F, const SparsePolynomial& observable,
                                 const std::vector<Complex>& z, double dt, int substeps = 8) {
    if (!(dt > 0.0)) throw std::invalid_argument("generator_fd_check: dt must be positive");
    const int n = F.dimension();
    if (observable.dimension() != n || static_cast<int>(z.size()) != n)
        throw std::invalid_argument("generator_fd_check: dimension mismatch");

    const auto field = F.value_at(z);
    Complex exact(0.0, 0.0);
    for (const auto& [alpha, c] : observable.terms()) {
        for (int l = 1; l <= n; ++l) {
            const int power = alpha[l - 1];
            if (power == 0) continue;
            Complex m(static_cast<double>(power), 0.0);
            for (int i = 0; i < n; ++i) {
                const int e = alpha[i] - (i == l - 1 ? 1 : 0);
                for (int p = 0; p < e; ++p) m *= z[static_cast<std::size_t>(i)];
            }
            exact += c * m * field[static_cast<std::size_t>(l - 1)];
        }
    }

    IntegrateOptions opt;
    opt.record_stride = static_cast<std::size_t>(substeps) + 1;  // endpoints only
    opt.domain_radius = F.mu() * 2.0 + 1.0;                      // no artificial clipping
    const Trajectory traj = integrate(F, z, dt, dt / substeps, opt);
    const auto& advanced = traj.states.back();
    const Complex fd = (observable.evaluate(advanced) - observable.evaluate(z)) / dt;
    return std::abs(fd - exact);
}

/// Integrates random initial conditions inside D^n(rho) and reports the
/// worst final sup-norm; optionally checks a supplied Lyapunov evaluation for
/// monotone decay along checkpoints.
struct SweepResult {
    long trajectories = 0;
    bool all_converged = false;
    double max_final_norm = 0.0;
    bool lyapunov_monotone = true;
    long monotonicity_checks = 0;
};

inline SweepResult convergence_sweep(
    const TaylorVectorField& F, double rho, long trials, double T, std::uint64_t seed,
    double h = 1e-3, const std::function<double(const std::vector<Complex>&)>& V = {},
    double convergence_threshold = 1e-6) {
    if (!(rho > 0.0) || rho > F.mu() * (1.0 + 1e-12))
        throw std::invalid_argument("convergence_sweep: rho outside the domain polydisc");
    SweepResult result;
    result.trajectories = trials;
    result.all_converged = true;
    const int n = F.dimension();
    for (long trial = 0; trial < trials; ++trial) {
        std::mt19937_64 gen(detail::mix_seed(seed, 1000 + static_cast<std::uint64_t>(trial)));
        std::vector<Complex> z0(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) z0[static_cast<std::size_t>(i)] = detail::uniform_in_disc(gen, rho);

        IntegrateOptions opt;
        const auto steps = static_cast<std::size_t>(std::ceil(T / h));
        opt.record_stride = std::max<std::size_t>(1, steps / 256);
        const Trajectory traj = integrate(F, z0, T, h, opt);
        const double final_norm = detail::sup_norm(traj.states.back());
        result.max_final_norm = std::max(result.max_final_norm, final_norm);
        if (!(final_norm < convergence_threshold) || traj.exited_domain || traj.step_rejected)
            result.all_converged = false;
        if (V) {
            double previous = V(traj.states.front());
            for (std::size_t i = 1; i < traj.states.size(); ++i) {
                const double current = V(traj.states[i]);
                ++result.monotonicity_checks;
                if (current > previous + 1e-9 * (1.0 + std::abs(previous)))
                    result.lyapunov_monotone = false;
                previous = current;
            }
        }
    }
    return result;
}

struct ValidationConfig {
    double rho = 1.0;
    long boundary_samples = 10000;  // per face
    long decrease_samples = 10000;
    long trials = 100;
    double T = 200.0;
    double h = 1e-3;
    std::uint64_t seed = 42;
    double decrease_exclusion = 1e-6;
    double convergence_threshold = 1e-6;
    double fd_dt = 1e-3;
    int fd_observable_degree = 3;
};

/// Deterministic given seed and configuration.
struct ValidationReport {
    struct Invariance {
        bool certificate = false;
        long sampled_violations = 0;
        long samples = 0;
    } invariance;
    struct Decrease {
        long violations = 0;
        double min_margin = 0.0;
        long samples = 0;
    } decrease;
    struct Convergence {
        long trajectories = 0;
        bool all_converged = false;
        double max_final_norm = 0.0;
    } convergence;
    struct GeneratorCheck {
        double max_error = 0.0;
        double order_ratio = 0.0;
    } generator_check;
    std::uint64_t seed = 0;
};

inline ValidationReport run_validation(
    const TaylorVectorField& F, const ValidationConfig& cfg,
    const std::function<double(const std::vector<Complex>&)>& V = {},
    const std::function<double(const std::vector<Complex>&)>& V_dot = {}) {
    ValidationReport report;
    report.seed = cfg.seed;
    const int n = F.dimension();

    try {
        report.invariance.certificate = invariance_certificate(F, cfg.rho).holds;
    } catch (const std::domain_error&) {
        report.invariance.certificate = false;
    }
    const auto sampling = sample_boundary_invariance(F, cfg.rho, cfg.boundary_samples, cfg.seed);
    report.invariance.sampled_violations = sampling.violations;
    report.invariance.samples = sampling.samples;

    if (V_dot) {
        std::mt19937_64 gen(detail::mix_seed(cfg.seed, 7777));
        const double radius = cfg.rho * 0.999;
        double min_margin = std::numeric_limits<double>::infinity();
        long violations = 0;
        std::vector<Complex> z(static_cast<std::size_t>(n));
        for (long s = 0; s < cfg.decrease_samples; ++s) {
            do {
                for (int i = 0; i < n; ++i)
                    z[static_cast<std::size_t>(i)] = detail::uniform_in_disc(gen, radius);
            } while (detail::euclidean_norm(z) <= cfg.decrease_exclusion);
            const double dv = V_dot(z);
            if (dv >= 0.0) ++violations;
            min_margin = std::min(min_margin, -dv);
        }
        report.decrease.violations = violations;
        report.decrease.min_margin = std::isfinite(min_margin) ? min_margin : 0.0;
        report.decrease.samples = cfg.decrease_samples;
    }

    const auto sweep =
        convergence_sweep(F, cfg.rho, cfg.trials, cfg.T, cfg.seed, cfg.h, V, cfg.convergence_threshold);
    report.convergence.trajectories = sweep.trajectories;
    report.convergence.all_converged = sweep.all_converged;
    report.convergence.max_final_norm = sweep.max_final_norm;

    {
        // Monomial observables up to a fixed degree at a deterministic
        // interior point of moderate modulus.
        MonomialIndexMap map(n);
        const std::size_t count = map.ensure_degree(cfg.fd_observable_degree);
        std::vector<Complex> z(static_cast<std::size_t>(n));
        const double radius = 0.3 * std::min(1.0, cfg.rho);
        for (int i = 0; i < n; ++i) {
            const double theta = 0.739 + 1.131 * static_cast<double>(i + 1);
            z[static_cast<std::size_t>(i)] = Complex(radius * std::cos(theta), radius * std::sin(theta));
        }
        double err_full = 0.0, err_half = 0.0;
        for (std::size_t k = 1; k < count; ++k) {
            const auto f = SparsePolynomial::monomial(map.index_to_alpha(k));
            err_full = std::max(err_full, generator_fd_check(F, f, z, cfg.fd_dt));
            err_half = std::max(err_half, generator_fd_check(F, f, z, cfg.fd_dt / 2.0));
        }
        report.generator_check.max_error = err_full;
        report.generator_check.order_ratio = err_half > 0.0 ? err_full / err_half : 0.0;
    }
    return report;
}

}  // namespace polystab
