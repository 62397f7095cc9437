// Command-line front end: certify / lyapunov / validate / simulate over the
// JSON problem-spec schema. Exit codes: 0 success (certified / clean
// validation), 2 criterion not met, 1 input or assumption error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polystab/certify.hpp"
#include "polystab/io.hpp"
#include "polystab/koopman.hpp"
#include "polystab/lyapunov.hpp"
#include "polystab/numerics.hpp"
#include "polystab/vectorfield.hpp"

namespace {

using namespace polystab;

struct CommonArgs {
    std::string spec_path;
    std::string out_path;
    bool quiet = false;
    std::optional<double> rho;
    std::optional<std::uint64_t> seed;
};

struct LoadedProblem {
    ProblemSpec spec;
    TaylorVectorField field;
    std::string input_hash;
};

LoadedProblem load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open spec file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    ProblemSpec spec = parse_problem_spec(text);
    TaylorVectorField field = make_field(spec);
    if (spec.change_of_basis) field = change_coordinates(field, *spec.change_of_basis);
    return LoadedProblem{std::move(spec), std::move(field), "fnv1a64:" + fnv1a64_hex(text)};
}

OrderedJson report_skeleton(const LoadedProblem& problem, std::uint64_t seed) {
    OrderedJson report;
    report["schema_version"] = kSchemaVersion;
    report["tool"]["name"] = kToolName;
    report["tool"]["version"] = kToolVersion;
    report["provenance"]["input_hash"] = problem.input_hash;
    report["provenance"]["seed"] = seed;
    report["assumptions"] = assumption_report_to_json(check_assumptions(problem.field));
    return report;
}

void emit_report(const OrderedJson& report, const CommonArgs& args) {
    const std::string text = report.dump(2) + "\n";
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw SpecError("cannot open output path: " + args.out_path);
        out << text;
    } else if (!args.quiet) {
        std::cout << text;
    }
}

double required_rho(const CommonArgs& args, const ProblemSpec& spec) {
    if (args.rho) return *args.rho;
    if (spec.requested_rho) return *spec.requested_rho;
    throw SpecError("no requested rho: pass --rho or set requested_rho in the spec");
}

WeightScheme scheme_from_options(const SpecOptions& options) {
    WeightScheme scheme;
    scheme.slack = options.slack;
    if (options.scheme == "appendixA")
        scheme.kind = WeightSchemeKind::appendix_a;
    else if (options.scheme == "appendixB")
        scheme.kind = WeightSchemeKind::appendix_b;
    else
        scheme.kind = WeightSchemeKind::automatic;
    return scheme;
}

CertifyOptions certify_options(const LoadedProblem& problem, std::uint64_t seed) {
    CertifyOptions opts;
    opts.boundary_samples = problem.spec.options.samples;
    opts.seed = seed;
    opts.reference_L_mu = problem.spec.options.reference_L_mu;
    return opts;
}

StabilityCertificate run_certificate(const LoadedProblem& problem, const std::string& theorem,
                                     double rho, std::uint64_t seed) {
    const auto opts = certify_options(problem, seed);
    if (theorem == "1" ||
        (theorem == "auto" && problem.field.kind() == FieldKind::polynomial)) {
        if (problem.field.kind() != FieldKind::polynomial)
            throw SpecError("theorem 1 requires a polynomial field");
        return certify_polynomial(problem.field, rho, opts);
    }
    return certify_analytic(problem.field, problem.spec.mu, rho, opts);
}

bool assumptions_ok(const StabilityCertificate& cert) {
    return cert.assumptions.jacobian_diagonal && cert.assumptions.hyperbolic;
}

int cmd_certify(const CommonArgs& args, const std::string& theorem, int window_degree) {
    const LoadedProblem problem = load_problem(args.spec_path);
    const std::uint64_t seed = args.seed.value_or(problem.spec.options.seed);
    const double rho = required_rho(args, problem.spec);

    const StabilityCertificate cert = run_certificate(problem, theorem, rho, seed);
    OrderedJson report = report_skeleton(problem, seed);
    report["certificate"] = certificate_to_json(cert);
    if (window_degree > 0) {
        MonomialIndexMap map(problem.field.dimension());
        const TaylorVectorField unit = rescale_to_unit(problem.field);
        report["generator_window"] = window_to_json(generator_window(unit, map, window_degree));
    }
    emit_report(report, args);
    if (!assumptions_ok(cert)) {
        std::cerr << "error: " << (cert.assumptions.jacobian_diagonal ? "jacobian spectrum not Hurwitz"
                                                                      : "jacobian not diagonal")
                  << "\n";
        return 1;
    }
    return cert.certified ? 0 : 2;
}

int cmd_lyapunov(const CommonArgs& args, const std::string& theorem, int degree) {
    const LoadedProblem problem = load_problem(args.spec_path);
    const std::uint64_t seed = args.seed.value_or(problem.spec.options.seed);
    const double rho = required_rho(args, problem.spec);
    const int truncation = degree > 0 ? degree : problem.spec.options.truncation_degree;

    const StabilityCertificate cert = run_certificate(problem, theorem, rho, seed);
    OrderedJson report = report_skeleton(problem, seed);
    report["certificate"] = certificate_to_json(cert);
    if (!assumptions_ok(cert)) {
        emit_report(report, args);
        std::cerr << "error: assumptions not satisfied\n";
        return 1;
    }
    if (!cert.certified) {
        emit_report(report, args);
        return 2;
    }
    const LyapunovFunction V = build_lyapunov(problem.field, cert, scheme_from_options(problem.spec.options),
                                              truncation, problem.spec.options.slack_delta);
    report["lyapunov"] = lyapunov_to_json(V);
    emit_report(report, args);
    return 0;
}

int cmd_validate(const CommonArgs& args, const std::string& theorem, long samples_override) {
    const LoadedProblem problem = load_problem(args.spec_path);
    const std::uint64_t seed = args.seed.value_or(problem.spec.options.seed);
    const double rho = required_rho(args, problem.spec);

    ValidationConfig cfg;
    cfg.rho = rho;
    cfg.boundary_samples = samples_override > 0 ? samples_override : problem.spec.options.samples;
    cfg.decrease_samples = cfg.boundary_samples;
    cfg.seed = seed;
    cfg.T = problem.spec.options.T;
    cfg.h = problem.spec.options.h;

    OrderedJson report = report_skeleton(problem, seed);

    // The Lyapunov decrease suite only runs when rho certifies end to end.
    std::function<double(const std::vector<Complex>&)> V_eval, V_dot;
    try {
        const StabilityCertificate cert = run_certificate(problem, theorem, rho, seed);
        report["certificate"] = certificate_to_json(cert);
        if (cert.certified) {
            const LyapunovFunction V =
                build_lyapunov(problem.field, cert, scheme_from_options(problem.spec.options),
                               problem.spec.options.truncation_degree, problem.spec.options.slack_delta);
            report["lyapunov"] = lyapunov_to_json(V);
            const TaylorVectorField& field = problem.field;
            V_eval = [V](const std::vector<Complex>& z) { return V.evaluate(z); };
            V_dot = [V, field](const std::vector<Complex>& z) {
                return lyapunov_derivative(V, field, z);
            };
        }
    } catch (const std::exception& e) {
        report["certificate"] = nullptr;
        report["certificate_error"] = e.what();
    }

    const ValidationReport validation = run_validation(problem.field, cfg, V_eval, V_dot);
    report["validation"] = validation_to_json(validation);
    emit_report(report, args);

    const bool clean = validation.invariance.sampled_violations == 0 &&
                       validation.decrease.violations == 0 && validation.convergence.all_converged;
    return clean ? 0 : 2;
}

int cmd_simulate(const CommonArgs& args, const std::vector<double>& z0_flat, double T, double h,
                 long stride, bool with_v, const std::string& theorem) {
    const LoadedProblem problem = load_problem(args.spec_path);
    const int n = problem.field.dimension();
    if (static_cast<int>(z0_flat.size()) != 2 * n)
        throw SpecError("--z0 expects 2n values (re and im per coordinate)");
    if (!(h > 0.0)) throw SpecError("--h must be positive");
    if (!(T > 0.0)) throw SpecError("--T must be positive");

    std::vector<Complex> z0;
    for (int i = 0; i < n; ++i)
        z0.push_back(Complex(z0_flat[static_cast<std::size_t>(2 * i)],
                             z0_flat[static_cast<std::size_t>(2 * i + 1)]));

    std::optional<LyapunovFunction> V;
    if (with_v) {
        const std::uint64_t seed = args.seed.value_or(problem.spec.options.seed);
        const double rho = required_rho(args, problem.spec);
        const StabilityCertificate cert = run_certificate(problem, theorem, rho, seed);
        if (!cert.certified) throw SpecError("--with-v requires a certified rho");
        V = build_lyapunov(problem.field, cert, scheme_from_options(problem.spec.options),
                           problem.spec.options.truncation_degree, problem.spec.options.slack_delta);
    }

    IntegrateOptions opt;
    opt.record_stride = static_cast<std::size_t>(stride);
    Trajectory traj;
    try {
        traj = integrate(problem.field, z0, T, h, opt);
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }

    std::ostringstream csv;
    csv << "t";
    for (int i = 1; i <= n; ++i) csv << ",re_z" << i << ",im_z" << i;
    if (V) csv << ",V";
    csv << "\n";
    char buffer[64];
    const auto emit = [&](double v) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", v);
        csv << buffer;
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        emit(traj.times[i]);
        for (int c = 0; c < n; ++c) {
            csv << ',';
            emit(traj.states[i][static_cast<std::size_t>(c)].real());
            csv << ',';
            emit(traj.states[i][static_cast<std::size_t>(c)].imag());
        }
        if (V) {
            csv << ',';
            emit(V->evaluate(traj.states[i]));
        }
        csv << "\n";
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw SpecError("cannot open output path: " + args.out_path);
        out << csv.str();
    } else if (!args.quiet) {
        std::cout << csv.str();
    }
    if (traj.exited_domain) std::cerr << "warning: trajectory left the domain polydisc\n";
    if (traj.step_rejected) std::cerr << "warning: step rejected by the growth guard\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified global-stability radii and Lyapunov functions from Taylor coefficients"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string theorem = "auto";
    int window_degree = 0;
    int degree = 0;
    long samples = 0;
    std::vector<double> z0_flat;
    double T = 1.0, h = 1e-3;
    long stride = 1;
    bool with_v = false;

    const auto add_common = [&](CLI::App* cmd, bool rho_required) {
        cmd->add_option("spec", args.spec_path, "problem spec JSON file")->required();
        cmd->add_option("--out", args.out_path, "write the report to this path");
        cmd->add_flag("--quiet", args.quiet, "suppress stdout output");
        auto* rho_opt = cmd->add_option_function<double>(
            "--rho", [&](double v) { args.rho = v; }, "requested radius (overrides the spec)");
        rho_opt->check(CLI::PositiveNumber);
        if (rho_required) rho_opt->required(false);
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { args.seed = v; }, "seed (overrides the spec)");
    };

    auto* certify = app.add_subcommand("certify", "compute a stability certificate");
    add_common(certify, false);
    certify->add_option("--theorem", theorem, "1, 2 or auto")
        ->check(CLI::IsMember({"1", "2", "auto"}));
    certify->add_option("--window-degree", window_degree,
                        "include the generator window up to this degree");

    auto* lyapunov = app.add_subcommand("lyapunov", "construct the Lyapunov function");
    add_common(lyapunov, true);
    lyapunov->add_option("--theorem", theorem, "1, 2 or auto")
        ->check(CLI::IsMember({"1", "2", "auto"}));
    lyapunov->add_option("--degree", degree, "truncation degree of V");

    auto* validate = app.add_subcommand("validate", "numerical validation suites");
    add_common(validate, true);
    validate->add_option("--theorem", theorem, "1, 2 or auto")
        ->check(CLI::IsMember({"1", "2", "auto"}));
    validate->add_option("--samples", samples, "samples per boundary face");

    auto* simulate = app.add_subcommand("simulate", "integrate a trajectory to CSV");
    add_common(simulate, false);
    simulate->add_option("--z0", z0_flat, "initial point: re,im per coordinate")->required();
    simulate->add_option("--T", T, "time horizon")->required();
    simulate->add_option("--h", h, "step size");
    simulate->add_option("--stride", stride, "record every k-th step")->check(CLI::PositiveNumber);
    simulate->add_flag("--with-v", with_v, "append a V column (requires a certified rho)");
    simulate->add_option("--theorem", theorem, "1, 2 or auto")
        ->check(CLI::IsMember({"1", "2", "auto"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return cmd_certify(args, theorem, window_degree);
        if (lyapunov->parsed()) return cmd_lyapunov(args, theorem, degree);
        if (validate->parsed()) return cmd_validate(args, theorem, samples);
        if (simulate->parsed()) return cmd_simulate(args, z0_flat, T, h, stride, with_v, theorem);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
