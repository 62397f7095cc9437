#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polystab/certify.hpp"
#include "polystab/koopman.hpp"
#include "polystab/lyapunov.hpp"
#include "polystab/numerics.hpp"
#include "polystab/vectorfield.hpp"

namespace polystab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "polystab";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Schema violation with a field path for diagnostics.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecOptions {
    std::string scheme = "auto";  // "auto" | "appendixA" | "appendixB"
    double slack = 0.99;
    double slack_delta = 1e-6;
    int truncation_degree = 12;
    std::uint64_t seed = 42;
    long samples = 10000;
    double T = 200.0;
    double h = 1e-3;
    std::optional<double> reference_L_mu;
};

struct ProblemSpec {
    int schema_version = kSchemaVersion;
    int n = 1;
    double mu = 1.0;
    FieldKind kind = FieldKind::polynomial;
    std::vector<CoefficientEntry> coefficients;
    std::vector<TailEnvelope> tail;  // empty, or one entry per component
    std::optional<Eigen::MatrixXcd> change_of_basis;
    std::optional<double> requested_rho;
    SpecOptions options;
};

namespace detail {

[[noreturn]] inline void spec_fail(const std::string& path, const std::string& what) {
    throw SpecError("problem spec: " + path + ": " + what);
}

inline void reject_unknown(const Json& obj, const std::string& path,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) spec_fail(path + "." + key, "unknown field");
    }
}

/// Accepts a JSON number or an exact decimal string such as "-0.00125".
inline double parse_real(const Json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double value = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            spec_fail(path, "not a decimal number: '" + s + "'");
        return value;
    }
    spec_fail(path, "expected a number or a decimal string");
}

inline double require_real(const Json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) spec_fail(path + "." + key, "missing field");
    return parse_real(obj.at(key), path + "." + key);
}

inline long require_integer(const Json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) spec_fail(path + "." + key, "missing field");
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) spec_fail(path + "." + key, "expected an integer");
    return v.get<long>();
}

inline Complex parse_complex_pair(const Json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) spec_fail(path, "expected a [re, im] pair");
    return Complex(parse_real(v[0], path + "[0]"), parse_real(v[1], path + "[1]"));
}

}  // namespace detail

inline ProblemSpec parse_problem_spec(const Json& j) {
    if (!j.is_object()) detail::spec_fail("$", "expected a JSON object");
    detail::reject_unknown(j, "$",
                           {"schema_version", "n", "mu", "kind", "coefficients", "tail_envelope",
                            "change_of_basis", "requested_rho", "options"});
    ProblemSpec spec;

    spec.schema_version = static_cast<int>(detail::require_integer(j, "schema_version", "$"));
    if (spec.schema_version != kSchemaVersion)
        detail::spec_fail("$.schema_version", "unsupported schema version");
    spec.n = static_cast<int>(detail::require_integer(j, "n", "$"));
    if (spec.n < 1) detail::spec_fail("$.n", "dimension must be positive");
    spec.mu = detail::require_real(j, "mu", "$");
    if (!(spec.mu > 0.0)) detail::spec_fail("$.mu", "domain radius must be positive");

    if (!j.contains("kind")) detail::spec_fail("$.kind", "missing field");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "polynomial")
        spec.kind = FieldKind::polynomial;
    else if (kind == "analytic")
        spec.kind = FieldKind::analytic;
    else
        detail::spec_fail("$.kind", "expected 'polynomial' or 'analytic'");

    if (!j.contains("coefficients") || !j.at("coefficients").is_array())
        detail::spec_fail("$.coefficients", "missing or not an array");
    int row = 0;
    for (const Json& c : j.at("coefficients")) {
        const std::string path = "$.coefficients[" + std::to_string(row++) + "]";
        if (!c.is_object()) detail::spec_fail(path, "expected an object");
        detail::reject_unknown(c, path, {"component", "alpha", "re", "im"});
        CoefficientEntry entry;
        entry.component = static_cast<int>(detail::require_integer(c, "component", path));
        if (entry.component < 1 || entry.component > spec.n)
            detail::spec_fail(path + ".component", "component out of range");
        if (!c.contains("alpha") || !c.at("alpha").is_array())
            detail::spec_fail(path + ".alpha", "missing or not an array");
        std::vector<int> e;
        for (const Json& v : c.at("alpha")) {
            if (!v.is_number_integer() || v.get<long>() < 0)
                detail::spec_fail(path + ".alpha", "exponents must be non-negative integers");
            e.push_back(static_cast<int>(v.get<long>()));
        }
        if (static_cast<int>(e.size()) != spec.n)
            detail::spec_fail(path + ".alpha", "exponent vector length must equal n");
        entry.alpha = MultiIndex(std::move(e));
        if (entry.alpha.degree() < 1)
            detail::spec_fail(path + ".alpha", "total degree must be >= 1 (F(0) = 0)");
        const double re = detail::require_real(c, "re", path);
        const double im = c.contains("im") ? detail::parse_real(c.at("im"), path + ".im") : 0.0;
        entry.value = Complex(re, im);
        spec.coefficients.push_back(std::move(entry));
    }

    if (j.contains("tail_envelope")) {
        if (spec.kind != FieldKind::analytic)
            detail::spec_fail("$.tail_envelope", "only analytic fields carry a tail envelope");
        if (!j.at("tail_envelope").is_array())
            detail::spec_fail("$.tail_envelope", "expected an array");
        spec.tail.assign(static_cast<std::size_t>(spec.n), TailEnvelope{});
        int idx = 0;
        for (const Json& t : j.at("tail_envelope")) {
            const std::string path = "$.tail_envelope[" + std::to_string(idx++) + "]";
            if (!t.is_object()) detail::spec_fail(path, "expected an object");
            detail::reject_unknown(t, path, {"component", "C", "r"});
            const int component = static_cast<int>(detail::require_integer(t, "component", path));
            if (component < 1 || component > spec.n)
                detail::spec_fail(path + ".component", "component out of range");
            TailEnvelope env;
            env.C = detail::require_real(t, "C", path);
            env.r = detail::require_real(t, "r", path);
            if (env.C < 0.0 || env.r < 0.0)
                detail::spec_fail(path, "envelope parameters must be non-negative");
            spec.tail[static_cast<std::size_t>(component - 1)] = env;
        }
    }

    if (j.contains("change_of_basis")) {
        const Json& p = j.at("change_of_basis");
        if (!p.is_array() || static_cast<int>(p.size()) != spec.n)
            detail::spec_fail("$.change_of_basis", "expected n rows");
        Eigen::MatrixXcd P(spec.n, spec.n);
        for (int r = 0; r < spec.n; ++r) {
            const Json& prow = p[static_cast<std::size_t>(r)];
            const std::string path = "$.change_of_basis[" + std::to_string(r) + "]";
            if (!prow.is_array() || static_cast<int>(prow.size()) != spec.n)
                detail::spec_fail(path, "expected n entries per row");
            for (int cidx = 0; cidx < spec.n; ++cidx)
                P(r, cidx) = detail::parse_complex_pair(prow[static_cast<std::size_t>(cidx)],
                                                        path + "[" + std::to_string(cidx) + "]");
        }
        spec.change_of_basis = P;
    }

    if (j.contains("requested_rho")) {
        spec.requested_rho = detail::parse_real(j.at("requested_rho"), "$.requested_rho");
        if (!(*spec.requested_rho > 0.0))
            detail::spec_fail("$.requested_rho", "must be positive");
    }

    if (j.contains("options")) {
        const Json& o = j.at("options");
        if (!o.is_object()) detail::spec_fail("$.options", "expected an object");
        detail::reject_unknown(o, "$.options",
                               {"scheme", "slack", "slack_delta", "truncation_degree", "seed",
                                "samples", "T", "h", "reference_L_mu"});
        auto& opt = spec.options;
        if (o.contains("scheme")) {
            opt.scheme = o.at("scheme").get<std::string>();
            if (opt.scheme != "auto" && opt.scheme != "appendixA" && opt.scheme != "appendixB")
                detail::spec_fail("$.options.scheme", "expected 'auto', 'appendixA' or 'appendixB'");
        }
        if (o.contains("slack")) opt.slack = detail::parse_real(o.at("slack"), "$.options.slack");
        if (!(opt.slack > 0.0 && opt.slack < 1.0))
            detail::spec_fail("$.options.slack", "must lie in ]0,1[");
        if (o.contains("slack_delta"))
            opt.slack_delta = detail::parse_real(o.at("slack_delta"), "$.options.slack_delta");
        if (!(opt.slack_delta > 0.0)) detail::spec_fail("$.options.slack_delta", "must be positive");
        if (o.contains("truncation_degree"))
            opt.truncation_degree =
                static_cast<int>(detail::require_integer(o, "truncation_degree", "$.options"));
        if (opt.truncation_degree < 1)
            detail::spec_fail("$.options.truncation_degree", "must be >= 1");
        if (o.contains("seed"))
            opt.seed = static_cast<std::uint64_t>(detail::require_integer(o, "seed", "$.options"));
        if (o.contains("samples"))
            opt.samples = detail::require_integer(o, "samples", "$.options");
        if (opt.samples < 1) detail::spec_fail("$.options.samples", "must be >= 1");
        if (o.contains("T")) opt.T = detail::parse_real(o.at("T"), "$.options.T");
        if (!(opt.T > 0.0)) detail::spec_fail("$.options.T", "must be positive");
        if (o.contains("h")) opt.h = detail::parse_real(o.at("h"), "$.options.h");
        if (!(opt.h > 0.0)) detail::spec_fail("$.options.h", "must be positive");
        if (o.contains("reference_L_mu"))
            opt.reference_L_mu =
                detail::parse_real(o.at("reference_L_mu"), "$.options.reference_L_mu");
    }
    return spec;
}

inline ProblemSpec parse_problem_spec(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw SpecError(std::string("problem spec: JSON parse error: ") + e.what());
    }
    return parse_problem_spec(j);
}

inline OrderedJson complex_to_json(Complex c) { return OrderedJson::array({c.real(), c.imag()}); }

inline OrderedJson problem_spec_to_json(const ProblemSpec& spec) {
    OrderedJson j;
    j["schema_version"] = spec.schema_version;
    j["n"] = spec.n;
    j["mu"] = spec.mu;
    j["kind"] = spec.kind == FieldKind::polynomial ? "polynomial" : "analytic";
    j["coefficients"] = OrderedJson::array();
    for (const auto& c : spec.coefficients) {
        OrderedJson entry;
        entry["component"] = c.component;
        entry["alpha"] = c.alpha.exponents;
        entry["re"] = c.value.real();
        entry["im"] = c.value.imag();
        j["coefficients"].push_back(entry);
    }
    if (!spec.tail.empty()) {
        j["tail_envelope"] = OrderedJson::array();
        for (std::size_t l = 0; l < spec.tail.size(); ++l) {
            OrderedJson env;
            env["component"] = static_cast<int>(l + 1);
            env["C"] = spec.tail[l].C;
            env["r"] = spec.tail[l].r;
            j["tail_envelope"].push_back(env);
        }
    }
    if (spec.change_of_basis) {
        j["change_of_basis"] = OrderedJson::array();
        for (int r = 0; r < spec.n; ++r) {
            OrderedJson prow = OrderedJson::array();
            for (int c = 0; c < spec.n; ++c)
                prow.push_back(complex_to_json((*spec.change_of_basis)(r, c)));
            j["change_of_basis"].push_back(prow);
        }
    }
    if (spec.requested_rho) j["requested_rho"] = *spec.requested_rho;
    OrderedJson o;
    o["scheme"] = spec.options.scheme;
    o["slack"] = spec.options.slack;
    o["slack_delta"] = spec.options.slack_delta;
    o["truncation_degree"] = spec.options.truncation_degree;
    o["seed"] = spec.options.seed;
    o["samples"] = spec.options.samples;
    o["T"] = spec.options.T;
    o["h"] = spec.options.h;
    if (spec.options.reference_L_mu) o["reference_L_mu"] = *spec.options.reference_L_mu;
    j["options"] = o;
    return j;
}

inline TaylorVectorField make_field(const ProblemSpec& spec) {
    return TaylorVectorField(spec.n, spec.mu, spec.kind, spec.coefficients, -1, spec.tail);
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

inline const char* invariance_status_name(InvarianceStatus s) {
    switch (s) {
        case InvarianceStatus::certified: return "certified";
        case InvarianceStatus::sampled_only: return "sampled-only";
        case InvarianceStatus::user_asserted: return "user-asserted";
        case InvarianceStatus::failed: return "failed";
    }
    return "failed";
}

inline const char* branch_name(Theorem1Branch b) {
    switch (b) {
        case Theorem1Branch::ratio_ge_one: return "KS/R >= 1";
        case Theorem1Branch::ratio_lt_one: return "KS/R < 1";
        case Theorem1Branch::degenerate_linear: return "degenerate linear";
    }
    return "degenerate linear";
}

inline const char* scheme_kind_name(WeightSchemeKind k) {
    switch (k) {
        case WeightSchemeKind::automatic: return "auto";
        case WeightSchemeKind::appendix_a: return "appendixA";
        case WeightSchemeKind::appendix_b: return "appendixB";
        case WeightSchemeKind::custom: return "custom";
    }
    return "auto";
}

inline OrderedJson assumption_report_to_json(const AssumptionReport& r) {
    OrderedJson j;
    j["equilibrium_at_origin"] = r.equilibrium_at_origin;
    j["jacobian_diagonal"] = r.jacobian_diagonal;
    j["hyperbolic"] = r.hyperbolic;
    j["eigenvalues"] = OrderedJson::array();
    for (const auto& ev : r.eigenvalues) j["eigenvalues"].push_back(complex_to_json(ev));
    j["notes"] = r.notes;
    return j;
}

inline OrderedJson certificate_to_json(const StabilityCertificate& cert) {
    OrderedJson j;
    j["theorem"] = cert.theorem;
    j["requested_rho"] = cert.requested_rho;
    j["rho_sup"] = cert.rho_sup();
    j["certified"] = cert.certified;
    j["invariance_status"] = invariance_status_name(cert.invariance_status);
    if (cert.polynomial) {
        OrderedJson c;
        c["type"] = "polynomial";
        c["d"] = cert.polynomial->d;
        c["K"] = cert.polynomial->K;
        c["S"] = cert.polynomial->S;
        c["R"] = cert.polynomial->R;
        c["ratio"] = cert.polynomial->ratio;
        c["branch"] = branch_name(cert.polynomial->branch);
        j["criterion"] = c;
    } else if (cert.analytic) {
        OrderedJson c;
        c["type"] = "analytic";
        c["mu"] = cert.analytic->mu;
        c["L_mu_lower"] = cert.analytic->L_mu.lower;
        c["L_mu_upper"] = cert.analytic->L_mu.upper;
        if (cert.analytic->reference_L_mu) c["reference_L_mu"] = *cert.analytic->reference_L_mu;
        c["L_mu_used"] = cert.analytic->L_mu_used;
        c["R"] = cert.analytic->R;
        j["criterion"] = c;
    }
    j["diagnostics"] = cert.diagnostics;
    return j;
}

inline OrderedJson lyapunov_to_json(const LyapunovFunction& V) {
    OrderedJson j;
    j["rho"] = V.rho;
    j["scale"] = V.scale;
    j["truncation_degree"] = V.truncation_degree;
    j["scheme"] = scheme_kind_name(V.scheme_kind);
    j["slack"] = V.slack;
    j["slack_delta"] = V.slack_delta;
    j["growth"] = V.growth;
    j["tail_bound"] = V.tail_bound;
    j["epsilon_table"] = OrderedJson::array();
    for (std::size_t i = 0; i < V.alphas.size(); ++i) {
        OrderedJson row;
        row["index"] = i + 1;
        row["alpha"] = V.alphas[i].exponents;
        row["epsilon"] = V.epsilon[i];
        j["epsilon_table"].push_back(row);
    }
    return j;
}

inline OrderedJson validation_to_json(const ValidationReport& r) {
    OrderedJson j;
    j["seed"] = r.seed;
    j["invariance"]["certificate"] = r.invariance.certificate;
    j["invariance"]["sampled_violations"] = r.invariance.sampled_violations;
    j["invariance"]["samples"] = r.invariance.samples;
    j["decrease"]["violations"] = r.decrease.violations;
    j["decrease"]["min_margin"] = r.decrease.min_margin;
    j["decrease"]["samples"] = r.decrease.samples;
    j["convergence"]["trajectories"] = r.convergence.trajectories;
    j["convergence"]["all_converged"] = r.convergence.all_converged;
    j["convergence"]["max_final_norm"] = r.convergence.max_final_norm;
    j["generator_check"]["max_error"] = r.generator_check.max_error;
    j["generator_check"]["order_ratio"] = r.generator_check.order_ratio;
    return j;
}

inline OrderedJson window_to_json(const GeneratorWindow& w) {
    OrderedJson j;
    j["max_degree"] = w.max_degree;
    j["entries"] = OrderedJson::array();
    for (const auto& e : w.entries)
        j["entries"].push_back(OrderedJson::array({e.row, e.col, e.value.real(), e.value.imag()}));
    return j;
}

}  // namespace polystab
