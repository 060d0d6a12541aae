#pragma once

// Structured text interchange: coefficient sequences, Bernstein
// representations, construction traces, and run configuration. Emission is
// hand-rolled so documents are deterministic and every real reloads to the
// bit; parsing goes through nlohmann::json and accepts either numbers or
// decimal strings in any real-valued slot. Double-precision documents carry
// bare numbers (17 significant digits round-trip binary64 exactly); wider
// precisions quote each value as a decimal string.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlab/bigfloat.hpp"
#include "rlab/construct.hpp"
#include "rlab/errors.hpp"
#include "rlab/pfunc.hpp"
#include "rlab/phigrammar.hpp"
#include "rlab/report.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

namespace detail {

inline std::string io_emit(double x) {
    if (!std::isfinite(x)) return '"' + format_real(x) + '"';
    return format_real(x);
}
inline std::string io_emit(const BigFloat& x) { return '"' + x.to_string() + '"'; }

template <class R>
R real_from_json(const nlohmann::json& v) {
    if (v.is_string()) return real_traits<R>::from_string(v.get<std::string>());
    if (v.is_number()) return real_traits<R>::from_double(v.get<double>());
    throw format_error("expected a number or a decimal string");
}

inline const nlohmann::json& need(const nlohmann::json& j, const char* key) {
    if (!j.is_object()) throw format_error("expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw format_error(std::string("missing field '") + key + "'");
    return *it;
}

inline std::string as_string(const nlohmann::json& v, const char* what) {
    if (!v.is_string()) throw format_error(std::string(what) + " must be a string");
    return v.get<std::string>();
}

inline bool as_bool(const nlohmann::json& v, const char* what) {
    if (!v.is_boolean()) throw format_error(std::string(what) + " must be a boolean");
    return v.get<bool>();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coefficient sequence records:
//   {"mode": "integer"|"real", "terms": [[k_or_lambda, a], ...],
//    "tail_mass": t, "normalized": bool}

inline std::string sequence_to_text(const CoefficientSequence& f) {
    std::string out = "{\"mode\":\"integer\",\"terms\":[";
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
        if (i) out += ',';
        out += '[' + std::to_string(f.terms[i].first) + ',' + detail::io_emit(f.terms[i].second) + ']';
    }
    out += "],\"tail_mass\":" + detail::io_emit(f.tail_mass);
    out += ",\"normalized\":";
    out += f.normalized ? "true" : "false";
    out += '}';
    return out;
}

template <class R>
std::string sequence_to_text(const ExpPolynomial<R>& p) {
    std::string out = "{\"mode\":\"real\",\"terms\":[";
    for (std::size_t i = 0; i < p.terms.size(); ++i) {
        if (i) out += ',';
        out += '[' + detail::io_emit(p.terms[i].freq) + ',' + detail::io_emit(p.terms[i].weight) + ']';
    }
    out += "],\"tail_mass\":0,\"normalized\":";
    using std::fabs;
    out += fabs(p.mass() - R(1)) <= real_traits<R>::from_double(1e-12) ? "true" : "false";
    out += '}';
    return out;
}

inline CoefficientSequence sequence_from_json(const nlohmann::json& j) {
    std::string mode = detail::as_string(detail::need(j, "mode"), "mode");
    if (mode != "integer")
        throw format_error("sequence record has mode '" + mode + "'; an integer-mode record is required");
    const auto& terms = detail::need(j, "terms");
    if (!terms.is_array()) throw format_error("terms must be an array of [index, weight] pairs");
    std::vector<std::pair<std::int64_t, double>> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2) throw format_error("each term must be a [index, weight] pair");
        if (!t[0].is_number_integer()) throw format_error("integer-mode indices must be integers");
        out.emplace_back(t[0].get<std::int64_t>(), detail::real_from_json<double>(t[1]));
    }
    double tail = detail::real_from_json<double>(detail::need(j, "tail_mass"));
    bool normalized = detail::as_bool(detail::need(j, "normalized"), "normalized");
    return make_sequence(std::move(out), tail, normalized);
}

// Accepts both modes; integer indices become real frequencies. Polynomials
// carry no tail, so a nonzero tail_mass is rejected.
template <class R>
ExpPolynomial<R> polynomial_from_json(const nlohmann::json& j) {
    std::string mode = detail::as_string(detail::need(j, "mode"), "mode");
    if (mode != "integer" && mode != "real")
        throw format_error("sequence record has unknown mode '" + mode + "'");
    const auto& terms = detail::need(j, "terms");
    if (!terms.is_array()) throw format_error("terms must be an array of [frequency, weight] pairs");
    ExpPolynomial<R> p;
    p.terms.reserve(terms.size());
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2) throw format_error("each term must be a [frequency, weight] pair");
        p.terms.push_back({detail::real_from_json<R>(t[0]), detail::real_from_json<R>(t[1])});
    }
    R tail = detail::real_from_json<R>(detail::need(j, "tail_mass"));
    if (!(tail == R(0))) throw format_error("polynomial records require zero tail_mass");
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// Bernstein records: {"c": c, "atoms": [[t, mass], ...]}

template <class R>
std::string bernstein_to_text(const DiscreteBernstein<R>& phi) {
    std::string out = "{\"c\":" + detail::io_emit(phi.c) + ",\"atoms\":[";
    for (std::size_t i = 0; i < phi.atoms.size(); ++i) {
        if (i) out += ',';
        out += '[' + detail::io_emit(phi.atoms[i].t) + ',' + detail::io_emit(phi.atoms[i].mass) + ']';
    }
    out += "]}";
    return out;
}

template <class R>
DiscreteBernstein<R> bernstein_from_json(const nlohmann::json& j) {
    DiscreteBernstein<R> phi;
    phi.c = detail::real_from_json<R>(detail::need(j, "c"));
    const auto& atoms = detail::need(j, "atoms");
    if (!atoms.is_array()) throw format_error("atoms must be an array of [t, mass] pairs");
    phi.atoms.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (!a.is_array() || a.size() != 2) throw format_error("each atom must be a [t, mass] pair");
        phi.atoms.push_back({detail::real_from_json<R>(a[0]), detail::real_from_json<R>(a[1])});
    }
    phi.validate();
    return phi;
}

// ---------------------------------------------------------------------------
// Construction trace documents. The document carries everything a verifier
// needs to re-check the construction without re-running it: the seed
// polynomial, the schedule, every stage record, and the build parameters.

template <class R>
struct TraceDocument {
    std::string mode = "power-weight";
    long precision_bits = real_traits<R>::precision_bits();
    double eps = 0;
    double delta = 0;
    double nu = 0;
    std::string phi_text;
    ExpPolynomial<R> f0;
    ConstructionTrace<R> trace;
    std::string status = "complete";
    std::string message;
};

template <class R>
TraceDocument<R> make_trace_document(const ExpPolynomial<R>& f0, const BuildResult<R>& run,
                                     const PhiSpec& phi, double eps, double delta, double nu) {
    TraceDocument<R> doc;
    doc.eps = eps;
    doc.delta = delta;
    doc.nu = nu;
    doc.phi_text = phi.text;
    doc.f0 = f0;
    doc.trace = run.trace;
    doc.status = run.status == BuildStatus::complete ? "complete" : "precision-exhausted";
    doc.message = run.message;
    return doc;
}

template <class R>
std::string trace_to_text(const TraceDocument<R>& doc) {
    std::string out = "{\"kind\":\"construction-trace\",\"mode\":";
    detail::json_escape(out, doc.mode);
    out += ",\"precision\":" + std::to_string(doc.precision_bits);
    out += ",\"eps\":" + detail::io_emit(doc.eps);
    out += ",\"delta\":" + detail::io_emit(doc.delta);
    out += ",\"nu\":" + detail::io_emit(doc.nu);
    out += ",\"phi\":";
    detail::json_escape(out, doc.phi_text);
    out += ",\"f0\":" + sequence_to_text(doc.f0);
    out += ",\"schedule\":[";
    for (std::size_t i = 0; i < doc.trace.schedule.size(); ++i) {
        if (i) out += ',';
        out += detail::io_emit(doc.trace.schedule[i]);
    }
    out += "],\"stages\":[";
    for (std::size_t i = 0; i < doc.trace.stages.size(); ++i) {
        const auto& st = doc.trace.stages[i];
        if (i) out += ',';
        out += "{\"poly\":" + sequence_to_text(st.poly);
        out += ",\"window\":{\"theta_m\":" + detail::io_emit(st.window.theta_m);
        out += ",\"half_width\":" + detail::io_emit(st.window.half_width);
        out += ",\"bound\":" + detail::io_emit(st.window.bound);
        out += ",\"m\":" + detail::io_emit(st.window.m) + '}';
        out += ",\"norm_distance\":" + detail::io_emit(st.norm_distance);
        out += ",\"ratio\":" + detail::io_emit(st.ratio);
        out += ",\"gamma\":" + detail::io_emit(st.gamma);
        out += ",\"d\":" + detail::io_emit(st.d);
        out += ",\"root_residual\":" + detail::io_emit(st.root_residual) + '}';
    }
    out += "],\"final\":" + sequence_to_text(doc.trace.final);
    out += ",\"status\":";
    detail::json_escape(out, doc.status);
    out += ",\"message\":";
    detail::json_escape(out, doc.message);
    out += '}';
    return out;
}

template <class R>
TraceDocument<R> trace_from_json(const nlohmann::json& j) {
    if (detail::as_string(detail::need(j, "kind"), "kind") != "construction-trace")
        throw format_error("document is not a construction trace");
    TraceDocument<R> doc;
    doc.mode = detail::as_string(detail::need(j, "mode"), "mode");
    const auto& prec = detail::need(j, "precision");
    if (!prec.is_number_integer()) throw format_error("precision must be an integer bit count");
    doc.precision_bits = prec.get<long>();
    if (doc.precision_bits > real_traits<R>::precision_bits())
        throw format_error("trace was written at " + std::to_string(doc.precision_bits) +
                           " mantissa bits; reload it at that precision or wider");
    doc.eps = detail::real_from_json<double>(detail::need(j, "eps"));
    doc.delta = detail::real_from_json<double>(detail::need(j, "delta"));
    doc.nu = detail::real_from_json<double>(detail::need(j, "nu"));
    doc.phi_text = detail::as_string(detail::need(j, "phi"), "phi");
    doc.f0 = polynomial_from_json<R>(detail::need(j, "f0"));
    const auto& sched = detail::need(j, "schedule");
    if (!sched.is_array()) throw format_error("schedule must be an array");
    for (const auto& d : sched) doc.trace.schedule.push_back(detail::real_from_json<R>(d));
    const auto& stages = detail::need(j, "stages");
    if (!stages.is_array()) throw format_error("stages must be an array");
    for (const auto& s : stages) {
        StageRecord<R> st;
        st.poly = polynomial_from_json<R>(detail::need(s, "poly"));
        const auto& w = detail::need(s, "window");
        st.window.theta_m = detail::real_from_json<R>(detail::need(w, "theta_m"));
        st.window.half_width = detail::real_from_json<R>(detail::need(w, "half_width"));
        st.window.bound = detail::real_from_json<R>(detail::need(w, "bound"));
        st.window.m = detail::real_from_json<R>(detail::need(w, "m"));
        st.norm_distance = detail::real_from_json<R>(detail::need(s, "norm_distance"));
        st.ratio = detail::real_from_json<R>(detail::need(s, "ratio"));
        st.gamma = detail::real_from_json<R>(detail::need(s, "gamma"));
        st.d = detail::real_from_json<R>(detail::need(s, "d"));
        st.root_residual = detail::real_from_json<R>(detail::need(s, "root_residual"));
        doc.trace.stages.push_back(std::move(st));
    }
    doc.trace.final = polynomial_from_json<R>(detail::need(j, "final"));
    doc.status = detail::as_string(detail::need(j, "status"), "status");
    doc.message = detail::as_string(detail::need(j, "message"), "message");
    return doc;
}

// ---------------------------------------------------------------------------
// Trace replay: re-verify a serialized construction from the document alone.
// Checks mass preservation, the stage schedule, the total budget, the final
// weighted distance, recorded-vs-recomputed flatness ratios, and the final
// window certificates. Returns one report per check.

template <class R>
std::vector<VerificationReport> replay_trace(const TraceDocument<R>& doc, int window_samples = 101) {
    if (doc.mode != "power-weight")
        throw format_error("cannot replay trace mode '" + doc.mode + "'");
    if (doc.trace.schedule.size() != doc.trace.stages.size())
        throw format_error("schedule and stage counts disagree");
    if (!(doc.eps > 0) || !(doc.delta > 0) || doc.nu < 0 || doc.nu >= 1)
        throw format_error("trace parameters lie outside the construction's domain");
    doc.f0.validate();
    doc.trace.final.validate();
    for (const auto& st : doc.trace.stages) {
        st.poly.validate();
        st.window.validate();
    }

    std::vector<VerificationReport> out;
    using std::fabs;
    using std::max;

    R drift = fabs(doc.f0.mass() - R(1));
    drift = max(drift, fabs(doc.trace.final.mass() - R(1)));
    for (const auto& st : doc.trace.stages) drift = max(drift, fabs(st.poly.mass() - R(1)));
    out.push_back(check_le("mass-preservation", to_double(drift), 1e-12)
                      .with_input("stages", static_cast<double>(doc.trace.stages.size())));

    R sum_delta(0);
    R worst_stage(0);
    const ExpPolynomial<R>* prev = &doc.f0;
    WeightSpec<R> w = WeightSpec<R>::power(doc.nu);
    for (std::size_t i = 0; i < doc.trace.stages.size(); ++i) {
        const auto& st = doc.trace.stages[i];
        const R& dm = doc.trace.schedule[i];
        if (!(dm > R(0))) throw format_error("schedule entries must be positive");
        R gap = weighted_distance(*prev, st.poly, w);
        worst_stage = max(worst_stage, gap / dm);
        sum_delta += dm;
        prev = &st.poly;
    }
    out.push_back(check_le("stage-schedule", to_double(worst_stage), 1.0, 1e-12)
                      .with_meta("norm", "power-weighted"));
    out.push_back(check_le("schedule-budget", to_double(sum_delta), doc.eps, 1e-12));
    out.push_back(check_le("final-distance", to_double(weighted_distance(doc.f0, doc.trace.final, w)),
                           to_double(sum_delta), 1e-12));

    double worst_ratio_err = 0;
    for (const auto& st : doc.trace.stages) {
        R recomputed = modulus(one_minus_eval(st.poly, st.window.theta_m)) / st.window.theta_m;
        double rel = to_double(fabs(recomputed - st.ratio) / max(st.ratio, real_traits<R>::tiny()));
        worst_ratio_err = std::max(worst_ratio_err, rel);
    }
    out.push_back(check_le("ratio-consistency", worst_ratio_err, 1e-9));

    RealFn<R> phi = parse_phi<R>(doc.phi_text);
    auto checks = certify_final_windows(doc.trace, phi, doc.nu, doc.delta, window_samples);
    double worst_window = 0;
    bool all_ok = !checks.empty() || doc.trace.stages.empty();
    for (const auto& c : checks) {
        worst_window = std::max(worst_window, to_double(max(c.sampled_sup, c.certified_sup) / c.bound));
        all_ok = all_ok && c.ok;
    }
    auto r = check_le("window-flatness", worst_window, 1.0);
    r.satisfied = r.satisfied && all_ok;
    out.push_back(r.with_input("windows", static_cast<double>(checks.size()))
                      .with_input("samples_per_window", static_cast<double>(window_samples)));
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
    long precision_bits = 53; // 53 selects binary64; anything wider runs MPFR
    std::map<std::string, double> tolerances = default_tolerances();
    long grid_points = 10000;
    std::string format = "json"; // json | csv
    std::uint64_t seed = 1;

    static std::map<std::string, double> default_tolerances() {
        return {{"cert_slack", 1e-12}, {"quadrature_rel", 1e-6}, {"root_rel", 1e-14}};
    }

    void validate() const {
        if (precision_bits < 24) throw precondition_error("precision must be at least 24 bits");
        if (grid_points < 10) throw precondition_error("grid must have at least 10 points");
        if (format != "json" && format != "csv")
            throw precondition_error("output format must be json or csv");
        for (const auto& [k, v] : tolerances)
            if (!(v > 0)) throw precondition_error("tolerance '" + k + "' must be positive");
    }
};

inline std::string runconfig_to_text(const RunConfig& c) {
    std::string out = "{\"precision\":";
    out += c.precision_bits == 53 ? std::string("\"binary64\"") : std::to_string(c.precision_bits);
    out += ",\"tolerances\":{";
    bool first = true;
    for (const auto& [k, v] : c.tolerances) {
        if (!first) out += ',';
        first = false;
        detail::json_escape(out, k);
        out += ':' + detail::io_emit(v);
    }
    out += "},\"grid_points\":" + std::to_string(c.grid_points);
    out += ",\"format\":";
    detail::json_escape(out, c.format);
    out += ",\"seed\":" + std::to_string(c.seed) + '}';
    return out;
}

// Missing fields keep their defaults so configs can be partial.
inline RunConfig runconfig_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw format_error("run configuration must be an object");
    RunConfig c;
    if (j.contains("precision")) {
        const auto& p = j.at("precision");
        if (p.is_string()) {
            std::string s = p.get<std::string>();
            if (s == "binary64") c.precision_bits = 53;
            else throw format_error("unknown precision '" + s + "'");
        } else if (p.is_number_integer()) {
            c.precision_bits = p.get<long>();
        } else {
            throw format_error("precision must be \"binary64\" or a bit count");
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (!t.is_object()) throw format_error("tolerances must be an object");
        for (auto it = t.begin(); it != t.end(); ++it)
            c.tolerances[it.key()] = detail::real_from_json<double>(it.value());
    }
    if (j.contains("grid_points")) {
        const auto& g = j.at("grid_points");
        if (!g.is_number_integer()) throw format_error("grid_points must be an integer");
        c.grid_points = g.get<long>();
    }
    if (j.contains("format")) c.format = detail::as_string(j.at("format"), "format");
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_integer()) throw format_error("seed must be an integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// File plumbing. All failures surface as format_error carrying the path.

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw format_error("read failed: " + path);
    return buf.str();
}

inline nlohmann::json load_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw format_error(path + ": " + e.what());
    }
}

inline nlohmann::json parse_json_text(const std::string& body, const std::string& what) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(what + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw format_error("cannot write file: " + path);
    out << body;
    out.flush();
    if (!out) throw format_error("write failed: " + path);
}

} // namespace rlab
