#pragma once

// Structured record of one inequality check plus deterministic JSON/CSV
// emission. Field order is insertion order; numbers print with 17 significant
// digits so two runs of the same build emit byte-identical documents.

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace rlab {

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct VerificationReport {
    std::string theorem_tag; // self-descriptive check identifier, e.g. "renewal-identity"
    std::vector<std::pair<std::string, std::string>> inputs;
    double lhs = 0;
    double rhs = 0;
    bool satisfied = false;
    double error_estimate = 0; // certified bound on evaluation error in lhs/rhs
    std::vector<std::pair<std::string, std::string>> meta;

    VerificationReport& with_input(std::string k, double v) {
        inputs.emplace_back(std::move(k), format_real(v));
        return *this;
    }
    VerificationReport& with_input(std::string k, std::string v) {
        inputs.emplace_back(std::move(k), std::move(v));
        return *this;
    }
    VerificationReport& with_meta(std::string k, std::string v) {
        meta.emplace_back(std::move(k), std::move(v));
        return *this;
    }
    VerificationReport& with_meta(std::string k, double v) {
        meta.emplace_back(std::move(k), format_real(v));
        return *this;
    }
};

// satisfied means lhs <= rhs once the certified evaluation error is granted;
// meta "certified_strict" records whether it also holds with the error charged
// against the inequality.
inline VerificationReport check_le(std::string tag, double lhs, double rhs, double error_estimate = 0) {
    VerificationReport r;
    r.theorem_tag = std::move(tag);
    r.lhs = lhs;
    r.rhs = rhs;
    r.error_estimate = error_estimate;
    r.satisfied = lhs <= rhs + error_estimate;
    r.with_meta("certified_strict", std::string(lhs + error_estimate <= rhs ? "true" : "false"));
    return r;
}

namespace detail {

inline void json_escape(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void json_pairs(std::string& out, const std::vector<std::pair<std::string, std::string>>& kv) {
    out += '{';
    bool first = true;
    for (const auto& [k, v] : kv) {
        if (!first) out += ',';
        first = false;
        json_escape(out, k);
        out += ':';
        json_escape(out, v);
    }
    out += '}';
}

} // namespace detail

inline std::string to_json(const VerificationReport& r) {
    std::string out = "{\"theorem_tag\":";
    detail::json_escape(out, r.theorem_tag);
    out += ",\"inputs\":";
    detail::json_pairs(out, r.inputs);
    out += ",\"lhs\":" + format_real(r.lhs);
    out += ",\"rhs\":" + format_real(r.rhs);
    out += ",\"satisfied\":";
    out += r.satisfied ? "true" : "false";
    out += ",\"error_estimate\":" + format_real(r.error_estimate);
    out += ",\"meta\":";
    detail::json_pairs(out, r.meta);
    out += '}';
    return out;
}

inline std::string to_json(const std::vector<VerificationReport>& rs) {
    std::string out = "[";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (i) out += ',';
        out += to_json(rs[i]);
    }
    out += ']';
    return out;
}

namespace detail {

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

// Flattens a report list to CSV. Column set is the union of input and meta
// keys across the list (first-appearance order) so every field survives the
// format change; absent keys leave empty cells.
inline std::string to_csv(const std::vector<VerificationReport>& rs) {
    std::vector<std::string> ikeys, mkeys;
    auto collect = [](std::vector<std::string>& keys,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
        for (const auto& [k, v] : kv) {
            bool seen = false;
            for (const auto& have : keys)
                if (have == k) { seen = true; break; }
            if (!seen) keys.push_back(k);
        }
    };
    for (const auto& r : rs) {
        collect(ikeys, r.inputs);
        collect(mkeys, r.meta);
    }

    std::string out = "theorem_tag,lhs,rhs,satisfied,error_estimate";
    for (const auto& k : ikeys) out += ",input." + detail::csv_cell(k);
    for (const auto& k : mkeys) out += ",meta." + detail::csv_cell(k);
    out += '\n';

    auto lookup = [](const std::vector<std::pair<std::string, std::string>>& kv,
                     const std::string& key) -> std::string {
        for (const auto& [k, v] : kv)
            if (k == key) return v;
        return {};
    };
    for (const auto& r : rs) {
        out += detail::csv_cell(r.theorem_tag) + ',' + format_real(r.lhs) + ',' + format_real(r.rhs) +
               ',' + (r.satisfied ? "true" : "false") + ',' + format_real(r.error_estimate);
        for (const auto& k : ikeys) out += ',' + detail::csv_cell(lookup(r.inputs, k));
        for (const auto& k : mkeys) out += ',' + detail::csv_cell(lookup(r.meta, k));
        out += '\n';
    }
    return out;
}

} // namespace rlab
