#pragma once

// Renewal recurrence b_0 = 1, b_n = sum_{k=1..n} a_k b_{n-k}, the generating
// function identity (1 - F) G = 1, and the limit/variation diagnostics. The
// float path is the default; an exact rational path over the same recurrence
// serves as oracle for small horizons.

#include <gmpxx.h>

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

#include "rlab/report.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

struct RenewalSequence {
    std::vector<double> b; // b_0..b_N
    CoefficientSequence source;
    std::int64_t N = 0;
};

struct RenewalSequenceExact {
    std::vector<mpq_class> b;
    CoefficientSequence source;
    std::int64_t N = 0;
};

namespace detail {

// The recurrence reads a_k for every k <= N; an anonymous tail starting at or
// below N would make those reads undefined.
inline void require_known_coefficients(const CoefficientSequence& a, std::int64_t N) {
    a.validate();
    if (a.tail_mass > 0 && N > a.max_index())
        throw precondition_error("horizon reaches into the anonymous tail");
}

} // namespace detail

inline RenewalSequence renewal_sequence(const CoefficientSequence& a, std::int64_t N) {
    if (N < 0) throw precondition_error("horizon must be nonnegative");
    detail::require_known_coefficients(a, N);
    std::vector<double> b(static_cast<std::size_t>(N) + 1);
    b[0] = 1.0;
    for (std::int64_t n = 1; n <= N; ++n) {
        detail::CompensatedSum s;
        for (const auto& [k, ak] : a.terms) {
            if (k > n) break;
            s.add(ak * b[static_cast<std::size_t>(n - k)]);
        }
        b[static_cast<std::size_t>(n)] = s.value();
    }
    return {std::move(b), a, N};
}

inline RenewalSequenceExact renewal_sequence_exact(const CoefficientSequence& a, std::int64_t N) {
    if (N < 0) throw precondition_error("horizon must be nonnegative");
    detail::require_known_coefficients(a, N);
    std::vector<mpq_class> coeff;
    coeff.reserve(a.terms.size());
    for (const auto& [k, ak] : a.terms) coeff.emplace_back(ak); // double -> rational is exact
    std::vector<mpq_class> b(static_cast<std::size_t>(N) + 1);
    b[0] = 1;
    for (std::int64_t n = 1; n <= N; ++n) {
        mpq_class s = 0;
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            std::int64_t k = a.terms[i].first;
            if (k > n) break;
            s += coeff[i] * b[static_cast<std::size_t>(n - k)];
        }
        b[static_cast<std::size_t>(n)] = s;
    }
    return {std::move(b), a, N};
}

// Max residual of the Cauchy product (1 - F) G over indices 0..N; index 0
// compares against 1, the rest against 0.
inline VerificationReport verify_gf_identity(const CoefficientSequence& a, const RenewalSequence& r,
                                             double tolerance = 1e-12) {
    if (r.N + 1 != static_cast<std::int64_t>(r.b.size()))
        throw precondition_error("renewal sequence horizon does not match its length");
    double worst = std::abs(r.b.at(0) - 1.0);
    for (std::int64_t n = 1; n <= r.N; ++n) {
        detail::CompensatedSum s;
        s.add(r.b[static_cast<std::size_t>(n)]);
        for (const auto& [k, ak] : a.terms) {
            if (k > n) break;
            s.add(-ak * r.b[static_cast<std::size_t>(n - k)]);
        }
        worst = std::max(worst, std::abs(s.value()));
    }
    auto rep = check_le("renewal-identity", worst, tolerance);
    rep.with_input("horizon", static_cast<double>(r.N));
    rep.with_meta("mode", "float");
    return rep;
}

inline VerificationReport verify_gf_identity(const CoefficientSequence& a, const RenewalSequenceExact& r) {
    if (r.N + 1 != static_cast<std::int64_t>(r.b.size()))
        throw precondition_error("renewal sequence horizon does not match its length");
    mpq_class worst = abs(r.b.at(0) - 1);
    for (std::int64_t n = 1; n <= r.N; ++n) {
        mpq_class s = r.b[static_cast<std::size_t>(n)];
        for (const auto& [k, ak] : a.terms) {
            if (k > n) break;
            s -= mpq_class(ak) * r.b[static_cast<std::size_t>(n - k)];
        }
        worst = std::max(worst, mpq_class(abs(s)));
    }
    auto rep = check_le("renewal-identity", worst.get_d(), 0.0);
    rep.with_input("horizon", static_cast<double>(r.N));
    rep.with_meta("mode", "rational");
    rep.satisfied = worst == 0;
    return rep;
}

// Measured gap to the Erdos-Feller-Pollard limit 1/mu. Reports the gap only;
// no rate is asserted.
struct EfpReport {
    double mu = 0;
    double b_N = 0;
    double gap = 0;
};

inline EfpReport efp_diagnostic(const CoefficientSequence& a, const RenewalSequence& r) {
    if (!is_aperiodic(a))
        throw precondition_error("support has gcd > 1: the renewal limit need not exist");
    double mu = derivative_bound(a);
    if (!(mu > 0)) throw precondition_error("mean mu must be positive");
    double bN = r.b.back();
    return {mu, bN, std::abs(bN - 1.0 / mu)};
}

struct DifferenceDiagnostics {
    std::vector<double> abs_partial; // abs_partial[n] = sum_{k=1..n} |b_{k-1} - b_k|
    std::vector<double> sq_partial;  // squares of the same differences
    std::vector<double> hardy_partial; // hardy_partial[n] = sum_{k=1..n} b_k / k
    struct Block {
        int j;
        double abs_increment; // sum over k in [2^j, 2^{j+1}) of |b_k - b_{k+1}|
        double sq_increment;
    };
    std::vector<Block> dyadic_blocks;
    std::int64_t horizon = 0;
};

inline DifferenceDiagnostics difference_diagnostics(const RenewalSequence& r) {
    if (r.N < 1) throw precondition_error("diagnostics need horizon >= 1");
    DifferenceDiagnostics d;
    d.horizon = r.N;
    std::size_t n1 = r.b.size();
    d.abs_partial.resize(n1);
    d.sq_partial.resize(n1);
    d.hardy_partial.resize(n1);
    detail::CompensatedSum av, sv, hv;
    d.abs_partial[0] = d.sq_partial[0] = d.hardy_partial[0] = 0;
    for (std::size_t n = 1; n < n1; ++n) {
        double delta = r.b[n - 1] - r.b[n];
        av.add(std::abs(delta));
        sv.add(delta * delta);
        hv.add(r.b[n] / static_cast<double>(n));
        d.abs_partial[n] = av.value();
        d.sq_partial[n] = sv.value();
        d.hardy_partial[n] = hv.value();
    }
    for (int j = 0; (std::int64_t{1} << (j + 1)) <= r.N; ++j) {
        std::int64_t lo = std::int64_t{1} << j, hi = std::int64_t{1} << (j + 1);
        detail::CompensatedSum ab, sb;
        for (std::int64_t k = lo; k < hi; ++k) {
            double delta = r.b[static_cast<std::size_t>(k)] - r.b[static_cast<std::size_t>(k + 1)];
            ab.add(std::abs(delta));
            sb.add(delta * delta);
        }
        d.dyadic_blocks.push_back({j, ab.value(), sb.value()});
    }
    return d;
}

// Shortest decimal that reloads to the same binary64 value.
inline std::string repr_shortest(double x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

// Columns: n, b_n, delta, abs_partial, sq_partial, hardy_partial with
// delta_n = b_{n-1} - b_n (0 in row 0), so abs_partial is the running sum of
// |delta| down the file.
inline std::string renewal_csv(const RenewalSequence& r) {
    DifferenceDiagnostics d;
    if (r.N >= 1) {
        d = difference_diagnostics(r);
    } else {
        d.abs_partial = d.sq_partial = d.hardy_partial = {0.0};
    }
    std::string out = "n,b_n,delta,abs_partial,sq_partial,hardy_partial\n";
    for (std::size_t n = 0; n < r.b.size(); ++n) {
        double delta = n == 0 ? 0.0 : r.b[n - 1] - r.b[n];
        out += std::to_string(n);
        out += ',';
        out += repr_shortest(r.b[n]);
        out += ',';
        out += repr_shortest(delta);
        out += ',';
        out += repr_shortest(d.abs_partial[n]);
        out += ',';
        out += repr_shortest(d.sq_partial[n]);
        out += ',';
        out += repr_shortest(d.hardy_partial[n]);
        out += '\n';
    }
    return out;
}

} // namespace rlab
