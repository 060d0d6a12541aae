#pragma once

// Quantitative level-set and integrability checks for normalized nonnegative
// series: certified measure bounds near the maximum, dyadic window bounds for
// the reciprocal ratio, two-sided series/integral comparisons, and the
// condensation bracket in exact arithmetic. Every check returns a
// VerificationReport with the raw lhs/rhs; nothing is clamped.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rlab/cplx.hpp"
#include "rlab/errors.hpp"
#include "rlab/measure.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/report.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Superlevel sets of real parts: meas{Re f >= 1 - eps} <= 4 pi sqrt(eps) for
// any convex combination f of cos(mu theta + phase) with frequencies mu >= 1.

struct CosineTerm {
    double weight = 0;
    double freq = 0;
    double phase = 0;
};

struct CosinePolynomial {
    std::vector<CosineTerm> terms;

    void validate() const {
        for (const auto& t : terms) {
            if (!(t.weight >= 0)) throw precondition_error("cosine weights must be nonnegative");
            if (!(t.freq >= 1)) throw precondition_error("cosine frequencies must be >= 1");
            if (!std::isfinite(t.phase)) throw precondition_error("cosine phase must be finite");
        }
    }

    double mass() const {
        detail::CompensatedSum s;
        for (const auto& t : terms) s.add(t.weight);
        return s.value();
    }

    double derivative_bound() const {
        detail::CompensatedSum s;
        for (const auto& t : terms) s.add(t.weight * t.freq);
        return s.value();
    }

    double eval(double theta) const {
        detail::CompensatedSum s;
        for (const auto& t : terms) s.add(t.weight * std::cos(t.freq * theta + t.phase));
        return s.value();
    }
};

inline CosinePolynomial cosine_real_part(const CoefficientSequence& f) {
    f.validate();
    if (f.tail_mass > 0)
        throw precondition_error("anonymous tail has no pointwise cosine expansion");
    CosinePolynomial g;
    g.terms.reserve(f.terms.size());
    for (const auto& [k, a] : f.terms)
        g.terms.push_back({a, static_cast<double>(k), 0.0});
    return g;
}

// Cell-center samples of Re f over [-pi, pi] with the Lipschitz constant that
// certifies them; one scan serves every eps level afterwards.
struct SuperlevelScan {
    double a = -kPi;
    double b = kPi;
    double lipschitz = 0;
    double mass = 0;
    std::vector<double> values;
};

inline SuperlevelScan scan_real_part(const CosinePolynomial& f, long grid) {
    f.validate();
    if (grid < 1000) throw precondition_error("superlevel grid needs at least 1000 cells");
    SuperlevelScan s;
    s.lipschitz = f.derivative_bound();
    s.mass = f.mass();
    s.values = cell_center_samples([&](double t) { return f.eval(t); }, s.a, s.b, grid);
    return s;
}

inline SuperlevelScan scan_real_part(const CoefficientSequence& f, long grid) {
    f.validate();
    if (f.tail_mass > 0) throw precondition_error("anonymous tail has no pointwise evaluation");
    if (grid < 1000) throw precondition_error("superlevel grid needs at least 1000 cells");
    SuperlevelScan s;
    s.lipschitz = derivative_bound(f);
    s.mass = f.total_mass();
    s.values = cell_center_samples([&](double t) { return eval(f, t).re; }, s.a, s.b, grid);
    return s;
}

struct SuperlevelResult {
    CertifiedMeasure measure;
    VerificationReport report;
};

namespace detail {

inline SuperlevelResult superlevel_result(double eps, CertifiedMeasure m, int refine_depth) {
    SuperlevelResult out;
    out.measure = m;
    const double rhs = 4.0 * kPi * std::sqrt(eps);
    out.report = check_le("littlewood-superlevel", out.measure.upper, rhs)
                     .with_input("eps", eps)
                     .with_input("grid", static_cast<double>(out.measure.grid_points))
                     .with_meta("lower", out.measure.lower)
                     .with_meta("lipschitz", out.measure.lipschitz)
                     .with_meta("refine_depth", static_cast<double>(refine_depth))
                     .with_meta("boundary_cells", static_cast<double>(out.measure.boundary_cells));
    return out;
}

inline void superlevel_preconditions(const SuperlevelScan& scan, double eps) {
    if (!(eps > 0 && eps <= 1)) throw precondition_error("eps must lie in (0, 1]");
    if (std::abs(scan.mass - 1.0) > kNormTol)
        throw precondition_error("superlevel bound requires unit mass");
}

} // namespace detail

inline SuperlevelResult superlevel_measure(const SuperlevelScan& scan, double eps) {
    detail::superlevel_preconditions(scan, eps);
    return detail::superlevel_result(
        eps,
        certified_superlevel_from_samples(scan.values, scan.a, scan.b, 1.0 - eps, scan.lipschitz),
        0);
}

// Refined variants re-test boundary cells against f directly; the coarse scan
// can then stay shared across eps values.
inline SuperlevelResult superlevel_measure(const SuperlevelScan& scan, const CosinePolynomial& f,
                                           double eps, int refine_depth = 10) {
    detail::superlevel_preconditions(scan, eps);
    auto m = certified_superlevel_refined(scan.values, [&](double t) { return f.eval(t); },
                                          scan.a, scan.b, 1.0 - eps, scan.lipschitz, refine_depth);
    return detail::superlevel_result(eps, m, refine_depth);
}

inline SuperlevelResult superlevel_measure(const SuperlevelScan& scan,
                                           const CoefficientSequence& f, double eps,
                                           int refine_depth = 10) {
    detail::superlevel_preconditions(scan, eps);
    auto m = certified_superlevel_refined(scan.values, [&](double t) { return eval(f, t).re; },
                                          scan.a, scan.b, 1.0 - eps, scan.lipschitz, refine_depth);
    return detail::superlevel_result(eps, m, refine_depth);
}

inline SuperlevelResult superlevel_measure(const CosinePolynomial& f, double eps, long grid) {
    return superlevel_measure(scan_real_part(f, grid), f, eps);
}

inline SuperlevelResult superlevel_measure(const CoefficientSequence& f, double eps, long grid) {
    return superlevel_measure(scan_real_part(f, grid), f, eps);
}

// ---------------------------------------------------------------------------
// Mass bound for a union of intervals E inside a period window: with
// eps = integral_E (1 - cos(alpha t + beta)) dt computed in closed form,
// meas(E) <= (16 pi^2 eps)^{1/3}, sharpened to (4 pi^2 eps)^{1/3} when
// alpha = 1 and beta = 0.

inline VerificationReport interval_mass_bound_check(std::vector<std::pair<double, double>> E,
                                                    double alpha, double beta) {
    if (!(alpha >= 1)) throw precondition_error("alpha must be >= 1");
    if (!std::isfinite(beta)) throw precondition_error("beta must be finite");
    std::sort(E.begin(), E.end());
    detail::CompensatedSum meas, eps;
    for (std::size_t i = 0; i < E.size(); ++i) {
        const auto [lo, hi] = E[i];
        if (!(lo <= hi)) throw precondition_error("interval endpoints out of order");
        if (i > 0 && lo < E[i - 1].second)
            throw precondition_error("intervals must not overlap");
        meas.add(hi - lo);
        eps.add(hi - lo);
        eps.add(-(std::sin(alpha * hi + beta) - std::sin(alpha * lo + beta)) / alpha);
    }
    if (!E.empty() && !(E.back().second - E.front().first <= 2 * kPi + 1e-12))
        throw precondition_error("intervals must fit inside one period window");
    const bool sharp = alpha == 1.0 && beta == 0.0;
    const double e = std::max(0.0, eps.value());
    const double rhs = std::cbrt((sharp ? 4.0 : 16.0) * kPi * kPi * e);
    return check_le("interval-mass-measure", meas.value(), rhs)
        .with_input("alpha", alpha)
        .with_input("beta", beta)
        .with_input("intervals", static_cast<double>(E.size()))
        .with_meta("cosine_deficit", e)
        .with_meta("sharp_constant", sharp ? "true" : "false");
}

// ---------------------------------------------------------------------------
// Sublevel bound away from zero: for f with support in [m, infinity), mass
// r = f(0) in (0, 1] and m theta0 <= 1,
//   meas{theta in [theta0, 2 theta0] : r - Re f(theta) <= eps}
//     <= 4 pi theta0 sqrt(eps / r)  for every eps in (0, r].

inline std::vector<VerificationReport> sublevel_tail_check(const CoefficientSequence& f,
                                                           double theta0,
                                                           const std::vector<double>& eps_grid,
                                                           long grid = 100000) {
    f.validate();
    if (f.tail_mass > 0) throw precondition_error("anonymous tail has no pointwise evaluation");
    if (f.terms.empty()) throw precondition_error("sequence has empty support");
    const double r = f.total_mass();
    if (!(r > 0 && r <= 1)) throw precondition_error("mass must lie in (0, 1]");
    std::int64_t m = 0;
    for (const auto& [k, a] : f.terms)
        if (a > 0) {
            m = k;
            break;
        }
    if (m == 0) throw precondition_error("sequence has empty support");
    if (!(theta0 > 0 && static_cast<double>(m) * theta0 <= 1))
        throw precondition_error("need m * theta0 <= 1 with theta0 > 0");
    const double lipschitz = derivative_bound(f);
    const auto samples = cell_center_samples(
        [&](double t) { return r - eval(f, t).re; }, theta0, 2 * theta0, grid);
    std::vector<VerificationReport> out;
    out.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        if (!(eps > 0 && eps <= r)) throw precondition_error("eps must lie in (0, mass]");
        const auto meas =
            certified_sublevel_from_samples(samples, theta0, 2 * theta0, eps, lipschitz);
        const double rhs = 4.0 * kPi * theta0 * std::sqrt(eps / r);
        out.push_back(check_le("tail-sublevel-measure", meas.upper, rhs)
                          .with_input("theta0", theta0)
                          .with_input("eps", eps)
                          .with_input("mass", r)
                          .with_input("min_index", static_cast<double>(m))
                          .with_meta("lower", meas.lower)
                          .with_meta("boundary_cells", static_cast<double>(meas.boundary_cells)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Layer-cake bound: if eta <= phi <= r on Omega and
// meas{phi <= t} <= A sqrt(t / r) for t in [eta, r], then for d >= 0, p >= 1,
//   integral_Omega ds / (phi + d)^p
//     <= meas(Omega) / (r + d)^p + 2 A p / (eta^{p - 1/2} sqrt(r) + d^p).
// phi enters as equal-weight samples; the distribution hypothesis is checked
// empirically on a t-grid with one sample quantum of slack, and a violation
// is reported rather than thrown.

inline VerificationReport layer_cake_check(const std::vector<double>& phi, double omega_measure,
                                           double eta, double r, double A, double d, double p) {
    if (phi.empty()) throw precondition_error("need at least one sample of phi");
    if (!(omega_measure > 0)) throw precondition_error("domain measure must be positive");
    if (!(eta > 0 && eta <= r)) throw precondition_error("need 0 < eta <= r");
    if (!(A > 0)) throw precondition_error("distribution constant must be positive");
    if (!(d >= 0)) throw precondition_error("shift d must be nonnegative");
    if (!(p >= 1)) throw precondition_error("exponent p must be >= 1");

    std::vector<double> sorted = phi;
    std::sort(sorted.begin(), sorted.end());
    const double h = omega_measure / static_cast<double>(sorted.size());
    bool hypothesis_ok = sorted.front() >= eta && sorted.back() <= r;
    if (hypothesis_ok) {
        const int t_cells = 128;
        for (int j = 0; j <= t_cells && hypothesis_ok; ++j) {
            const double t = eta + (r - eta) * static_cast<double>(j) / t_cells;
            const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
            const double empirical = h * static_cast<double>(below);
            if (empirical > A * std::sqrt(t / r) + h) hypothesis_ok = false;
        }
    }

    detail::CompensatedSum lhs;
    for (double v : sorted) lhs.add(h / std::pow(v + d, p));
    const double rhs = omega_measure / std::pow(r + d, p) +
                       2.0 * A * p / (std::pow(eta, p - 0.5) * std::sqrt(r) + std::pow(d, p));
    auto rep = check_le("layer-cake", lhs.value(), rhs)
                   .with_input("eta", eta)
                   .with_input("r", r)
                   .with_input("A", A)
                   .with_input("d", d)
                   .with_input("p", p)
                   .with_input("samples", static_cast<double>(sorted.size()))
                   .with_meta("hypothesis", hypothesis_ok ? "holds" : "violated");
    if (!hypothesis_ok) rep.satisfied = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Dyadic window bound for the reciprocal ratio: for normalized f, p >= 1 and
// theta0 in (0, 1] with r(theta0) < 1,
//   integral_{theta0}^{2 theta0} |theta / (1 - f)|^p dtheta
//     <= C_p ( theta0 / W^p
//            + theta0^{2-p} r^{p-1} / (W^{2p-1} + r^{p-1} theta0 U^p) ),
// C_p = 3 p 2^{8p}, with W, U, r the moment functionals at cutoff 1/theta0.
// The second addend drops when r(theta0) = 0.

struct DyadicLpReport {
    double p = 0;
    double theta0 = 0;
    double integral = 0;
    double integral_error = 0;
    double rhs = 0;
    bool satisfied = false;
    VerificationReport report;
};

inline DyadicLpReport dyadic_lp_integral(const CoefficientSequence& f, double p, double theta0,
                                         const QuadratureOptions& opt = {}) {
    f.validate();
    if (!(p >= 1)) throw precondition_error("exponent p must be >= 1");
    if (!(theta0 > 0 && theta0 <= 1)) throw precondition_error("theta0 must lie in (0, 1]");
    if (std::abs(f.total_mass() - 1.0) > kNormTol)
        throw precondition_error("window bound requires unit mass");
    const auto mom = moment_functionals(f, theta0);
    if (!(mom.r < 1)) throw precondition_error("window bound requires r(theta0) < 1");

    const auto q = adaptive_quadrature(
        [&](double t) { return std::pow(modulus(reciprocal_ratio(f, t)), p); }, theta0,
        2 * theta0, opt);
    const double cp = 3.0 * p * std::pow(2.0, 8.0 * p);
    double rhs = cp * theta0 / std::pow(mom.W, p);
    if (mom.r > 0)
        rhs += cp * std::pow(theta0, 2.0 - p) * std::pow(mom.r, p - 1.0) /
               (std::pow(mom.W, 2.0 * p - 1.0) +
                std::pow(mom.r, p - 1.0) * theta0 * std::pow(mom.U, p));

    DyadicLpReport out;
    out.p = p;
    out.theta0 = theta0;
    out.integral = q.value;
    out.integral_error = q.error_estimate;
    out.rhs = rhs;
    out.report = check_le("dyadic-lp-window", q.value, rhs, q.error_estimate)
                     .with_input("p", p)
                     .with_input("theta0", theta0)
                     .with_meta("W", mom.W)
                     .with_meta("U", mom.U)
                     .with_meta("r", mom.r)
                     .with_meta("cutoff", static_cast<double>(mom.cutoff))
                     .with_meta("constant", cp);
    out.satisfied = out.report.satisfied;
    return out;
}

// ---------------------------------------------------------------------------
// Dyadic growth verdicts over partial-sum increments across the blocks
// [2^j m0, 2^{j+1} m0). The verdict inspects the last four consecutive block
// ratios. Constants are never estimated from the data: "diverging" means
// every examined ratio stayed >= 0.8, "converging" means every one decayed
// below 1/2, anything else is inconclusive.

enum class SeriesVerdict { Diverging, Converging, Inconclusive };

inline const char* to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::Diverging: return "diverging";
        case SeriesVerdict::Converging: return "converging";
        default: return "inconclusive";
    }
}

inline std::vector<double> consecutive_ratios(const std::vector<double>& blocks) {
    std::vector<double> r;
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const double prev = blocks[i - 1];
        r.push_back(prev == 0
                        ? (blocks[i] == 0 ? 0.0 : std::numeric_limits<double>::infinity())
                        : blocks[i] / prev);
    }
    return r;
}

struct DyadicSumSummary {
    std::vector<double> blocks;
    std::vector<double> ratios; // consecutive block ratios
    double total = 0;
    SeriesVerdict verdict = SeriesVerdict::Inconclusive;
};

inline SeriesVerdict dyadic_verdict(const std::vector<double>& blocks) {
    bool all_zero = true;
    for (double v : blocks)
        if (v != 0) all_zero = false;
    if (all_zero) return SeriesVerdict::Converging;
    const auto ratios = consecutive_ratios(blocks);
    if (ratios.empty()) return SeriesVerdict::Inconclusive;
    const std::size_t first = ratios.size() > 4 ? ratios.size() - 4 : 0;
    bool diverging = true, converging = true;
    for (std::size_t i = first; i < ratios.size(); ++i) {
        diverging = diverging && ratios[i] >= 0.8;
        converging = converging && ratios[i] <= 0.5;
    }
    if (diverging) return SeriesVerdict::Diverging;
    if (converging) return SeriesVerdict::Converging;
    return SeriesVerdict::Inconclusive;
}

inline DyadicSumSummary summarize_dyadic_blocks(std::vector<double> blocks) {
    DyadicSumSummary s;
    s.blocks = std::move(blocks);
    s.ratios = consecutive_ratios(s.blocks);
    detail::CompensatedSum total;
    for (double b : s.blocks) total.add(b);
    s.total = total.value();
    s.verdict = dyadic_verdict(s.blocks);
    return s;
}

// ---------------------------------------------------------------------------
// Two-sided L^1 comparison near zero: with W_n = W(1/n), r_n = r(1/n),
//   sum_{n >= m0} 1 / (n W_n + n^2 r_n)  and  sum_{n >= m0} 1 / (n W_n)
// bracket integral_0^{1/m0} dtheta / |1 - f| up to absolute constants that
// are never estimated here; the report presents truncations of both series
// and the integral over the matching dyadic pieces side by side, each with a
// growth verdict.

namespace detail {

// Forward walk over stored terms. Remaining mass comes from a backward
// suffix pass so it reaches exactly zero past the support instead of a
// rounding residue that would fake slow divergence.
struct PrefixWalker {
    const CoefficientSequence& f;
    std::size_t idx = 0;
    double cum_a = 0, cum_ka = 0, cum_k2a = 0;
    std::vector<double> suffix;

    explicit PrefixWalker(const CoefficientSequence& seq) : f(seq) {
        suffix.assign(f.terms.size() + 1, 0.0);
        CompensatedSum s;
        for (std::size_t i = f.terms.size(); i-- > 0;) {
            s.add(f.terms[i].second);
            suffix[i] = s.value();
        }
    }

    void advance_to(std::int64_t n) {
        while (idx < f.terms.size() && f.terms[idx].first <= n) {
            const double k = static_cast<double>(f.terms[idx].first);
            cum_a += f.terms[idx].second;
            cum_ka += k * f.terms[idx].second;
            cum_k2a += k * k * f.terms[idx].second;
            ++idx;
        }
    }

    double remaining() const { return suffix[idx] + f.tail_mass; }
};

} // namespace detail

struct L1TwoSidedReport {
    std::int64_t m0 = 0;
    int levels = 0;
    bool truncated_at_support = false;
    DyadicSumSummary lower_series;
    DyadicSumSummary upper_series;
    DyadicSumSummary integral;
    double integral_error = 0;
};

inline L1TwoSidedReport l1_two_sided(const CoefficientSequence& f, std::int64_t m0, int levels,
                                     const QuadratureOptions& opt = {}) {
    f.validate();
    if (m0 < 1 || m0 > (std::int64_t{1} << 30)) throw precondition_error("m0 out of range");
    if (levels < 1 || levels > 26) throw precondition_error("levels must lie in [1, 26]");
    if (std::abs(f.total_mass() - 1.0) > kNormTol)
        throw precondition_error("two-sided comparison requires unit mass");

    int L = levels;
    if (f.tail_mass > 0) {
        while (L >= 1 && m0 * (std::int64_t{1} << L) > f.max_index()) --L;
        if (L < 1)
            throw precondition_error("stored support too short for one dyadic level above m0");
    }

    MomentTable table(f);
    if (!(table.at_cutoff(m0).W > 0))
        throw precondition_error("W(1/m0) vanishes: no mass at or below m0");

    // Single walk over the stored terms keeps the n loop linear.
    detail::PrefixWalker walk(f);
    std::vector<double> lower_blocks, upper_blocks;
    std::int64_t n = m0;
    for (int j = 0; j < L; ++j) {
        detail::CompensatedSum bl, bu;
        const std::int64_t block_end = m0 * (std::int64_t{1} << (j + 1));
        for (; n < block_end; ++n) {
            walk.advance_to(n);
            const double w = static_cast<double>(n) * walk.cum_ka;
            const double rr = walk.remaining();
            bu.add(1.0 / w);
            bl.add(1.0 / (w + static_cast<double>(n) * static_cast<double>(n) * rr));
        }
        lower_blocks.push_back(bl.value());
        upper_blocks.push_back(bu.value());
    }

    L1TwoSidedReport out;
    out.m0 = m0;
    out.levels = L;
    out.truncated_at_support = L < levels;
    out.lower_series = summarize_dyadic_blocks(std::move(lower_blocks));
    out.upper_series = summarize_dyadic_blocks(std::move(upper_blocks));

    std::vector<double> iblocks;
    const double top = 1.0 / static_cast<double>(m0);
    for (int j = 0; j < L; ++j) {
        const auto q = adaptive_quadrature(
            [&](double t) { return 1.0 / modulus(one_minus_eval(f, t)); },
            std::ldexp(top, -(j + 1)), std::ldexp(top, -j), opt);
        iblocks.push_back(q.value);
        out.integral_error += q.error_estimate;
    }
    out.integral = summarize_dyadic_blocks(std::move(iblocks));
    return out;
}

// ---------------------------------------------------------------------------
// Coefficients proportional to log^s(k + 1) / k^2: unit mass split between
// `stored` explicit terms and an anonymous tail sized by the midpoint
// integral of the density, so W(1/n) grows like log^{1+s} n.

inline CoefficientSequence log_power_sequence(double s,
                                              std::int64_t stored = (std::int64_t{1} << 21)) {
    if (!(s >= 0)) throw precondition_error("log exponent must be nonnegative");
    if (stored < 2 || stored > (std::int64_t{1} << 26))
        throw precondition_error("stored support out of range");
    std::vector<double> raw(static_cast<std::size_t>(stored));
    detail::CompensatedSum sum;
    for (std::int64_t k = 1; k <= stored; ++k) {
        const double kk = static_cast<double>(k);
        const double v = std::pow(std::log(kk + 1.0), s) / (kk * kk);
        raw[static_cast<std::size_t>(k - 1)] = v;
        sum.add(v);
    }
    const double a = static_cast<double>(stored) + 0.5;
    const auto tail_q = adaptive_quadrature(
        [&](double t) { return std::pow(std::log(a / t + 1.0), s); }, 0.0, 1.0,
        {1e-12, 0.0, 40});
    const double tail_raw = tail_q.value / a;
    const double c = 1.0 / (sum.value() + tail_raw);

    CoefficientSequence f;
    f.terms.reserve(raw.size());
    for (std::int64_t k = 1; k <= stored; ++k)
        f.terms.push_back({k, c * raw[static_cast<std::size_t>(k - 1)]});
    f.normalized = true;
    f.tail_mass = std::max(0.0, 1.0 - f.stored_mass());
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Condensation bracket for positive decreasing q, alpha >= 0:
//   2^{-alpha} sum_{n=2^m}^{2^N} n^{alpha-1} q_n
//     <= sum_{n=m}^{N} 2^{alpha n} q_{2^n}
//     <= 2^{1+alpha} sum_{n=2^{m-1}+1}^{2^N} n^{alpha-1} q_n.
// Certified in 192-bit fixed point with directed rounding; alpha is
// restricted to half integers so square roots are the only irrational
// factors, and those are bracketed through integer square roots.

namespace detail {

inline constexpr int kCompareBits = 192;

inline const mpz_class& compare_scale() {
    static const mpz_class s = mpz_class(1) << kCompareBits;
    return s;
}

inline mpz_class floor_div(const mpz_class& num, const mpz_class& den) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

inline mpz_class ceil_div(const mpz_class& num, const mpz_class& den) {
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

// floor(2^kCompareBits * sqrt(v))
inline mpz_class sqrt_scaled(const mpz_class& v) {
    mpz_class t = v << (2 * kCompareBits);
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), t.get_mpz_t());
    return r;
}

// Integer window [lo, hi] containing x * 2^kCompareBits.
struct ScaledBracket {
    mpz_class lo = 0;
    mpz_class hi = 0;
    void accumulate(const ScaledBracket& t) {
        lo += t.lo;
        hi += t.hi;
    }
    double midpoint() const {
        return (lo.get_d() + hi.get_d()) * 0.5 * std::ldexp(1.0, -kCompareBits);
    }
};

inline ScaledBracket bracket_rational(const mpq_class& v) {
    ScaledBracket b;
    const mpz_class num = v.get_num() << kCompareBits;
    b.lo = floor_div(num, v.get_den());
    b.hi = ceil_div(num, v.get_den());
    return b;
}

// v * sqrt(root) with v rational, root a positive integer.
inline ScaledBracket bracket_sqrt_multiple(const mpq_class& v, const mpz_class& root) {
    const mpz_class s = sqrt_scaled(root);
    ScaledBracket b;
    b.lo = floor_div(v.get_num() * s, v.get_den());
    b.hi = ceil_div(v.get_num() * (s + 1), v.get_den());
    return b;
}

// v / sqrt(root).
inline ScaledBracket bracket_sqrt_quotient(const mpq_class& v, const mpz_class& root) {
    const mpz_class s = sqrt_scaled(root);
    const mpz_class num = v.get_num() << (2 * kCompareBits);
    ScaledBracket b;
    b.lo = floor_div(num, v.get_den() * (s + 1));
    b.hi = ceil_div(num, v.get_den() * s);
    return b;
}

// n^{alpha - 1} q with 2 alpha = twice_alpha.
inline ScaledBracket bracket_power_term(const mpq_class& q, std::int64_t n, long twice_alpha) {
    const long g2 = twice_alpha - 2; // twice the exponent of n
    if (g2 % 2 == 0) {
        const long e = g2 / 2;
        mpq_class w = q;
        if (e > 0) {
            mpz_class pw;
            mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(n),
                          static_cast<unsigned long>(e));
            w *= pw;
        } else if (e < 0) {
            mpz_class pw;
            mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(n),
                          static_cast<unsigned long>(-e));
            w /= pw;
        }
        return bracket_rational(w);
    }
    if (g2 > 0) {
        mpz_class pw;
        mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(n),
                      static_cast<unsigned long>(g2));
        return bracket_sqrt_multiple(q, pw);
    }
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(n),
                  static_cast<unsigned long>(-g2));
    return bracket_sqrt_quotient(q, pw);
}

} // namespace detail

// Lambdas passed as q must declare an mpq_class return type; a deduced gmp
// expression template would dangle once the temporaries die.
inline VerificationReport dyadic_block_compare(const std::function<mpq_class(std::int64_t)>& q,
                                               double alpha, int m, int N) {
    if (!q) throw precondition_error("sequence handle must be callable");
    if (!(alpha >= 0 && alpha <= 8)) throw precondition_error("alpha must lie in [0, 8]");
    if (m < 1) throw precondition_error("m must be >= 1");
    if (N < m || N > 26) throw precondition_error("need m <= N <= 26");
    const double twice = 2.0 * alpha;
    if (twice != std::floor(twice))
        throw precondition_error("alpha must be a half integer for certified comparison");
    const long twice_alpha = static_cast<long>(twice);

    const std::int64_t first_right = (std::int64_t{1} << (m - 1)) + 1;
    const std::int64_t first_left = std::int64_t{1} << m;
    const std::int64_t top = std::int64_t{1} << N;
    const mpz_class two = 2;

    detail::ScaledBracket left, mid, right;
    mpq_class prev;
    bool have_prev = false;
    std::int64_t next_pow = first_left;
    int pow_exp = m;
    for (std::int64_t n = first_right; n <= top; ++n) {
        mpq_class v = q(n);
        v.canonicalize();
        if (!(v > 0))
            throw precondition_error("sequence values must be positive at index " +
                                     std::to_string(n));
        if (have_prev && v > prev)
            throw precondition_error("sequence not decreasing at index " + std::to_string(n));
        const auto term = detail::bracket_power_term(v, n, twice_alpha);
        right.accumulate(term);
        if (n >= first_left) left.accumulate(term);
        if (n == next_pow) {
            // middle term 2^{alpha j} q_{2^j} at j = pow_exp
            const long num2 = twice_alpha * pow_exp;
            mpq_class w = v;
            if (num2 % 2 == 0) {
                w *= mpz_class(mpz_class(1) << (num2 / 2));
                mid.accumulate(detail::bracket_rational(w));
            } else {
                w *= mpz_class(mpz_class(1) << ((num2 - 1) / 2));
                mid.accumulate(detail::bracket_sqrt_multiple(w, two));
            }
            ++pow_exp;
            next_pow <<= 1;
        }
        prev = std::move(v);
        have_prev = true;
    }

    // left *= 2^{-alpha}, right *= 2^{1+alpha}, with sqrt(2) bracketed when
    // alpha is half-odd.
    const mpz_class& scale = detail::compare_scale();
    const mpz_class s2 = detail::sqrt_scaled(two);
    if (twice_alpha % 2 == 0) {
        const long e = twice_alpha / 2;
        left.lo = detail::floor_div(left.lo, mpz_class(1) << e);
        left.hi = detail::ceil_div(left.hi, mpz_class(1) << e);
        right.lo <<= (1 + e);
        right.hi <<= (1 + e);
    } else {
        const long e = (twice_alpha - 1) / 2;
        left.lo = detail::floor_div(left.lo * scale, (mpz_class(1) << e) * (s2 + 1));
        left.hi = detail::ceil_div(left.hi * scale, (mpz_class(1) << e) * s2);
        right.lo = detail::floor_div((right.lo << (1 + e)) * s2, scale);
        right.hi = detail::ceil_div((right.hi << (1 + e)) * (s2 + 1), scale);
    }

    const bool lower_ok = left.hi <= mid.lo;
    const bool upper_ok = mid.hi <= right.lo;
    auto rep = check_le("dyadic-series-compare", left.midpoint(), right.midpoint());
    rep.satisfied = lower_ok && upper_ok;
    rep.with_input("alpha", alpha)
        .with_input("m", static_cast<double>(m))
        .with_input("N", static_cast<double>(N))
        .with_meta("middle", mid.midpoint())
        .with_meta("left_below_middle", lower_ok ? "certified" : "violated")
        .with_meta("middle_below_right", upper_ok ? "certified" : "violated");
    return rep;
}

// ---------------------------------------------------------------------------
// L^p membership checks for the reciprocal ratio, p > 2, against the critical
// exponent p* = 1 + 1/(1 - nu) of the weight k^nu:
//   (i)  convergence indicator for
//        sum n^{p-2} r_n^{p-1} / (n W_n^{2p-1} + r_n^{p-1} U_n^p),
//   (ii) the weighted norm that places f in the algebra,
//   (iii) the unconditional L^2 certificate
//        integral_{-1/n0}^{1/n0} |theta / (1 - f)|^2 <= pi^3 / (a_{n0} n0^2).

struct LpCriteriaReport {
    double p = 0;
    double nu = 0;
    double p_star = 0;
    double weighted_norm = std::numeric_limits<double>::quiet_NaN();
    std::int64_t n0 = 0;
    DyadicSumSummary membership_sum;
    bool sum_truncated_at_support = false;
    double l2_integral = 0;
    double l2_error = 0;
    double l2_bound = 0;
    VerificationReport l2_report;
};

inline LpCriteriaReport lp_criteria(const CoefficientSequence& f, double nu, double p,
                                    int levels = 14, const QuadratureOptions& opt = {}) {
    f.validate();
    if (!(p > 2)) throw precondition_error("membership criterion needs p > 2");
    if (!(nu > 0 && nu < 1)) throw precondition_error("weight exponent nu must lie in (0, 1)");
    if (levels < 1 || levels > 26) throw precondition_error("levels must lie in [1, 26]");
    if (std::abs(f.total_mass() - 1.0) > kNormTol)
        throw precondition_error("criteria require unit mass");
    std::int64_t n0 = 0;
    double a0 = 0;
    for (const auto& [k, a] : f.terms)
        if (a > 0) {
            n0 = k;
            a0 = a;
            break;
        }
    if (n0 == 0) throw precondition_error("sequence has empty support");

    LpCriteriaReport out;
    out.p = p;
    out.nu = nu;
    out.p_star = 1.0 + 1.0 / (1.0 - nu);
    out.n0 = n0;
    try {
        out.weighted_norm = weighted_norm(f, WeightSpec<double>::power(nu));
    } catch (const precondition_error&) {
        // anonymous tail: norm stays NaN
    }

    int L = levels;
    if (f.tail_mass > 0) {
        while (L >= 1 && n0 * (std::int64_t{1} << L) > f.max_index()) --L;
        if (L < 1)
            throw precondition_error("stored support too short for one dyadic level above n0");
    }
    out.sum_truncated_at_support = L < levels;

    detail::PrefixWalker walk(f);
    std::vector<double> blocks;
    std::int64_t n = n0;
    for (int j = 0; j < L; ++j) {
        detail::CompensatedSum bs;
        const std::int64_t block_end = n0 * (std::int64_t{1} << (j + 1));
        for (; n < block_end; ++n) {
            walk.advance_to(n);
            const double nn = static_cast<double>(n);
            const double rr = walk.remaining();
            const double rp = std::pow(rr, p - 1.0);
            const double den =
                nn * std::pow(walk.cum_ka, 2.0 * p - 1.0) + rp * std::pow(walk.cum_k2a, p);
            bs.add(std::pow(nn, p - 2.0) * rp / den);
        }
        blocks.push_back(bs.value());
    }
    out.membership_sum = summarize_dyadic_blocks(std::move(blocks));

    const auto q = adaptive_quadrature(
        [&](double t) {
            const double m = modulus(reciprocal_ratio(f, t));
            return m * m;
        },
        0.0, 1.0 / static_cast<double>(n0), opt);
    out.l2_integral = 2.0 * q.value;
    out.l2_error = 2.0 * q.error_estimate;
    out.l2_bound = kPi * kPi * kPi / (a0 * static_cast<double>(n0) * static_cast<double>(n0));
    out.l2_report = check_le("l2-certificate", out.l2_integral, out.l2_bound, out.l2_error)
                        .with_input("n0", static_cast<double>(n0))
                        .with_input("a_n0", a0);
    return out;
}

// Window lower bounds sum theta_m^p width_m / bound_m^p for windows on which
// |1 - f| <= bound_m; their growth along shrinking theta_m exhibits escape
// from L^p.
inline std::vector<double> lp_window_lower_sums(const std::vector<double>& theta,
                                                const std::vector<double>& width,
                                                const std::vector<double>& one_minus_bound,
                                                double p) {
    if (theta.size() != width.size() || theta.size() != one_minus_bound.size())
        throw precondition_error("window arrays must have equal length");
    if (!(p >= 1)) throw precondition_error("exponent p must be >= 1");
    std::vector<double> out;
    out.reserve(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] > 0 && width[i] > 0 && one_minus_bound[i] > 0))
            throw precondition_error("window data must be positive");
        out.push_back(std::pow(theta[i], p) * width[i] / std::pow(one_minus_bound[i], p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Epsilon-set bound for aperiodic f: with E_eps = {|1 - f| <= eps},
//   meas(E_eps) <= c_alpha eps^alpha,
//   c_alpha = ( integral_{-pi}^{pi} |theta|^{gamma/alpha} / |1 - f| )^alpha
//             ( integral_0^pi theta^{-gamma/(1-alpha)} )^{1-alpha},
// gamma in (0, 1 - alpha). The second factor is a closed form; the first is
// integrated over [1, pi] plus dyadic blocks toward zero, with a geometric
// extrapolation of the remaining tail folded into the error term.

struct EpsilonSetReport {
    double alpha = 0;
    double gamma = 0;
    double moment_integral = 0;
    double moment_error = 0;
    int moment_levels = 0;
    double weight_integral = 0;
    double c_alpha = 0;
    std::vector<VerificationReport> checks;
};

inline EpsilonSetReport epsilon_set_bound(const CoefficientSequence& f, double alpha,
                                          double gamma, const std::vector<double>& eps_grid,
                                          long grid = 100000, int max_levels = 48,
                                          const QuadratureOptions& opt = {}) {
    f.validate();
    if (f.tail_mass > 0) throw precondition_error("anonymous tail has no pointwise evaluation");
    if (std::abs(f.total_mass() - 1.0) > kNormTol)
        throw precondition_error("epsilon-set bound requires unit mass");
    if (!is_aperiodic(f)) throw precondition_error("epsilon-set bound requires aperiodic support");
    if (!(alpha > 0 && alpha < 1)) throw precondition_error("alpha must lie in (0, 1)");
    if (!(gamma > 0 && gamma < 1 - alpha))
        throw precondition_error("gamma must lie in (0, 1 - alpha)");
    if (max_levels < 2 || max_levels > 400) throw precondition_error("max_levels out of range");

    const double s = gamma / (1.0 - alpha);
    EpsilonSetReport out;
    out.alpha = alpha;
    out.gamma = gamma;
    out.weight_integral = std::pow(kPi, 1.0 - s) / (1.0 - s);

    const auto integrand = [&](double t) {
        return std::pow(t, gamma / alpha) / modulus(one_minus_eval(f, t));
    };
    detail::CompensatedSum half_moment;
    double err = 0;
    {
        const auto head = adaptive_quadrature(integrand, 1.0, kPi, opt);
        half_moment.add(head.value);
        err += head.error_estimate;
    }
    std::vector<double> blocks;
    int level = 0;
    bool settled = false;
    for (int j = 1; j <= max_levels; ++j) {
        const auto blk =
            adaptive_quadrature(integrand, std::ldexp(1.0, -j), std::ldexp(1.0, -(j - 1)), opt);
        half_moment.add(blk.value);
        err += blk.error_estimate;
        blocks.push_back(blk.value);
        level = j;
        if (blk.value <= 1e-15 * half_moment.value()) {
            settled = true;
            break;
        }
    }
    if (!settled) {
        // geometric tail from the last two observed block ratios
        double rho = 0;
        const std::size_t k = blocks.size();
        for (std::size_t i = (k > 2 ? k - 2 : 1); i < k; ++i)
            rho = blocks[i - 1] > 0 ? std::max(rho, blocks[i] / blocks[i - 1]) : 2.0;
        if (!(rho > 0 && rho < 0.95))
            throw quadrature_error("moment integral did not settle by dyadic level " +
                                   std::to_string(level));
        const double tail = blocks.back() * rho / (1.0 - rho);
        half_moment.add(tail);
        err += tail;
    }
    out.moment_integral = 2.0 * half_moment.value();
    out.moment_error = 2.0 * err;
    out.moment_levels = level;
    out.c_alpha =
        std::pow(out.moment_integral, alpha) * std::pow(out.weight_integral, 1.0 - alpha);

    const double lipschitz = derivative_bound(f);
    const auto samples = cell_center_samples(
        [&](double t) { return modulus(one_minus_eval(f, t)); }, -kPi, kPi, grid);
    out.checks.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        if (!(eps > 0)) throw precondition_error("eps must be positive");
        const auto meas = certified_sublevel_from_samples(samples, -kPi, kPi, eps, lipschitz);
        out.checks.push_back(
            check_le("epsilon-set-bound", meas.upper, out.c_alpha * std::pow(eps, alpha))
                .with_input("alpha", alpha)
                .with_input("gamma", gamma)
                .with_input("eps", eps)
                .with_meta("lower", meas.lower)
                .with_meta("c_alpha", out.c_alpha)
                .with_meta("boundary_cells", static_cast<double>(meas.boundary_cells)));
    }
    return out;
}

} // namespace rlab
