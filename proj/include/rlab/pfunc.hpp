#pragma once

// Discrete Bernstein functions phi(z) = z + c + sum mass (1 - e^{-z t}), the
// vanishing-ratio probe i theta / (i theta - (1 - f(theta))), and a wrapper
// that grows an unbounded-variation witness out of a weight handle beta via
// the flat-point induction, then reads the probe along the construction's
// theta_m.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rlab/construct.hpp"
#include "rlab/cplx.hpp"
#include "rlab/errors.hpp"
#include "rlab/report.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

// ---------------------------------------------------------------------------
// DiscreteBernstein: drift c plus a finite atomic measure on (0, inf).

template <class R>
struct BernsteinAtom {
    R t;    // location, > 0
    R mass; // >= 0
};

template <class R>
struct DiscreteBernstein {
    R c{};
    std::vector<BernsteinAtom<R>> atoms;

    void validate() const {
        if (!(c >= R(0))) throw precondition_error("drift must be nonnegative");
        for (const auto& a : atoms) {
            if (!(a.t > R(0))) throw precondition_error("atom locations must be positive");
            if (!(a.mass >= R(0))) throw precondition_error("atom masses must be nonnegative");
        }
    }
    R total_mass() const {
        R s(0);
        for (const auto& a : atoms) s += a.mass;
        return s;
    }
    R first_moment() const {
        R s(0);
        for (const auto& a : atoms) s += a.t * a.mass;
        return s;
    }
};

// phi(z) for Re z >= 0. With w = z t = a + i b the kernel splits as
//   Re(1 - e^{-w}) = -expm1(-a) + e^{-a} 2 sin^2(b/2),
//   Im(1 - e^{-w}) = e^{-a} sin(b),
// so both real-part pieces are nonnegative for a >= 0 and the value is an
// exact zero at z = 0.
template <class R>
Cplx<R> bernstein_eval(const DiscreteBernstein<R>& phi, const Cplx<R>& z) {
    using std::exp;
    using std::expm1;
    using std::sin;
    phi.validate();
    if (!(z.re >= R(0))) throw precondition_error("bernstein evaluation needs Re z >= 0");
    Cplx<R> acc{z.re + phi.c, z.im};
    for (const auto& at : phi.atoms) {
        R a = z.re * at.t;
        R b = z.im * at.t;
        R damp = exp(-a);
        R sh = sin(b / R(2));
        acc.re = acc.re + at.mass * (-expm1(-a) + damp * R(2) * sh * sh);
        acc.im = acc.im + at.mass * damp * sin(b);
    }
    return acc;
}

// nu on the support of F: one atom per term, drift 0. Then
// phi(-i theta) + i theta reproduces 1 - F(theta) term by term.
template <class R>
DiscreteBernstein<R> bernstein_from_poly(const ExpPolynomial<R>& F) {
    F.validate();
    DiscreteBernstein<R> phi;
    phi.c = R(0);
    phi.atoms.reserve(F.terms.size());
    for (const auto& t : F.terms) phi.atoms.push_back({t.freq, t.weight});
    return phi;
}

// ---------------------------------------------------------------------------
// Vanishing-ratio probe  i theta / (i theta - (1 - f(theta))).

namespace detail {

template <class R>
void require_probe_thetas(const std::vector<R>& thetas) {
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (!(thetas[i] > R(0))) throw precondition_error("probe thetas must be positive");
        if (i > 0 && !(thetas[i] < thetas[i - 1]))
            throw precondition_error("probe thetas must be strictly decreasing");
    }
}

// The pole guard is relative to theta: probe points from extended-precision
// constructions sit far below any absolute threshold a double could express.
template <class R>
Cplx<R> ratio_from_one_minus(const R& theta, const Cplx<R>& om) {
    Cplx<R> den{-om.re, theta - om.im};
    if (modulus(den) < real_traits<R>::from_double(1e-300) * theta)
        throw pole_error("i theta - (1 - f) vanishes at a probe point");
    return Cplx<R>{R(0), theta} / den;
}

// 1 - p(theta) with wild terms folded into a remainder bound. A term whose
// phase freq * theta is beyond cheap argument reduction and whose weight
// cannot move the value at twice working precision relative to theta is
// bounded by 2 * weight instead of being evaluated; everything else uses the
// half-angle kernel verbatim.
template <class R>
struct GuardedOneMinus {
    Cplx<R> value;
    R skipped; // bound on the modulus of the folded-out terms
};

template <class R>
GuardedOneMinus<R> one_minus_eval_guarded(const ExpPolynomial<R>& p, const R& theta) {
    using std::cos;
    using std::sin;
    R negligible = theta * real_traits<R>::eps() * real_traits<R>::eps();
    R phase_cap = real_traits<R>::from_double(4.0e18);
    Cplx<R> z{R(0), R(0)};
    R skipped(0);
    for (const auto& t : p.terms) {
        R phi = t.freq * theta;
        if (phi > phase_cap && R(2) * t.weight <= negligible) {
            skipped += R(2) * t.weight;
            continue;
        }
        R h = phi / R(2);
        R sh = sin(h);
        z += Cplx<R>{t.weight * R(2) * sh * sh, -t.weight * R(2) * sh * cos(h)};
    }
    z.re = z.re + (R(1) - p.mass());
    return {z, skipped};
}

} // namespace detail

template <class R>
std::vector<Cplx<R>> vanishing_ratio_probe(const ExpPolynomial<R>& f, const std::vector<R>& thetas) {
    detail::require_probe_thetas(thetas);
    std::vector<Cplx<R>> out;
    out.reserve(thetas.size());
    for (const R& th : thetas)
        out.push_back(detail::ratio_from_one_minus(th, detail::one_minus_eval_guarded(f, th).value));
    return out;
}

inline std::vector<Cplx<double>> vanishing_ratio_probe(const CoefficientSequence& f,
                                                       const std::vector<double>& thetas) {
    detail::require_probe_thetas(thetas);
    std::vector<Cplx<double>> out;
    out.reserve(thetas.size());
    for (double th : thetas) out.push_back(detail::ratio_from_one_minus(th, one_minus_eval(f, th)));
    return out;
}

// |1 - ratio| per probe point. Along flat points this is
// |1 - f| / |i theta - (1 - f)|, the quantity the construction drives to 0;
// the ratios themselves tend to 1 there, so the probe limit cannot be the 0
// a bounded-variation p-function with g(inf) = 0 would force.
template <class R>
std::vector<R> probe_deviations(const std::vector<Cplx<R>>& ratios) {
    std::vector<R> out;
    out.reserve(ratios.size());
    for (const auto& r : ratios) out.push_back(modulus(Cplx<R>{R(1) - r.re, -r.im}));
    return out;
}

// ---------------------------------------------------------------------------
// hww_construct: from a weight handle beta with t beta(t) >= 1 and beta -> 0,
// build F by the flat-point induction with eps_k = beta(k), read nu off F's
// coefficients, certify the weighted first-moment budget, and run the probe
// along the trace's theta_m.

namespace detail {

// beta audited on a 1000-point log grid over [1, 1e6]: positive, t beta >= 1
// within 1e-12, overall decay. Returns whether the grid is nonincreasing,
// which lets the induction read sup_{k <= n} beta(k) off beta(1).
template <class R>
bool audit_beta(const RealFn<R>& beta) {
    using std::exp;
    using std::log;
    const int pts = 1000;
    R tol = real_traits<R>::from_double(1e-12);
    R lhi = log(real_traits<R>::from_double(1e6));
    R first(0), prev(0);
    bool monotone = true;
    for (int j = 0; j < pts; ++j) {
        R t = exp(lhi * R(static_cast<double>(j)) / R(static_cast<double>(pts - 1)));
        R v = beta(t);
        if (!(v > R(0))) throw precondition_error("beta must be positive on the audit grid");
        if (t * v < R(1) - tol)
            throw precondition_error("beta must keep t * beta(t) >= 1 on the audit grid");
        if (j == 0)
            first = v;
        else if (v > prev)
            monotone = false;
        prev = v;
    }
    if (!(prev < first))
        throw precondition_error("beta shows no decay on the audit grid; it must vanish at infinity");
    return monotone;
}

// Smallest s with beta(s) <= x, bisected in log2 s. Returns infinity when the
// crossing lies beyond the exponent range, which the induction converts into
// an honest precision_exhausted stop.
template <class R>
RealFn<R> log2_inverse(RealFn<R> beta) {
    return [beta = std::move(beta)](const R& x) -> R {
        using std::pow;
        R inf = real_traits<R>::from_double(std::numeric_limits<double>::infinity());
        if (!(x > R(0))) return inf;
        if (beta(R(1)) <= x) return R(1);
        R lo(0), hi(64);
        while (true) {
            R s = pow(R(2), hi);
            if (!real_traits<R>::finite(s)) return inf;
            if (beta(s) <= x) break;
            lo = hi;
            hi = hi * R(2);
        }
        for (int i = 0; i < 128; ++i) {
            R mid = (lo + hi) / R(2);
            if (beta(pow(R(2), mid)) <= x)
                hi = mid;
            else
                lo = mid;
        }
        return pow(R(2), hi);
    };
}

} // namespace detail

template <class R>
struct HwwResult {
    DiscreteBernstein<R> phi; // nu on the integers from F's coefficients, c = 0
    ConstructionTrace<R> trace;
    BuildStatus status = BuildStatus::complete;
    int stages_completed = 0;
    std::string message; // set when the schedule stopped early
    std::vector<R> thetas;
    std::vector<Cplx<R>> probe;
    std::vector<R> deviation; // |1 - probe| per theta_m
    R skipped_bound{};        // largest folded-out term bound across probes
    VerificationReport budget;
};

template <class R>
HwwResult<R> hww_construct(RealFn<R> beta, double eps, int M) {
    using std::max;
    using std::pow;
    if (!(eps > 0)) throw precondition_error("eps must be positive");
    if (M < 1) throw precondition_error("at least one stage must be requested");

    EpsSeq<R> seq;
    seq.monotone_nonincreasing = detail::audit_beta<R>(beta);
    seq.value = beta;
    seq.inverse_hint = detail::log2_inverse<R>(beta);

    ExpPolynomial<R> f0;
    f0.terms = {{R(1), R(1) / R(2)}, {R(2), R(1) / R(2)}};

    BuildConfig<R> config = BuildConfig<R>::defaults();
    // flat points sink to exponents around -1/beta; allow the full extended
    // range when the type has one, staying above where theta itself degrades
    R deep = pow(R(2), real_traits<R>::from_double(-9.0e17));
    if (deep > R(0)) config.theta_floor = deep;

    BuildResult<R> built = betak_counterexample(f0, eps, seq, M, config);

    HwwResult<R> out;
    out.status = built.status;
    out.stages_completed = static_cast<int>(built.trace.stages.size());
    out.message = std::move(built.message);
    out.trace = std::move(built.trace);
    out.phi = bernstein_from_poly(out.trace.final);

    WeightSpec<R> wt = WeightSpec<R>::index_scaled(seq.value);
    R moment = weighted_norm(out.trace.final, wt);
    R budget = weighted_norm(f0, wt);
    for (const auto& dm : out.trace.schedule) budget += dm;
    out.budget = check_le("weighted-moment-budget", to_double(moment), to_double(budget), 1e-12)
                     .with_input("eps", eps)
                     .with_input("stages", static_cast<double>(out.stages_completed))
                     .with_meta("seed_norm", to_double(weighted_norm(f0, wt)));

    out.thetas.reserve(out.trace.stages.size());
    for (const auto& st : out.trace.stages) out.thetas.push_back(st.window.theta_m);
    out.skipped_bound = R(0);
    for (const R& th : out.thetas) {
        auto om = detail::one_minus_eval_guarded(out.trace.final, th);
        out.probe.push_back(detail::ratio_from_one_minus(th, om.value));
        out.skipped_bound = max(out.skipped_bound, om.skipped);
    }
    out.deviation = probe_deviations(out.probe);
    return out;
}

} // namespace rlab
