#pragma once

// Constructive machinery: attach a rotation term to a polynomial in A+ so the
// result is nearly 1 on a prescribed window near theta = 0 while moving little
// in a weighted norm, then iterate to build counterexample generating
// functions. Everything is templated on the real type; binary64 runs use the
// documented precision floor, extended precision extends depth.

#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rlab/cplx.hpp"
#include "rlab/errors.hpp"
#include "rlab/rootfind.hpp"
#include "rlab/seqcore.hpp"

namespace rlab {

template <class R>
using RealFn = std::function<R(const R&)>;

// ---------------------------------------------------------------------------
// Rotation coefficient d_{lambda,gamma} = sin(lambda/2) cos((gamma+lambda)/2)
// / sin(gamma/2), with its certified range and the certified modulus of
// (1 - e^{i lambda}) + d (1 - e^{-i gamma}) = 2 sin(lambda/2) sin((gamma+lambda)/2) e^{i(lambda-gamma)/2}.

template <class R>
R croft_coefficient(const R& lambda, const R& gamma) {
    using std::cos;
    using std::sin;
    // lambda = freq * theta0 can round a few ulp past 1 when theta0 sits at
    // the 1/deg boundary
    if (!(lambda > R(0)) || lambda > R(1) + real_traits<R>::eps() * R(8) || !(gamma > R(0)) || gamma > R(1))
        throw precondition_error("croft coefficient needs lambda and gamma in (0, 1]");
    R d = sin(lambda / R(2)) * cos((gamma + lambda) / R(2)) / sin(gamma / R(2));
    R slack = real_traits<R>::from_double(1e-12);
    if (d < lambda / (R(4) * gamma) - slack || d > lambda / gamma + slack)
        throw certification_error("rotation coefficient left its certified range");
    Cplx<R> comb = Cplx<R>{R(2) * sin(lambda / R(2)) * sin(lambda / R(2)), -sin(lambda)} +
                   Cplx<R>{R(2) * sin(gamma / R(2)) * sin(gamma / R(2)), sin(gamma)} * d;
    if (modulus(comb) > lambda * (gamma + lambda) / R(2) + slack)
        throw certification_error("rotation combination modulus exceeded its certified bound");
    return d;
}

// Closed form of the combination modulus, used as an independent oracle.
template <class R>
R croft_combination_modulus(const R& lambda, const R& gamma) {
    using std::sin;
    return R(2) * sin(lambda / R(2)) * sin((gamma + lambda) / R(2));
}

// ---------------------------------------------------------------------------
// attach_rotation: P -> (sum a_k e^{ik theta} + d e^{i(2pi-gamma) theta/theta0})
// / (1 + d), nearly 1 at theta0.

template <class R>
struct RotationResult {
    R d;
    ExpPolynomial<R> Q;
    R one_minus_at_theta0; // |1 - Q(theta0)|
    R derivative;          // sum freq * weight of Q
};

namespace detail {

template <class R>
void require_a_plus(const ExpPolynomial<R>& p) {
    using std::fabs;
    p.validate();
    if (fabs(p.mass() - R(1)) > real_traits<R>::from_double(1e-12))
        throw precondition_error("polynomial mass must be 1");
}

// Aperiodicity of an integer-frequency polynomial. Frequencies must be exact
// integers; gcd is decided over those below 2^62 (constructions always keep
// the seed's small frequencies).
template <class R>
void require_aperiodic_poly(const ExpPolynomial<R>& p) {
    using std::floor;
    std::int64_t g = 0;
    for (const auto& t : p.terms) {
        if (!(floor(t.freq) == t.freq))
            throw precondition_error("aperiodicity needs integer frequencies");
        if (t.weight <= R(0)) continue;
        if (t.freq < R(4.0e18)) g = std::gcd(g, static_cast<std::int64_t>(to_double(t.freq)));
        if (g == 1) return;
    }
    if (g != 1) throw precondition_error("polynomial support has gcd > 1");
}

} // namespace detail

// freq_override < 0 keeps the real frequency (2pi - gamma)/theta0; a
// nonnegative value stores that exact frequency instead (integer-frequency
// constructions pass their target index, which the root equation matches to
// within the root residual).
template <class R>
RotationResult<R> attach_rotation(const ExpPolynomial<R>& P, const R& theta0, const R& gamma,
                                  const R& freq_override = R(-1)) {
    detail::require_a_plus(P);
    if (P.terms.empty()) throw precondition_error("polynomial must be nonempty");
    R n = P.degree();
    if (!(theta0 > R(0)) || theta0 * n > R(1) + real_traits<R>::eps() * R(4))
        throw precondition_error("theta0 must lie in (0, 1/deg]");
    if (!(gamma > R(0)) || gamma > R(1)) throw precondition_error("gamma must lie in (0, 1]");

    R d(0);
    for (const auto& t : P.terms) d += t.weight * croft_coefficient(t.freq * theta0, gamma);

    R pi2 = R(2) * real_traits<R>::pi();
    R freq = freq_override >= R(0) ? freq_override : (pi2 - gamma) / theta0;
    ExpPolynomial<R> Q;
    Q.terms.reserve(P.terms.size() + 1);
    R scale = R(1) / (R(1) + d);
    for (const auto& t : P.terms) Q.terms.push_back({t.freq, t.weight * scale});
    Q.terms.push_back({freq, d * scale});
    Q.validate();

    R slack = real_traits<R>::from_double(1e-12);
    if (d < theta0 / (R(4) * gamma) - slack || d > n * theta0 / gamma + slack)
        throw certification_error("attached coefficient left its certified range");
    R one_minus = modulus(one_minus_eval(Q, theta0));
    if (one_minus > R(2) * n * theta0 * gamma + slack)
        throw certification_error("flatness at theta0 exceeded its certified bound");
    R deriv = derivative_bound(Q);
    if (deriv > n * (R(1) + pi2 / gamma) + slack)
        throw certification_error("derivative bound exceeded its certified value");
    return {d, std::move(Q), one_minus, deriv};
}

// ---------------------------------------------------------------------------
// Window certification: certified sup of |1 - Q| over [center - h, center + h]
// by dense sampling plus Lipschitz slack. When the sample spacing falls under
// a few ulp of the center the samples would collapse onto it, so the
// single-point certificate |1 - Q(center)| + L h takes over; both forms cover
// the whole window for the stored center.

template <class R>
struct WindowCertificate {
    R sampled_max;
    R slack;
    R certified_sup;
    int points = 0;
    bool single_point = false;
};

template <class R>
WindowCertificate<R> certify_window_sup(const ExpPolynomial<R>& Q, const R& center, const R& half_width,
                                        int npts = 101) {
    using std::fabs;
    using std::max;
    if (npts < 3) npts = 3;
    R L = derivative_bound(Q);
    R at_center = modulus(one_minus_eval(Q, center));
    if (!(half_width > R(0))) return {at_center, R(0), at_center, 1, true};
    R ulp = real_traits<R>::eps() * center;
    R spacing = (half_width * R(2)) / R(static_cast<double>(npts - 1));
    if (spacing <= ulp * R(8)) {
        R slack = L * half_width;
        return {at_center, slack, at_center + slack, 1, true};
    }
    R worst = at_center;
    for (int i = 0; i < npts; ++i) {
        R x = center + spacing * R(static_cast<double>(i) - static_cast<double>(npts - 1) / 2);
        worst = max(worst, modulus(one_minus_eval(Q, x)));
    }
    R slack = L * (spacing / R(2) + ulp * R(2));
    return {worst, slack, worst + slack, npts, false};
}

// ---------------------------------------------------------------------------
// Flat windows and construction traces.

template <class R>
struct FlatWindow {
    R theta_m;    // window center
    R half_width; // >= 0; 0 means a point certificate
    R bound;      // certified sup of |1 - Q| on the window
    R m;          // stage index (exact integer stored in R)

    void validate() const {
        if (!(half_width >= R(0)) || !(bound > R(0)))
            throw precondition_error("window needs half_width >= 0 and bound > 0");
        R pi2 = R(2) * real_traits<R>::pi();
        if (m * theta_m > pi2 * (R(1) + real_traits<R>::from_double(1e-12)))
            throw precondition_error("window violates m * theta_m <= 2 pi");
    }
};

template <class R>
struct StageRecord {
    ExpPolynomial<R> poly; // polynomial after this stage
    FlatWindow<R> window;
    R norm_distance; // ||P_{N-1} - P_N|| in the construction's norm
    R ratio;         // |1 - poly(theta_m)| / theta_m at this stage
    R gamma;
    R d;
    R root_residual; // |tau(theta_m) - m|
};

template <class R>
struct ConstructionTrace {
    std::vector<StageRecord<R>> stages;
    std::vector<R> schedule; // delta_m
    ExpPolynomial<R> final;
};

enum class BuildStatus { complete, precision_exhausted };

template <class R>
struct BuildResult {
    ConstructionTrace<R> trace;
    BuildStatus status = BuildStatus::complete;
    int failed_stage = -1; // 1-based stage that could not be completed
    std::string message;
};

template <class R>
struct BuildConfig {
    R theta_floor;
    int window_samples = 101;
    int grid_points = 10000;
    std::int64_t scan_limit = 1000000;

    static BuildConfig defaults() {
        using std::pow;
        BuildConfig c;
        long bits = real_traits<R>::precision_bits();
        if (bits <= 53)
            c.theta_floor = real_traits<R>::from_double(1e-12);
        else
            c.theta_floor = pow(R(2), R(static_cast<double>(-bits / 2)));
        return c;
    }
};

// ---------------------------------------------------------------------------
// Theta0 search: largest theta whose whole grid tail down to the floor
// satisfies cond, shrunk by the safety factor. Grid is geometric with
// config.grid_points points between floor and 1.

namespace detail {

template <class R, class Cond>
R find_theta0(Cond&& cond, const R& floor, int grid_points, const char* what) {
    using std::exp;
    using std::log;
    if (!(floor > R(0)) || floor >= R(1)) throw precondition_error("theta floor must lie in (0, 1)");
    R lf = log(floor);
    R best(-1);
    // walk from the floor upward; the admissible block must touch the floor
    for (int j = grid_points - 1; j >= 0; --j) {
        R theta = exp(lf * R(static_cast<double>(j)) / R(static_cast<double>(grid_points - 1)));
        if (cond(theta))
            best = theta;
        else
            break;
    }
    if (best < R(0)) throw root_error(std::string("no admissible region above the precision floor for ") + what);
    return best / R(2);
}

// Grid realization of "goes to zero": overall decay by 3x plus a
// nonincreasing tail over the second half of the grid. Slowly vanishing
// functions like 1/sqrt(|log theta|) must still pass on a binary64 grid.
template <class R>
bool grid_vanishes(const RealFn<R>& h, const R& floor) {
    using std::exp;
    using std::log;
    const int J = 64;
    R lf = log(floor);
    std::vector<R> vals;
    vals.reserve(J);
    for (int j = 1; j <= J; ++j) vals.push_back(h(exp(lf * R(static_cast<double>(j)) / R(static_cast<double>(J)))));
    for (int j = J / 2; j + 1 < J; ++j)
        if (vals[static_cast<std::size_t>(j + 1)] > vals[static_cast<std::size_t>(j)] * (R(1) + real_traits<R>::from_double(1e-9)))
            return false;
    return vals.back() <= vals.front() / R(3);
}

} // namespace detail

// ---------------------------------------------------------------------------
// spread_sequence: windows theta_m solving (2pi - gamma(theta))/theta = m with
// gamma = sqrt(psi chi), certified flat to 10 psi(theta_m) theta_m on
// half-width psi chi theta_m.

template <class R>
struct SpreadStage {
    FlatWindow<R> window;
    ExpPolynomial<R> Q;
    R gamma;
    R d;
    R norm_gap;      // ||P - Q||_A exact (unit weights)
    R ratio;         // |1 - Q(theta_m)| / theta_m
    R root_residual;
    WindowCertificate<R> certificate;
};

namespace detail {

// Shared stage builder: solves tau(theta_m) = m for one integer m in
// [bracket_lo(m), bracket_hi(m)] and certifies the window for the polynomial
// the caller builds. Everything construction-specific comes in as lambdas.
template <class R>
struct SpreadDriver {
    const ExpPolynomial<R>* P = nullptr;
    RealFn<R> psi, chi;
    BuildConfig<R> config;
    R theta0;   // admissible start
    R n;        // degree of P

    R gamma(const R& theta) const {
        using std::sqrt;
        return sqrt(psi(theta) * chi(theta));
    }
    R tau(const R& theta) const { return (R(2) * real_traits<R>::pi() - gamma(theta)) / theta; }

    // Root of tau = m inside ((2pi-1)/m, 2pi/m]; gamma <= 1 there because the
    // interval sits below 2 * theta0. The attached frequency stays the real
    // (2pi - gamma)/theta_m, so the residual |tau - m| only measures how close
    // it is to the integer; 1e-6 keeps it honest without deep bisection.
    std::pair<R, R> solve(const R& m) const {
        R pi2 = R(2) * real_traits<R>::pi();
        R lo = (pi2 - R(1)) / m, hi = pi2 / m;
        auto g = [&](const R& t) { return tau(t) - m; };
        return bisect_to_value(g, lo, hi, real_traits<R>::from_double(1e-6),
                               real_traits<R>::from_double(1e-14));
    }

    SpreadStage<R> build(const R& m) const {
        auto [theta, residual] = solve(m);
        R g = gamma(theta);
        auto rot = attach_rotation(*P, theta, g);
        SpreadStage<R> s;
        s.gamma = g;
        s.d = rot.d;
        s.root_residual = residual;
        s.norm_gap = R(2) * rot.d / (R(1) + rot.d);
        R slack = real_traits<R>::from_double(1e-12);
        if (s.norm_gap > R(2) * theta / chi(theta) + slack)
            throw certification_error("norm gap exceeded 2 theta / chi");
        if (rot.one_minus_at_theta0 > R(2) * psi(theta) * theta + slack)
            throw certification_error("point flatness exceeded 2 psi theta");
        if (rot.derivative > (R(1) + R(2) * real_traits<R>::pi()) / chi(theta) + slack)
            throw certification_error("derivative exceeded (1 + 2 pi) / chi");
        s.ratio = rot.one_minus_at_theta0 / theta;
        s.Q = std::move(rot.Q);
        R h = psi(theta) * chi(theta) * theta;
        R bound = R(10) * psi(theta) * theta;
        s.certificate = certify_window_sup(s.Q, theta, h, config.window_samples);
        if (s.certificate.certified_sup > bound)
            throw certification_error("window certificate exceeded 10 psi theta");
        s.window = FlatWindow<R>{theta, h, bound, m};
        s.window.validate();
        return s;
    }
};

template <class R>
SpreadDriver<R> make_spread_driver(const ExpPolynomial<R>& P, RealFn<R> psi, RealFn<R> chi,
                                   const BuildConfig<R>& config) {
    detail::require_a_plus(P);
    using std::sqrt;
    R floor = config.theta_floor;
    if (!detail::grid_vanishes<R>(psi, floor))
        throw precondition_error("psi does not vanish toward 0 on the verification grid");
    auto ratio_fn = [&](const R& t) { return chi(t) / psi(t); };
    if (!detail::grid_vanishes<R>(ratio_fn, floor))
        throw precondition_error("chi/psi does not vanish toward 0 on the verification grid");

    SpreadDriver<R> drv{&P, std::move(psi), std::move(chi), config, R(0), P.degree()};
    R n = drv.n;
    auto cond = [&](const R& t) {
        R ps = drv.psi(t), ch = drv.chi(t);
        if (!(ps > R(0)) || !(ch > R(0))) return false;
        return ch * ps + n * (sqrt(ch / ps) + t) <= R(1) && t * n <= R(1);
    };
    drv.theta0 = detail::find_theta0(cond, floor, config.grid_points, "spread windows");
    return drv;
}

} // namespace detail

template <class R>
std::vector<SpreadStage<R>> spread_sequence(const ExpPolynomial<R>& P, RealFn<R> psi, RealFn<R> chi, int M,
                                            const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::ceil;
    auto drv = detail::make_spread_driver(P, std::move(psi), std::move(chi), config);
    std::vector<SpreadStage<R>> out;
    R m = ceil(drv.tau(drv.theta0));
    for (int i = 0; i < M; ++i, m += R(1)) out.push_back(drv.build(m));
    return out;
}

// phi-weighted variant: psi = phi theta^{1-nu}, chi = sqrt(phi) theta^{1-nu};
// adds the certified weighted-norm gap 2 (2pi)^nu / sqrt(phi(theta_m)).
template <class R>
struct PowerSpreadStage {
    SpreadStage<R> stage;
    R weighted_gap;   // ||P - Q||_{A(nu)} exact
    R weighted_bound; // 2 (2pi)^nu / sqrt(phi)
};

template <class R>
std::vector<PowerSpreadStage<R>> power_weight_spread(const ExpPolynomial<R>& P, RealFn<R> phi, double nu, int M,
                                                     const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::ceil;
    using std::pow;
    using std::sqrt;
    if (nu < 0 || nu >= 1) throw precondition_error("nu must lie in [0, 1)");
    R rnu = real_traits<R>::from_double(nu);
    auto grow = [phi](const R& t) { return R(1) / phi(t); };
    if (!detail::grid_vanishes<R>(grow, config.theta_floor))
        throw precondition_error("phi does not diverge toward 0 on the verification grid");
    auto psi = [phi, rnu](const R& t) { return phi(t) * pow(t, R(1) - rnu); };
    auto chi = [phi, rnu](const R& t) {
        using std::pow;
        using std::sqrt;
        return sqrt(phi(t)) * pow(t, R(1) - rnu);
    };
    auto drv = detail::make_spread_driver<R>(P, psi, chi, config);
    WeightSpec<R> w = WeightSpec<R>::power(nu);
    std::vector<PowerSpreadStage<R>> out;
    R m = ceil(drv.tau(drv.theta0));
    for (int i = 0; i < M; ++i, m += R(1)) {
        PowerSpreadStage<R> ps;
        ps.stage = drv.build(m);
        ps.weighted_gap = weighted_distance(P, ps.stage.Q, w);
        ps.weighted_bound = R(2) * pow(R(2) * real_traits<R>::pi(), rnu) / sqrt(phi(ps.stage.window.theta_m));
        if (ps.weighted_gap > ps.weighted_bound + real_traits<R>::from_double(1e-12))
            throw certification_error("weighted norm gap exceeded its certified bound");
        out.push_back(std::move(ps));
    }
    return out;
}

// ---------------------------------------------------------------------------
// iterative_counterexample: the induction. delta_1 = min(delta/2, eps/2);
// delta_{N+1} = min(eps/2^{N+1}, delta/2^{N+1} * min_m phi(theta_m)
// theta_m^{2-nu}); each stage takes the smallest window index whose weighted
// norm gap fits the schedule.

template <class R>
BuildResult<R> iterative_counterexample(const ExpPolynomial<R>& f0, double eps, double delta, RealFn<R> phi,
                                        double nu, int M,
                                        const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::ceil;
    using std::pow;
    if (!(eps > 0) || eps >= 1) throw precondition_error("eps must lie in (0, 1)");
    if (!(delta > 0)) throw precondition_error("delta must be positive");
    if (nu < 0 || nu >= 1) throw precondition_error("nu must lie in [0, 1)");
    detail::require_a_plus(f0);
    detail::require_aperiodic_poly(f0);

    R rnu = real_traits<R>::from_double(nu);
    WeightSpec<R> w = WeightSpec<R>::power(nu);
    auto phi_theta = [&](const R& t) { return phi(t) * pow(t, R(2) - rnu); };

    BuildResult<R> result;
    result.trace.final = f0;
    ExpPolynomial<R> cur = f0;
    R min_phi_theta(1);

    for (int stage = 1; stage <= M; ++stage) {
        R dstage = real_traits<R>::from_double(eps) / pow(R(2), R(stage));
        if (stage == 1) {
            R half_delta = real_traits<R>::from_double(delta) / R(2);
            if (half_delta < dstage) dstage = half_delta;
        } else {
            R alt = real_traits<R>::from_double(delta) / pow(R(2), R(stage)) * min_phi_theta;
            if (alt < dstage) dstage = alt;
        }

        auto psi = [phi, rnu](const R& t) { return phi(t) * pow(t, R(1) - rnu); };
        auto chi = [phi, rnu](const R& t) {
            using std::sqrt;
            return sqrt(phi(t)) * pow(t, R(1) - rnu);
        };
        detail::SpreadDriver<R> drv;
        try {
            drv = detail::make_spread_driver<R>(cur, psi, chi, config);
        } catch (const root_error& e) {
            result.status = BuildStatus::precision_exhausted;
            result.failed_stage = stage;
            result.message = e.what();
            return result;
        }

        // Weighted gap at the driver's roots decreases in m; locate the first
        // admissible m by bisecting the smooth proxy over theta, then settle
        // locally.
        auto gap_proxy = [&](const R& t) {
            R d(0);
            for (const auto& term : cur.terms) d += term.weight * croft_coefficient(term.freq * t, drv.gamma(t));
            R wsum(0);
            for (const auto& term : cur.terms) wsum += w(term.freq) * term.weight;
            R wnew = pow(drv.tau(t), rnu);
            return d / (R(1) + d) * (wsum + wnew);
        };
        R m_start = ceil(drv.tau(drv.theta0));
        R m = m_start;
        if (gap_proxy(drv.theta0) > dstage) {
            // bisect theta until the bracket pins the window index to a few
            // candidates; the local search below settles the exact one
            R lo = config.theta_floor, hi = drv.theta0;
            if (gap_proxy(lo) > dstage) {
                result.status = BuildStatus::precision_exhausted;
                result.failed_stage = stage;
                result.message = "schedule cannot be met above the precision floor";
                return result;
            }
            long iters = 8 * static_cast<long>(real_traits<R>::precision_bits()) + 64;
            while (iters-- > 0 && ceil(drv.tau(lo)) - ceil(drv.tau(hi)) > R(8)) {
                R mid = (lo + hi) / R(2);
                if (mid <= lo || mid >= hi) break;
                (gap_proxy(mid) <= dstage ? lo : hi) = mid;
            }
            m = ceil(drv.tau(hi));
            if (m < m_start) m = m_start;
        }

        StageRecord<R> rec;
        bool accepted = false;
        try {
            for (int tries = 0; tries < 64; ++tries, m += R(1)) {
                auto st = drv.build(m);
                R gap = weighted_distance(cur, st.Q, w);
                if (gap > dstage) continue;
                while (m > m_start) {
                    auto prev = drv.build(m - R(1));
                    if (weighted_distance(cur, prev.Q, w) > dstage) break;
                    st = std::move(prev);
                    m -= R(1);
                    gap = weighted_distance(cur, st.Q, w);
                }
                rec.poly = st.Q;
                rec.window = st.window;
                rec.norm_distance = gap;
                rec.ratio = st.ratio;
                rec.gamma = st.gamma;
                rec.d = st.d;
                rec.root_residual = st.root_residual;
                accepted = true;
                break;
            }
        } catch (const root_error& e) {
            result.status = BuildStatus::precision_exhausted;
            result.failed_stage = stage;
            result.message = e.what();
            return result;
        }
        if (!accepted) {
            result.status = BuildStatus::precision_exhausted;
            result.failed_stage = stage;
            result.message = "no window met the schedule within the local search";
            return result;
        }

        R pt = phi_theta(rec.window.theta_m);
        if (pt < min_phi_theta) min_phi_theta = pt;
        cur = rec.poly;
        result.trace.schedule.push_back(dstage);
        result.trace.stages.push_back(std::move(rec));
        result.trace.final = cur;
    }

    // Final distance check against the full schedule.
    R total = weighted_distance(f0, result.trace.final, w);
    R sum_delta(0);
    for (const auto& dm : result.trace.schedule) sum_delta += dm;
    if (total > sum_delta + real_traits<R>::from_double(1e-12) ||
        sum_delta > real_traits<R>::from_double(eps) + real_traits<R>::from_double(1e-12))
        throw certification_error("final distance exceeded the schedule budget");
    return result;
}

// Final-window check across a trace: the window of stage N must still be flat
// for the final polynomial, with factor 10 + delta * sum_{j=1}^{M-1} 2^{-j}.
// Two routes are recorded. sampled_sup is the dense-sample sup of
// |1 - final| over the window (no Lipschitz slack: late stages attach
// frequencies so high that derivative_bound(final) is astronomically large).
// certified_sup is rigorous without sampling: the stage-time certified bound
// plus the A(nu) distances of all later stages, since sup |f - g| <=
// ||f - g||_A <= ||f - g||_{A(nu)} for nu >= 0.
template <class R>
struct FinalWindowCheck {
    R theta_m;
    R sampled_sup;
    R certified_sup;
    R bound;
    R ratio; // |1 - final(theta_m)| / theta_m
    bool ok;
};

template <class R>
std::vector<FinalWindowCheck<R>> certify_final_windows(const ConstructionTrace<R>& trace, RealFn<R> phi,
                                                       double nu, double delta, int window_samples = 101) {
    using std::max;
    using std::pow;
    R rnu = real_traits<R>::from_double(nu);
    R geom(0);
    for (std::size_t j = 1; j + 1 <= trace.stages.size(); ++j)
        geom += R(1) / pow(R(2), R(static_cast<double>(j)));
    R factor = R(10) + real_traits<R>::from_double(delta) * geom;
    std::vector<FinalWindowCheck<R>> out;
    for (std::size_t i = 0; i < trace.stages.size(); ++i) {
        const auto& st = trace.stages[i];
        const R& tm = st.window.theta_m;
        R tail(0);
        for (std::size_t j = i + 1; j < trace.stages.size(); ++j) tail += trace.stages[j].norm_distance;
        R certified = st.window.bound + tail;

        int npts = window_samples < 3 ? 3 : window_samples;
        R h = st.window.half_width;
        R sampled = modulus(one_minus_eval(trace.final, tm));
        if (h > R(0)) {
            R spacing = (h * R(2)) / R(static_cast<double>(npts - 1));
            for (int p = 0; p < npts; ++p) {
                R x = tm + spacing * R(static_cast<double>(p) - static_cast<double>(npts - 1) / 2);
                sampled = max(sampled, modulus(one_minus_eval(trace.final, x)));
            }
        }

        // composed exactly as the stage bound so a zero tail compares equal
        R bound = factor * (phi(tm) * pow(tm, R(1) - rnu)) * tm;
        R ratio = modulus(one_minus_eval(trace.final, tm)) / tm;
        out.push_back({tm, sampled, certified, bound, ratio, sampled <= bound && certified <= bound});
    }
    return out;
}

// ---------------------------------------------------------------------------
// flat_point_sequence: integer flat points s_m from a vanishing subsequence of
// eps, gamma_m = sqrt(eps_{s_m} + n e_n / s_m), theta_m = (2pi - gamma_m)/s_m.

template <class R>
struct EpsSeq {
    RealFn<R> value;                  // eps_k at integer k >= 1
    bool monotone_nonincreasing = false;
    RealFn<R> inverse_hint;           // optional: approximate smallest s with eps(s) <= x

    R at(const R& k) const { return value(k); }
};

template <class R>
struct FlatPointStage {
    R s;     // integer flat index
    R gamma;
    R theta;
    ExpPolynomial<R> Q;
    R ratio;      // |1 - Q(theta)| / theta, certified <= 2 n gamma
    R norm_gap;   // ||P - Q||_{A(w~)} exact, certified <= 4 pi n gamma
    R d;
};

namespace detail {

// Probes the weight condition k * eps_k >= 1 on a geometric ladder, and (for
// the induction) that eps actually decays somewhere on it: a sequence whose
// ladder minimum stays at eps_1 has no usable vanishing subsequence.
template <class R>
void probe_eps_sequence(const EpsSeq<R>& eps, bool require_decay) {
    R tol = real_traits<R>::from_double(1e-12);
    R k(1);
    R first = eps.at(k);
    R minv = first;
    for (int j = 0; j < 48; ++j) {
        R v = eps.at(k);
        if (!(v > R(0)) || k * v < R(1) - tol)
            throw precondition_error("eps sequence must keep k * eps_k >= 1");
        if (v < minv) minv = v;
        k = k * R(2);
    }
    if (require_decay && minv > first * real_traits<R>::from_double(0.75))
        throw precondition_error("eps sequence shows no decay on the probe ladder");
}

template <class R>
FlatPointStage<R> build_flat_point(const ExpPolynomial<R>& P, const EpsSeq<R>& eps, const R& s, const R& e_n) {
    using std::sqrt;
    R n = P.degree();
    R es = eps.at(s);
    R gamma = sqrt(es + n * e_n / s);
    if (gamma > R(1)) throw precondition_error("gamma must not exceed 1 at an accepted index");
    R theta = (R(2) * real_traits<R>::pi() - gamma) / s;
    auto rot = attach_rotation(P, theta, gamma, s);
    FlatPointStage<R> st;
    st.s = s;
    st.gamma = gamma;
    st.theta = theta;
    st.d = rot.d;
    st.ratio = rot.one_minus_at_theta0 / theta;
    R slack = real_traits<R>::from_double(1e-12);
    if (st.ratio > R(2) * n * gamma + slack)
        throw certification_error("flat-point ratio exceeded 2 n gamma");
    WeightSpec<R> wt = WeightSpec<R>::index_scaled(eps.value);
    st.norm_gap = weighted_distance(P, rot.Q, wt);
    if (st.norm_gap > R(4) * real_traits<R>::pi() * n * gamma + slack)
        throw certification_error("flat-point norm gap exceeded 4 pi n gamma");
    st.Q = std::move(rot.Q);
    return st;
}

} // namespace detail

template <class R>
std::vector<FlatPointStage<R>> flat_point_sequence(const ExpPolynomial<R>& P, const EpsSeq<R>& eps, int M,
                                                   const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::ceil;
    using std::sqrt;
    detail::require_a_plus(P);
    detail::require_aperiodic_poly(P);
    detail::probe_eps_sequence(eps, false);
    R n = P.degree();
    // e_n = sup_{k <= n} eps_k; monotone handles read it off the first entry
    R e_n = eps.at(R(1));
    if (!eps.monotone_nonincreasing) {
        R k(2);
        for (std::int64_t i = 2; i <= static_cast<std::int64_t>(to_double(n)); ++i, k += R(1)) {
            R v = eps.at(k);
            if (v > e_n) e_n = v;
        }
    }
    std::vector<FlatPointStage<R>> out;
    R running_min = eps.at(R(1)) + R(1);
    R s = ceil(R(2) * real_traits<R>::pi() * n); // theta <= 1/n needs s >= 2 pi n
    if (s < R(2)) s = R(2);
    std::int64_t scanned = 0;
    while (static_cast<int>(out.size()) < M) {
        if (scanned++ > config.scan_limit)
            throw subsequence_error("no vanishing subsequence found within the scan range");
        R es = eps.at(s);
        R gamma2 = es + n * e_n / s;
        if (es < running_min && gamma2 <= R(1)) {
            out.push_back(detail::build_flat_point(P, eps, s, e_n));
            running_min = es;
        }
        s += R(1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// betak_counterexample: induction in A(w~) built from flat points; stage N
// accepts the smallest admissible s whose gap fits delta_N = eps/2^N.

template <class R>
BuildResult<R> betak_counterexample(const ExpPolynomial<R>& f0, double eps, const EpsSeq<R>& epsseq, int M,
                                    const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::ceil;
    using std::pow;
    if (!(eps > 0)) throw precondition_error("eps must be positive");
    detail::require_a_plus(f0);
    detail::require_aperiodic_poly(f0);
    detail::probe_eps_sequence(epsseq, true);
    WeightSpec<R> wt = WeightSpec<R>::index_scaled(epsseq.value);

    BuildResult<R> result;
    result.trace.final = f0;
    ExpPolynomial<R> cur = f0;
    R e1 = epsseq.at(R(1));
    R s_prev(1);

    for (int stage = 1; stage <= M; ++stage) {
        R dstage = real_traits<R>::from_double(eps) / pow(R(2), R(stage));
        R n = cur.degree();
        R e_n = epsseq.monotone_nonincreasing ? e1 : [&] {
            R worst = e1, k(2);
            for (std::int64_t i = 2; i <= static_cast<std::int64_t>(to_double(n)); ++i, k += R(1)) {
                R v = epsseq.at(k);
                if (v > worst) worst = v;
            }
            return worst;
        }();

        R s_min = ceil(R(2) * real_traits<R>::pi() * n);
        if (s_min <= s_prev) s_min = s_prev + R(1);
        auto admissible = [&](const R& s) {
            return epsseq.at(s) + n * e_n / s <= R(1);
        };
        auto gap_at = [&](const R& s) {
            auto st = detail::build_flat_point(cur, epsseq, s, e_n);
            return std::pair<R, FlatPointStage<R>>(st.norm_gap, std::move(st));
        };

        // find an admissible s with gap <= dstage by doubling, then walk the
        // bracket down to the smallest power-of-two step meeting it
        R s = s_min;
        R sigma = derivative_bound(cur);
        std::int64_t doublings = 0;
        FlatPointStage<R> chosen;
        bool have = false;
        try {
            while (true) {
                if (++doublings > 20000) throw subsequence_error("no admissible flat index met the schedule");
                if (epsseq.inverse_hint && doublings == 1) {
                    // the attached gap scales like 2 pi Sigma sqrt(eps(s));
                    // jump near its crossing with dstage, slightly under
                    R target = dstage / (R(2) * real_traits<R>::pi() * sigma);
                    R hint = epsseq.inverse_hint(target * target * R(15) / R(16));
                    if (hint > s) s = ceil(hint);
                }
                if (!real_traits<R>::finite(s) ||
                    R(2) * real_traits<R>::pi() / s < config.theta_floor)
                    throw subsequence_error("flat points sank below the precision floor before meeting the schedule");
                if (admissible(s)) {
                    auto [gap, st] = gap_at(s);
                    if (gap <= dstage) {
                        chosen = std::move(st);
                        have = true;
                        break;
                    }
                }
                s = s * R(2);
            }
            // shrink: halve toward s_min while still meeting the schedule;
            // capped so slowly varying eps cannot stretch the walk
            int halvings = 0;
            while (have && ++halvings <= 64) {
                R cand = ceil(s / R(2));
                if (cand <= s_min || !admissible(cand)) break;
                auto [gap, st] = gap_at(cand);
                if (gap > dstage) break;
                chosen = std::move(st);
                s = cand;
            }
        } catch (const subsequence_error& e) {
            result.status = BuildStatus::precision_exhausted;
            result.failed_stage = stage;
            result.message = e.what();
            return result;
        }
        if (chosen.theta < config.theta_floor) {
            result.status = BuildStatus::precision_exhausted;
            result.failed_stage = stage;
            result.message = "flat point sank below the precision floor";
            return result;
        }

        detail::require_aperiodic_poly(chosen.Q);
        StageRecord<R> rec;
        rec.poly = chosen.Q;
        rec.window = FlatWindow<R>{chosen.theta, R(0), R(2) * n * chosen.theta * chosen.gamma, chosen.s};
        rec.window.validate();
        rec.norm_distance = chosen.norm_gap;
        rec.ratio = chosen.ratio;
        rec.gamma = chosen.gamma;
        rec.d = chosen.d;
        rec.root_residual = R(0);
        s_prev = chosen.s;
        cur = chosen.Q;
        result.trace.schedule.push_back(dstage);
        result.trace.stages.push_back(std::move(rec));
        result.trace.final = cur;
    }

    R total = weighted_distance(f0, result.trace.final, wt);
    R sum_delta(0);
    for (const auto& dm : result.trace.schedule) sum_delta += dm;
    if (total > sum_delta + real_traits<R>::from_double(1e-12) ||
        sum_delta > real_traits<R>::from_double(eps) + real_traits<R>::from_double(1e-12))
        throw certification_error("final weighted distance exceeded the schedule budget");
    return result;
}

// ---------------------------------------------------------------------------
// croft_alternative: d(theta) = theta^nu / sqrt(phi), v = Im P / d in (0, 1],
// tau = (2pi - arcsin v)/theta, integer roots; Q_m = (P + d e^{im theta})/(1+d)
// kills the imaginary part at theta_m exactly.

template <class R>
struct CroftStage {
    R m; // integer
    R theta_m;
    ExpPolynomial<R> Q;
    R d;
    R im_residual;   // |Im Q(theta_m)|
    R point_gap;     // |1 - Q(theta_m)|, certified <= 2 phi theta^{2-nu}
    FlatWindow<R> window;
    WindowCertificate<R> certificate;
};

template <class R>
std::vector<CroftStage<R>> croft_alternative(const ExpPolynomial<R>& P, RealFn<R> phi, double nu, int M,
                                             const BuildConfig<R>& config = BuildConfig<R>::defaults()) {
    using std::asin;
    using std::ceil;
    using std::fabs;
    using std::log;
    using std::pow;
    using std::sqrt;
    if (nu < 0 || nu >= 1) throw precondition_error("nu must lie in [0, 1)");
    detail::require_a_plus(P);
    R rnu = real_traits<R>::from_double(nu);
    R n = P.degree();

    auto dfn = [phi, rnu](const R& t) { return pow(t, rnu) / sqrt(phi(t)); };
    auto vfn = [&P, dfn](const R& t) {
        R v = eval(P, t).im / dfn(t);
        if (!(v > R(0)) || v > R(1)) throw certification_error("normalized imaginary part left (0, 1]");
        return v;
    };
    auto tau = [&](const R& t) { return (R(2) * real_traits<R>::pi() - asin(vfn(t))) / t; };

    auto cond = [&](const R& t) {
        if (!(phi(t) > R(1))) return false;
        if (n / pow(phi(t), real_traits<R>::from_double(0.25)) > R(1)) return false;
        if (rnu + log(phi(t)) / fabs(log(t)) > R(1)) return false;
        R im = eval(P, t).im;
        R d = dfn(t);
        return im > R(0) && im <= d;
    };
    R theta0 = detail::find_theta0(cond, config.theta_floor, config.grid_points, "croft windows");

    std::vector<CroftStage<R>> out;
    R pi2 = R(2) * real_traits<R>::pi();
    R m = ceil(tau(theta0));
    for (int i = 0; i < M; ++i, m += R(1)) {
        R lo = (pi2 - pi2 / R(4)) / m, hi = pi2 / m; // tau in [3pi/2, 2pi)/theta brackets
        auto g = [&](const R& t) { return tau(t) - m; };
        auto [theta, residual] = bisect_to_value(g, lo, hi, real_traits<R>::from_double(1e-13),
                                                 real_traits<R>::from_double(1e-14));
        R d = dfn(theta);
        // the integer frequency is attached verbatim, so the phase error
        // d * theta * residual feeds the Im certificate directly
        if (d * theta * residual > real_traits<R>::from_double(1e-11))
            throw root_error("root residual exceeds what this precision can certify");

        CroftStage<R> st;
        st.m = m;
        st.theta_m = theta;
        st.d = d;
        ExpPolynomial<R> Q;
        Q.terms.reserve(P.terms.size() + 1);
        R scale = R(1) / (R(1) + d);
        for (const auto& t : P.terms) Q.terms.push_back({t.freq, t.weight * scale});
        Q.terms.push_back({m, d * scale});
        Q.validate();
        st.Q = std::move(Q);

        auto z = one_minus_eval(st.Q, theta);
        st.im_residual = fabs(z.im);
        st.point_gap = modulus(z);
        R slack = real_traits<R>::from_double(1e-12);
        if (st.point_gap > R(2) * phi(theta) * pow(theta, R(2) - rnu) + slack)
            throw certification_error("croft point flatness exceeded 2 phi theta^{2-nu}");
        R mt = m * theta;
        if (!(mt > R(3) * real_traits<R>::pi() / R(2)) || mt > pi2 + slack)
            throw certification_error("m theta left (3 pi / 2, 2 pi]");

        R h = pow(phi(theta), real_traits<R>::from_double(1.5)) * pow(theta, R(3) - R(2) * rnu);
        R bound = R(10) * phi(theta) * pow(theta, R(2) - rnu);
        st.certificate = certify_window_sup(st.Q, theta, h, config.window_samples);
        if (st.certificate.certified_sup > bound)
            throw certification_error("croft window certificate exceeded 10 phi theta^{2-nu}");
        st.window = FlatWindow<R>{theta, h, bound, m};
        st.window.validate();
        out.push_back(std::move(st));
    }
    return out;
}

// Small-angle imaginary part bounds: for theta0 <= n^{-1/alpha},
// 0 < Im P(theta0) <= theta0^{1-alpha} < 1.
template <class R>
void check_small_angle_imaginary(const ExpPolynomial<R>& P, double alpha, const R& theta0) {
    using std::pow;
    detail::require_a_plus(P);
    if (!(alpha > 0) || alpha >= 1) throw precondition_error("alpha must lie in (0, 1)");
    R n = P.degree();
    if (theta0 > pow(n, real_traits<R>::from_double(-1.0 / alpha)))
        throw precondition_error("theta0 must not exceed deg^{-1/alpha}");
    R im = eval(P, theta0).im;
    R cap = pow(theta0, real_traits<R>::from_double(1.0 - alpha));
    if (!(im > R(0)) || im > cap || !(cap < R(1)))
        throw certification_error("small-angle imaginary part left its certified range");
}

} // namespace rlab
