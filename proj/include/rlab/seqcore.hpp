#pragma once

// Core types and evaluation for nonnegative exponential series
//
//   f(theta) = sum_k a_k e^{i k theta},   a_k >= 0,  sum_k a_k <= 1,
//
// in two flavors: CoefficientSequence (integer frequencies, possibly large
// dense support, binary64 only) and ExpPolynomial<R> (few terms, real
// frequencies, generic real type so constructions can run at extended
// precision).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "rlab/bigfloat.hpp"
#include "rlab/cplx.hpp"
#include "rlab/errors.hpp"
#include "rlab/report.hpp"

namespace rlab {

inline constexpr double kNormTol = 1e-12;

// ---------------------------------------------------------------------------
// CoefficientSequence

struct CoefficientSequence {
    // Sorted by index, strictly increasing, indices >= 1, weights >= 0.
    std::vector<std::pair<std::int64_t, double>> terms;
    // Mass sitting above the stored support at unspecified frequencies.
    double tail_mass = 0.0;
    bool normalized = false;

    double stored_mass() const {
        double s = 0, c = 0;
        for (const auto& [k, a] : terms) {
            double y = a - c, t = s + y;
            c = (t - s) - y;
            s = t;
        }
        return s;
    }
    double total_mass() const { return stored_mass() + tail_mass; }
    std::int64_t max_index() const { return terms.empty() ? 0 : terms.back().first; }

    void validate() const {
        std::int64_t prev = 0;
        for (const auto& [k, a] : terms) {
            if (k < 1) throw precondition_error("coefficient index must be >= 1");
            if (k <= prev) throw precondition_error("coefficient indices must be strictly increasing");
            if (!(a >= 0)) throw precondition_error("coefficient weights must be nonnegative");
            prev = k;
        }
        if (!(tail_mass >= 0)) throw precondition_error("tail mass must be nonnegative");
        if (normalized && std::abs(total_mass() - 1.0) > kNormTol)
            throw precondition_error("sequence flagged normalized but mass differs from 1");
        if (!normalized && total_mass() > 1.0 + kNormTol)
            throw precondition_error("sequence mass exceeds 1");
    }
};

inline CoefficientSequence make_sequence(std::vector<std::pair<std::int64_t, double>> terms,
                                         double tail_mass = 0.0, bool normalized = true) {
    std::sort(terms.begin(), terms.end());
    CoefficientSequence f{std::move(terms), tail_mass, normalized};
    f.validate();
    return f;
}

// Scales all mass so that it sums to exactly 1 (stored + tail).
inline CoefficientSequence normalize(CoefficientSequence f) {
    double m = f.total_mass();
    if (m <= 0) throw precondition_error("cannot normalize a zero sequence");
    for (auto& [k, a] : f.terms) a /= m;
    f.tail_mass /= m;
    f.normalized = true;
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// ExpPolynomial

template <class R>
struct ExpTerm {
    R freq;
    R weight;
};

template <class R>
struct ExpPolynomial {
    std::vector<ExpTerm<R>> terms; // sorted by frequency, frequencies > 0

    void validate() const {
        R prev(0);
        for (const auto& t : terms) {
            if (!(t.freq > prev)) throw precondition_error("frequencies must be positive and strictly increasing");
            if (t.weight < R(0)) throw precondition_error("weights must be nonnegative");
            prev = t.freq;
        }
    }
    R mass() const {
        R s(0);
        for (const auto& t : terms) s += t.weight;
        return s;
    }
    R degree() const { return terms.empty() ? R(0) : terms.back().freq; }
};

template <class R>
ExpPolynomial<R> poly_from_sequence(const CoefficientSequence& f) {
    if (f.tail_mass != 0) throw precondition_error("polynomial conversion requires zero tail mass");
    ExpPolynomial<R> p;
    p.terms.reserve(f.terms.size());
    for (const auto& [k, a] : f.terms)
        p.terms.push_back({R(static_cast<double>(k)), real_traits<R>::from_double(a)});
    return p;
}

// ---------------------------------------------------------------------------
// Weights for the weighted algebra norm  ||f||_w = sum w(k) a_k.

enum class WeightKind { Unit, Power, IndexScaled };

// IndexScaled uses w(k) = k * eps(k) for a supplied eps handle. Real
// frequencies lambda are weighted by w(ceil(lambda)).
template <class R>
struct WeightSpec {
    WeightKind kind = WeightKind::Unit;
    double exponent = 0.0;               // Power: w(k) = k^exponent
    std::function<R(const R&)> eps;      // IndexScaled: w(k) = k * eps(k)

    static WeightSpec unit() { return {WeightKind::Unit, 0.0, nullptr}; }
    static WeightSpec power(double nu) { return {WeightKind::Power, nu, nullptr}; }
    static WeightSpec index_scaled(std::function<R(const R&)> e) {
        return {WeightKind::IndexScaled, 0.0, std::move(e)};
    }

    R operator()(const R& lambda) const {
        using std::ceil;
        using std::pow;
        R k = ceil(lambda);
        switch (kind) {
            case WeightKind::Unit: return R(1);
            case WeightKind::Power: return pow(k, real_traits<R>::from_double(exponent));
            case WeightKind::IndexScaled: return k * eps(k);
        }
        return R(1);
    }
};

template <class R>
R weighted_norm(const ExpPolynomial<R>& p, const WeightSpec<R>& w) {
    R s(0);
    for (const auto& t : p.terms) s += w(t.freq) * t.weight;
    return s;
}

inline double weighted_norm(const CoefficientSequence& f, const WeightSpec<double>& w) {
    if (f.tail_mass > 0 && w.kind != WeightKind::Unit)
        throw precondition_error("weighted norm undefined with unbounded weight over an anonymous tail");
    double s = 0, c = 0;
    for (const auto& [k, a] : f.terms) {
        double y = w(static_cast<double>(k)) * a - c, t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s + f.tail_mass;
}

// ||p - q||_w for polynomials; frequencies are matched exactly.
template <class R>
R weighted_distance(const ExpPolynomial<R>& p, const ExpPolynomial<R>& q, const WeightSpec<R>& w) {
    using std::fabs;
    R s(0);
    std::size_t i = 0, j = 0;
    while (i < p.terms.size() || j < q.terms.size()) {
        if (j >= q.terms.size() || (i < p.terms.size() && p.terms[i].freq < q.terms[j].freq)) {
            s += w(p.terms[i].freq) * p.terms[i].weight;
            ++i;
        } else if (i >= p.terms.size() || q.terms[j].freq < p.terms[i].freq) {
            s += w(q.terms[j].freq) * q.terms[j].weight;
            ++j;
        } else {
            s += w(p.terms[i].freq) * fabs(p.terms[i].weight - q.terms[j].weight);
            ++i, ++j;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Evaluation. Dense integer supports walk a unit rotation that is refreshed
// every kRefresh steps, so the phase drift stays at a few hundred ulp
// independent of support length; accumulation is Neumaier-compensated.
// Documented error bound: |err| <= 1e-13 * sum a_k for supports up to 2^24.

inline constexpr int kRefresh = 1024;

namespace detail {

struct CompensatedSum {
    double s = 0, c = 0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// Walks e^{i k theta / 2} over the sorted support (half angle: both
// sin(k theta) and 1 - cos(k theta) come out cancellation-free).
template <class F>
void walk_half_phases(const CoefficientSequence& f, double theta, F&& visit) {
    const double h = theta / 2;
    const double sh = std::sin(h), ch = std::cos(h);
    std::int64_t cur = 0;
    double cre = 1.0, cim = 0.0; // e^{i cur h}
    int steps_since_refresh = 0;
    for (const auto& [k, a] : f.terms) {
        std::int64_t gap = k - cur;
        if (gap > 64 || steps_since_refresh + gap > kRefresh) {
            double kk = static_cast<double>(k);
            cre = std::cos(kk * h);
            cim = std::sin(kk * h);
            steps_since_refresh = 0;
        } else {
            for (std::int64_t s = 0; s < gap; ++s) {
                double nre = cre * ch - cim * sh;
                cim = cre * sh + cim * ch;
                cre = nre;
            }
            steps_since_refresh += static_cast<int>(gap);
        }
        cur = k;
        visit(a, cre, cim);
    }
}

} // namespace detail

// f(theta) over stored terms. The anonymous tail shifts the true value by at
// most tail_mass in modulus; callers fold that into their own slack.
inline Cplx<double> eval(const CoefficientSequence& f, double theta) {
    detail::CompensatedSum re, im;
    detail::walk_half_phases(f, theta, [&](double a, double hre, double him) {
        re.add(a * (hre * hre - him * him)); // cos = hre^2 - him^2
        im.add(a * (2 * hre * him));         // sin = 2 hre him
    });
    return {re.value(), im.value()};
}

// 1 - f(theta) over stored terms via 2 sin^2(k theta/2) - i sin(k theta);
// exact zero at theta = 0, no cancellation for small k theta. Unstored mass
// (tail and any 1 - sum a_k deficit) contributes its own 1-weighted term.
inline Cplx<double> one_minus_eval(const CoefficientSequence& f, double theta) {
    detail::CompensatedSum re, im;
    detail::walk_half_phases(f, theta, [&](double a, double hre, double him) {
        re.add(a * (2 * him * him));
        im.add(-a * (2 * hre * him));
    });
    double deficit = 1.0 - f.total_mass(); // nonzero only for subprobability input
    return {re.value() + deficit, im.value()};
}

template <class R>
Cplx<R> eval(const ExpPolynomial<R>& p, const R& theta) {
    using std::cos;
    using std::sin;
    Cplx<R> z{R(0), R(0)};
    for (const auto& t : p.terms) {
        R phi = t.freq * theta;
        z += Cplx<R>{t.weight * cos(phi), t.weight * sin(phi)};
    }
    return z;
}

template <class R>
Cplx<R> one_minus_eval(const ExpPolynomial<R>& p, const R& theta) {
    using std::cos;
    using std::sin;
    Cplx<R> z{R(0), R(0)};
    for (const auto& t : p.terms) {
        R h = t.freq * theta / R(2);
        R sh = sin(h);
        z += Cplx<R>{t.weight * R(2) * sh * sh, -t.weight * R(2) * sh * cos(h)};
    }
    R deficit = R(1) - p.mass();
    z.re = z.re + deficit;
    return z;
}

// ---------------------------------------------------------------------------
// Moment functionals at cutoff n = floor(1/theta):
//   r(theta) = sum_{k > n} a_k,  W(theta) = sum_{k <= n} k a_k,
//   U(theta) = sum_{k <= n} k^2 a_k,  with theta U <= W always.

struct MomentFunctionals {
    double r = 0, W = 0, U = 0;
    std::int64_t cutoff = 0;
};

// Prefix sums over the sorted support; O(log n) per query afterwards.
class MomentTable {
  public:
    explicit MomentTable(const CoefficientSequence& f) : f_(&f) {
        cum_a_.reserve(f.terms.size() + 1);
        cum_ka_.reserve(f.terms.size() + 1);
        cum_k2a_.reserve(f.terms.size() + 1);
        double a = 0, ka = 0, k2a = 0;
        cum_a_.push_back(0), cum_ka_.push_back(0), cum_k2a_.push_back(0);
        for (const auto& [k, w] : f.terms) {
            double kk = static_cast<double>(k);
            a += w, ka += kk * w, k2a += kk * kk * w;
            cum_a_.push_back(a), cum_ka_.push_back(ka), cum_k2a_.push_back(k2a);
        }
    }

    // Index of the first term with k > n.
    std::size_t upper(std::int64_t n) const {
        return std::upper_bound(f_->terms.begin(), f_->terms.end(), n,
                                [](std::int64_t v, const auto& t) { return v < t.first; }) -
               f_->terms.begin();
    }

    MomentFunctionals at_cutoff(std::int64_t n) const {
        if (f_->tail_mass > 0 && f_->max_index() <= n)
            throw precondition_error("tail overlaps cutoff: stored support must exceed 1/theta");
        std::size_t i = upper(n);
        MomentFunctionals m;
        m.cutoff = n;
        m.W = cum_ka_[i];
        m.U = cum_k2a_[i];
        m.r = (cum_a_.back() - cum_a_[i]) + f_->tail_mass;
        return m;
    }

  private:
    const CoefficientSequence* f_;
    std::vector<double> cum_a_, cum_ka_, cum_k2a_;
};

inline MomentFunctionals moment_functionals(const CoefficientSequence& f, double theta) {
    if (!(theta > 0)) throw precondition_error("moment functionals need theta > 0");
    return MomentTable(f).at_cutoff(static_cast<std::int64_t>(std::floor(1.0 / theta)));
}

// ---------------------------------------------------------------------------

// R_f(theta) = theta / (1 - f(theta)).
inline Cplx<double> reciprocal_ratio(const CoefficientSequence& f, double theta) {
    Cplx<double> om = one_minus_eval(f, theta);
    if (modulus(om) < 1e-300)
        throw pole_error("1 - f vanishes at theta = " + format_real(theta));
    return Cplx<double>{theta, 0.0} / om;
}

// gcd of the stored support equals 1. The anonymous tail is ignored; with a
// nonzero tail this is a statement about the stored part only.
inline bool is_aperiodic(const CoefficientSequence& f) {
    std::int64_t g = 0;
    for (const auto& [k, a] : f.terms) {
        if (a <= 0) continue;
        g = std::gcd(g, k);
        if (g == 1) return true;
    }
    return g == 1;
}

// Lipschitz bound sup |f'| <= sum k a_k over stored terms.
inline double derivative_bound(const CoefficientSequence& f) {
    if (f.tail_mass > 0)
        throw precondition_error("derivative bound undefined with an anonymous tail");
    double s = 0, c = 0;
    for (const auto& [k, a] : f.terms) {
        double y = static_cast<double>(k) * a - c, t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

template <class R>
R derivative_bound(const ExpPolynomial<R>& p) {
    R s(0);
    for (const auto& t : p.terms) s += t.freq * t.weight;
    return s;
}

} // namespace rlab
