#pragma once

// Adaptive Gauss-Kronrod quadrature (7-point Gauss nested in 15-point
// Kronrod) with globally adaptive bisection, plus the dyadic decomposition
// [2^-n, 2^-(n-1)] used everywhere a singularity sits at theta = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "rlab/errors.hpp"
#include "rlab/report.hpp"

namespace rlab {

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0; // sum of per-interval |K15 - G7|
    int intervals = 0;         // accepted panels
    int max_depth = 0;         // deepest bisection level used
};

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_depth = 40;
};

namespace detail {

// Abscissae (positive half) and weights of the G7K15 pair. Even entries of
// xgk are the Gauss-Legendre nodes; wg holds their 7-point Gauss weights.
inline constexpr double kGk15X[8] = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
inline constexpr double kGk15W[8] = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
inline constexpr double kG7W[4] = {
    0.12948496616886969327, 0.27970539148927666790,
    0.38183005050511894495, 0.41795918367346938776};

struct Panel {
    double a = 0, b = 0;
    double value = 0; // K15 estimate
    double err = 0;   // |K15 - G7|
    int depth = 0;
};

template <class F>
Panel gk15(F&& f, double a, double b, int depth) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double k15 = kGk15W[7] * f(c);
    double g7 = kG7W[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGk15X[i];
        const double pair = f(c - dx) + f(c + dx);
        k15 += kGk15W[i] * pair;
        if (i % 2 == 1) g7 += kG7W[i / 2] * pair;
    }
    Panel p;
    p.a = a, p.b = b, p.depth = depth;
    p.value = k15 * h;
    p.err = std::abs((k15 - g7) * h);
    return p;
}

struct PanelWorse {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.err != y.err) return x.err < y.err;
        return x.a < y.a; // deterministic tie-break
    }
};

} // namespace detail

// Globally adaptive: always bisect the panel with the largest error until the
// summed error meets max(abs_tol, rel_tol * |integral|). The integrand must be
// finite on [a, b]; push singular endpoints into dyadic blocks first.
template <class F>
QuadratureResult adaptive_quadrature(F&& f, double a, double b,
                                     QuadratureOptions opt = {}) {
    if (!(a < b)) throw precondition_error("quadrature interval must satisfy a < b");
    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelWorse> q;
    q.push(detail::gk15(f, a, b, 0));
    double total = q.top().value, toterr = q.top().err;
    int deepest = 0;
    while (toterr > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        detail::Panel worst = q.top();
        if (worst.depth >= opt.max_depth)
            throw quadrature_error("quadrature depth " + std::to_string(opt.max_depth) +
                                   " exhausted on [" + format_real(worst.a) + ", " +
                                   format_real(worst.b) + "]");
        q.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        detail::Panel l = detail::gk15(f, worst.a, mid, worst.depth + 1);
        detail::Panel r = detail::gk15(f, mid, worst.b, worst.depth + 1);
        total += l.value + r.value - worst.value;
        toterr += l.err + r.err - worst.err;
        deepest = std::max(deepest, worst.depth + 1);
        q.push(l);
        q.push(r);
    }
    // Recompute by compensated summation; the incremental total drifts.
    QuadratureResult res;
    res.intervals = static_cast<int>(q.size());
    res.max_depth = deepest;
    double s = 0, comp = 0, e = 0;
    std::vector<detail::Panel> panels;
    panels.reserve(q.size());
    while (!q.empty()) panels.push_back(q.top()), q.pop();
    std::sort(panels.begin(), panels.end(),
              [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
    for (const auto& p : panels) {
        double y = p.value - comp, t = s + y;
        comp = (t - s) - y;
        s = t;
        e += p.err;
    }
    res.value = s;
    res.error_estimate = e;
    return res;
}

// Integrals over the dyadic blocks [2^-n, 2^-(n-1)], n = n_begin .. n_end.
// Element j of the result covers n = n_begin + j.
template <class F>
std::vector<QuadratureResult> dyadic_block_integrals(F&& f, int n_begin, int n_end,
                                                     QuadratureOptions opt = {}) {
    if (n_begin < 1 || n_end < n_begin)
        throw precondition_error("dyadic blocks need 1 <= n_begin <= n_end");
    std::vector<QuadratureResult> out;
    out.reserve(static_cast<std::size_t>(n_end - n_begin + 1));
    for (int n = n_begin; n <= n_end; ++n)
        out.push_back(adaptive_quadrature(f, std::ldexp(1.0, -n), std::ldexp(1.0, -(n - 1)), opt));
    return out;
}

} // namespace rlab
