#pragma once

// Bracketed bisection over real types plus the geometric-grid scan used to
// locate the largest root of tau(theta) = m. tau need not be monotone; the
// scan takes the first sign change walking down from the start.

#include <utility>

#include "rlab/bigfloat.hpp"
#include "rlab/errors.hpp"

namespace rlab {

// Bisects g over [lo, hi] with g(lo), g(hi) of opposite sign; stops when the
// bracket shrinks to rel_tol * |mid| (or after max_iter). Returns (root, final
// bracket width).
template <class R, class F>
std::pair<R, R> bisect(F&& g, R lo, R hi, const R& rel_tol, long max_iter = -1) {
    using std::fabs;
    R glo = g(lo), ghi = g(hi);
    if (glo == R(0)) return {lo, R(0)};
    if (ghi == R(0)) return {hi, R(0)};
    if ((glo > R(0)) == (ghi > R(0))) throw root_error("bisection endpoints do not bracket a sign change");
    if (max_iter < 0) max_iter = 8 * static_cast<long>(real_traits<R>::precision_bits()) + 64;
    for (long i = 0; i < max_iter; ++i) {
        R mid = (lo + hi) / R(2);
        if (mid <= lo || mid >= hi) break; // bracket collapsed to adjacent representables
        R gm = g(mid);
        if (gm == R(0)) return {mid, R(0)};
        if ((gm > R(0)) == (glo > R(0))) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if (hi - lo <= rel_tol * fabs(mid)) break;
    }
    R mid = (lo + hi) / R(2);
    return {mid, hi - lo};
}

// Bisects g over a bracketing [lo, hi] until |g(mid)| <= value_tol (and, when
// rel_width > 0, the bracket is narrower than rel_width * |mid|) or the
// bracket collapses to adjacent representables. Returns (root, |g(root)|).
// Suited to roots of steep functions where the target is a residual size, not
// only an interval width.
template <class R, class F>
std::pair<R, R> bisect_to_value(F&& g, R lo, R hi, const R& value_tol, const R& rel_width = R(0),
                                long max_iter = -1) {
    using std::fabs;
    R glo = g(lo), ghi = g(hi);
    if ((glo > R(0)) == (ghi > R(0))) {
        if (fabs(glo) <= value_tol) return {lo, fabs(glo)};
        if (fabs(ghi) <= value_tol) return {hi, fabs(ghi)};
        throw root_error("bisection endpoints do not bracket a sign change");
    }
    if (max_iter < 0) max_iter = 8 * static_cast<long>(real_traits<R>::precision_bits()) + 64;
    R best = lo, best_g = fabs(glo);
    if (fabs(ghi) < best_g) {
        best = hi;
        best_g = fabs(ghi);
    }
    for (long i = 0; i < max_iter; ++i) {
        R mid = (lo + hi) / R(2);
        if (mid <= lo || mid >= hi) break;
        R gm = g(mid);
        if (fabs(gm) < best_g) {
            best = mid;
            best_g = fabs(gm);
        }
        if (best_g <= value_tol && (!(rel_width > R(0)) || hi - lo <= rel_width * fabs(mid))) break;
        if ((gm > R(0)) == (glo > R(0))) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return {best, best_g};
}

// Walks start, start/ratio, start/ratio^2, ... looking for the first interval
// where g changes sign; returns that bracket. g(start) is expected nonzero.
template <class R, class F>
std::pair<R, R> scan_down_for_bracket(F&& g, R start, const R& floor, const R& ratio = R(2)) {
    R hi = start;
    R ghi = g(hi);
    if (ghi == R(0)) return {hi, hi};
    while (true) {
        R lo = hi / ratio;
        if (lo < floor) throw root_error("no sign change above the scan floor");
        R glo = g(lo);
        if (glo == R(0)) return {lo, lo};
        if ((glo > R(0)) != (ghi > R(0))) return {lo, hi};
        hi = lo;
        ghi = glo;
    }
}

} // namespace rlab
