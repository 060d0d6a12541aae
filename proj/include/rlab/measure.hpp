#pragma once

// Certified Lebesgue measure of level sets of a Lipschitz function, by
// uniform-grid sampling with the Lipschitz constant absorbing everything a
// sample cannot see. lower counts cells provably inside the set, upper adds
// every cell that might intersect it: lower <= meas <= upper.

#include <cmath>
#include <cstdint>
#include <vector>

#include "rlab/errors.hpp"

namespace rlab {

struct CertifiedMeasure {
    double lower = 0;
    double upper = 0;
    long grid_points = 0;
    double lipschitz = 0;
    long boundary_cells = 0; // cells counted in upper but not lower
};

namespace detail {

// value_at(i, center) supplies the sample for cell i. superlevel selects
// {g >= level}, otherwise {g <= level}.
template <class V>
CertifiedMeasure classify_cells(V&& value_at, double a, double b, double level,
                                double lipschitz, long grid, bool superlevel) {
    if (!(a < b)) throw precondition_error("measure interval must satisfy a < b");
    if (grid < 2) throw precondition_error("measure grid needs at least 2 cells");
    if (!(lipschitz >= 0)) throw precondition_error("lipschitz constant must be nonnegative");
    const double h = (b - a) / static_cast<double>(grid);
    const double slack = 0.5 * lipschitz * h;
    CertifiedMeasure m;
    m.grid_points = grid;
    m.lipschitz = lipschitz;
    long in = 0, maybe = 0;
    for (long i = 0; i < grid; ++i) {
        const double c = a + (static_cast<double>(i) + 0.5) * h;
        const double v = value_at(i, c);
        const bool fully_in = superlevel ? v - slack >= level : v + slack <= level;
        const bool fully_out = superlevel ? v + slack < level : v - slack > level;
        if (fully_in)
            ++in;
        else if (!fully_out)
            ++maybe;
    }
    m.lower = static_cast<double>(in) * h;
    m.upper = static_cast<double>(in + maybe) * h;
    m.boundary_cells = maybe;
    return m;
}

// Recursive bisection of an undecided cell: slack shrinks with the width, so
// most cells resolve; leaves that never resolve stay in upper only.
template <class G>
void refine_cell(G&& g, double lo, double w, double level, double lipschitz, bool superlevel,
                 int depth, double& lower_extra, double& upper_extra, long& unresolved) {
    const double v = g(lo + 0.5 * w);
    const double slack = 0.5 * lipschitz * w;
    const bool fully_in = superlevel ? v - slack >= level : v + slack <= level;
    const bool fully_out = superlevel ? v + slack < level : v - slack > level;
    if (fully_in) {
        lower_extra += w;
        upper_extra += w;
        return;
    }
    if (fully_out) return;
    if (depth <= 0) {
        upper_extra += w;
        ++unresolved;
        return;
    }
    refine_cell(g, lo, 0.5 * w, level, lipschitz, superlevel, depth - 1, lower_extra,
                upper_extra, unresolved);
    refine_cell(g, lo + 0.5 * w, 0.5 * w, level, lipschitz, superlevel, depth - 1, lower_extra,
                upper_extra, unresolved);
}

// First pass over precomputed samples, then each undecided cell is re-tested
// against g on locally halved grids until it resolves or depth runs out.
template <class G>
CertifiedMeasure classify_refined(const std::vector<double>& samples, G&& g, double a, double b,
                                  double level, double lipschitz, bool superlevel, int depth) {
    if (!(a < b)) throw precondition_error("measure interval must satisfy a < b");
    if (samples.size() < 2) throw precondition_error("measure grid needs at least 2 cells");
    if (!(lipschitz >= 0)) throw precondition_error("lipschitz constant must be nonnegative");
    if (depth < 0 || depth > 40) throw precondition_error("refinement depth out of range");
    const long grid = static_cast<long>(samples.size());
    const double h = (b - a) / static_cast<double>(grid);
    const double slack = 0.5 * lipschitz * h;
    long in = 0, unresolved = 0;
    double lower_extra = 0, upper_extra = 0;
    for (long i = 0; i < grid; ++i) {
        const double v = samples[static_cast<std::size_t>(i)];
        const bool fully_in = superlevel ? v - slack >= level : v + slack <= level;
        const bool fully_out = superlevel ? v + slack < level : v - slack > level;
        if (fully_in)
            ++in;
        else if (!fully_out)
            refine_cell(g, a + static_cast<double>(i) * h, h, level, lipschitz, superlevel,
                        depth, lower_extra, upper_extra, unresolved);
    }
    CertifiedMeasure m;
    m.grid_points = grid;
    m.lipschitz = lipschitz;
    m.lower = static_cast<double>(in) * h + lower_extra;
    m.upper = static_cast<double>(in) * h + upper_extra;
    m.boundary_cells = unresolved;
    return m;
}

} // namespace detail

// meas{theta in [a,b] : g(theta) >= level}. A cell of width h with center
// sample v is fully in when v - L h/2 >= level and fully out when
// v + L h/2 < level; anything else is charged to upper only.
template <class G>
CertifiedMeasure certified_superlevel(G&& g, double a, double b, double level,
                                      double lipschitz, long grid) {
    return detail::classify_cells([&](long, double c) { return g(c); }, a, b, level, lipschitz,
                                  grid, true);
}

// meas{theta in [a,b] : g(theta) <= level}, mirrored cell rules.
template <class G>
CertifiedMeasure certified_sublevel(G&& g, double a, double b, double level,
                                    double lipschitz, long grid) {
    return detail::classify_cells([&](long, double c) { return g(c); }, a, b, level, lipschitz,
                                  grid, false);
}

// Same classifications over precomputed cell-center samples
// v[i] = g(a + (i + 1/2) h), h = (b - a) / v.size(), so one scan of an
// expensive g can serve many levels.
inline CertifiedMeasure certified_superlevel_from_samples(const std::vector<double>& v, double a,
                                                          double b, double level,
                                                          double lipschitz) {
    return detail::classify_cells([&](long i, double) { return v[static_cast<std::size_t>(i)]; },
                                  a, b, level, lipschitz, static_cast<long>(v.size()), true);
}

inline CertifiedMeasure certified_sublevel_from_samples(const std::vector<double>& v, double a,
                                                        double b, double level, double lipschitz) {
    return detail::classify_cells([&](long i, double) { return v[static_cast<std::size_t>(i)]; },
                                  a, b, level, lipschitz, static_cast<long>(v.size()), false);
}

// Refined variants: samples drive the first pass, g resolves boundary cells.
// depth 0 reproduces the unrefined classification.
template <class G>
CertifiedMeasure certified_superlevel_refined(const std::vector<double>& samples, G&& g, double a,
                                              double b, double level, double lipschitz,
                                              int depth) {
    return detail::classify_refined(samples, g, a, b, level, lipschitz, true, depth);
}

template <class G>
CertifiedMeasure certified_sublevel_refined(const std::vector<double>& samples, G&& g, double a,
                                            double b, double level, double lipschitz, int depth) {
    return detail::classify_refined(samples, g, a, b, level, lipschitz, false, depth);
}

template <class G>
std::vector<double> cell_center_samples(G&& g, double a, double b, long grid) {
    if (!(a < b)) throw precondition_error("measure interval must satisfy a < b");
    if (grid < 2) throw precondition_error("measure grid needs at least 2 cells");
    const double h = (b - a) / static_cast<double>(grid);
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(grid));
    for (long i = 0; i < grid; ++i) v.push_back(g(a + (static_cast<double>(i) + 0.5) * h));
    return v;
}

} // namespace rlab
