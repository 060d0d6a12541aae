#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rlab/measure.hpp"
#include "rlab/quadrature.hpp"

using namespace rlab;

namespace {

// theta / (2 sin(theta/2)), the modulus of R_f for the point mass at 1.
double unit_ratio(double t) { return t / (2.0 * std::sin(0.5 * t)); }

} // namespace

TEST_CASE("gauss-kronrod reproduces closed forms", "[quadrature]") {
    auto s = adaptive_quadrature([](double x) { return std::sin(x); }, 0.0,
                                 std::acos(-1.0));
    CHECK(s.value == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(s.value - 2.0) <= s.error_estimate + 1e-14);

    auto lc = adaptive_quadrature([](double x) { return 1.0 / x; }, 0.25, 1.0);
    CHECK(lc.value == Catch::Approx(std::log(4.0)).epsilon(1e-10));

    // Series expansion of the integrand gives 0.2515264 +- 5e-7.
    auto rr = adaptive_quadrature(unit_ratio, 0.25, 0.5);
    CHECK(rr.value == Catch::Approx(0.2515264).epsilon(1e-5));

    // Even integrand; value 2.0572695 +- 1e-5 from the same expansion.
    auto sq = adaptive_quadrature([](double t) { return t == 0 ? 1.0 : unit_ratio(t) * unit_ratio(t); },
                                  -1.0, 1.0);
    CHECK(sq.value == Catch::Approx(2.0572695).epsilon(1e-4));
}

TEST_CASE("tightening the tolerance moves the value less than the estimate", "[quadrature]") {
    auto f = [](double x) { return std::exp(-x) / std::sqrt(x); };
    QuadratureOptions loose;
    loose.rel_tol = 1e-6;
    QuadratureOptions tight;
    tight.rel_tol = 1e-12;
    auto a = adaptive_quadrature(f, 1e-6, 1.0, loose);
    auto b = adaptive_quadrature(f, 1e-6, 1.0, tight);
    CHECK(std::abs(a.value - b.value) <= a.error_estimate + 1e-15);
    CHECK(b.error_estimate < a.error_estimate);
}

TEST_CASE("non-integrable singularities exhaust the depth budget", "[quadrature]") {
    QuadratureOptions opt;
    opt.max_depth = 30;
    CHECK_THROWS_AS(adaptive_quadrature([](double x) { return 1.0 / std::abs(x - 1.0 / 3.0); },
                                        -1.0, 1.0, opt),
                    quadrature_error);
    CHECK_THROWS_AS(adaptive_quadrature([](double) { return 0.0; }, 1.0, 1.0),
                    precondition_error);
}

TEST_CASE("dyadic blocks tile [2^-n, 2^-(n-1)]", "[quadrature]") {
    auto blocks = dyadic_block_integrals([](double x) { return 1.0 / x; }, 1, 6);
    REQUIRE(blocks.size() == 6);
    for (const auto& b : blocks)
        CHECK(b.value == Catch::Approx(std::log(2.0)).epsilon(1e-10));

    // Block n covers [2^-n, 2^-(n-1)]: widths sum to 1 - 2^-6.
    auto widths = dyadic_block_integrals([](double) { return 1.0; }, 1, 6);
    double covered = 0;
    for (const auto& b : widths) covered += b.value;
    CHECK(covered == Catch::Approx(1.0 - std::ldexp(1.0, -6)).epsilon(1e-12));

    CHECK_THROWS_AS(dyadic_block_integrals([](double) { return 1.0; }, 0, 3),
                    precondition_error);
}

TEST_CASE("certified measure brackets the cosine superlevel set", "[measure]") {
    const double pi = std::acos(-1.0);
    auto cosf = [](double t) { return std::cos(t); };

    auto half = certified_superlevel(cosf, -pi, pi, 0.0, 1.0, 100000);
    CHECK(half.lower <= pi);
    CHECK(pi <= half.upper);
    CHECK(half.upper - half.lower < 1e-3);

    // meas{cos >= 0.99} = 2 arccos(0.99).
    const double exact = 2.0 * std::acos(0.99);
    auto tight = certified_superlevel(cosf, -pi, pi, 0.99, 1.0, 100000);
    CHECK(tight.lower <= exact);
    CHECK(exact <= tight.upper);
    CHECK(tight.upper - tight.lower < 1e-3);
    CHECK(tight.boundary_cells > 0);

    auto below = certified_sublevel(cosf, -pi, pi, 0.0, 1.0, 100000);
    CHECK(below.lower <= pi);
    CHECK(pi <= below.upper);
}

TEST_CASE("refining the grid shrinks the bracket", "[measure]") {
    const double pi = std::acos(-1.0);
    auto cosf = [](double t) { return std::cos(t); };
    auto coarse = certified_superlevel(cosf, -pi, pi, 0.3, 1.0, 1000);
    auto fine = certified_superlevel(cosf, -pi, pi, 0.3, 1.0, 4000);
    CHECK(fine.upper - fine.lower <= 0.5 * (coarse.upper - coarse.lower));
    CHECK(coarse.lower <= fine.lower + 1e-12);
    CHECK(fine.upper <= coarse.upper + 1e-12);
}

TEST_CASE("random trig superlevel sets stay bracketed", "[measure]") {
    const double pi = std::acos(-1.0);
    std::mt19937 rng(20260819);
    std::uniform_real_distribution<double> amp(0.0, 1.0), lev(-0.5, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
        double norm = a1 + a2 + a3;
        a1 /= norm, a2 /= norm, a3 /= norm;
        auto g = [=](double t) {
            return a1 * std::cos(t) + a2 * std::cos(2 * t) + a3 * std::cos(5 * t);
        };
        const double lip = a1 + 2 * a2 + 5 * a3;
        const double level = lev(rng);
        auto sup = certified_superlevel(g, -pi, pi, level, lip, 20000);
        auto sub = certified_sublevel(g, -pi, pi, level, lip, 20000);
        CHECK(sup.lower <= sup.upper);
        CHECK(sub.lower <= sub.upper);
        // the two sets cover the circle and overlap only where g == level
        CHECK(sup.upper + sub.upper >= 2 * pi - 1e-9);
        CHECK(sup.lower + sub.lower <= 2 * pi + 1e-9);
    }
}
