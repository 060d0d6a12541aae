#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rlab/analysis.hpp"

using namespace rlab;

namespace {

CoefficientSequence random_normalized(std::mt19937_64& rng, int max_support) {
    std::uniform_int_distribution<int> count(1, max_support);
    std::uniform_int_distribution<std::int64_t> gap(1, 3);
    std::uniform_real_distribution<double> wgt(0.01, 1.0);
    std::vector<std::pair<std::int64_t, double>> terms;
    std::int64_t k = 0;
    int n = count(rng);
    for (int i = 0; i < n; ++i) terms.push_back({k += gap(rng), wgt(rng)});
    return normalize(CoefficientSequence{std::move(terms), 0.0, false});
}

std::string meta_value(const VerificationReport& r, const std::string& key) {
    for (const auto& [k, v] : r.meta)
        if (k == key) return v;
    return {};
}

} // namespace

TEST_CASE("superlevel measure brackets the arc of cos theta", "[analysis]") {
    // {cos theta >= 0} on [-pi, pi] has measure exactly pi.
    auto m = certified_superlevel([](double t) { return std::cos(t); }, -kPi, kPi, 0.0, 1.0,
                                  1L << 25);
    CHECK(m.lower <= kPi);
    CHECK(m.upper >= kPi);
    CHECK(m.upper - m.lower <= 2e-6);
    CHECK(std::abs(0.5 * (m.lower + m.upper) - kPi) < 1e-6);
}

TEST_CASE("superlevel bound and sharpness at eps = 0.01", "[analysis]") {
    CosinePolynomial f{{{1.0, 1.0, 0.0}}};
    auto res = superlevel_measure(f, 0.01, 1000000);
    const double exact = 2.0 * std::acos(0.99);
    CHECK(std::abs(0.5 * (res.measure.lower + res.measure.upper) - exact) < 1e-4);
    CHECK(res.report.satisfied);
    CHECK(res.report.rhs == Catch::Approx(0.4 * kPi));
    // cos theta is the extremal witness: the bound is sharp up to a constant
    CHECK(res.measure.upper / res.report.rhs >= 0.22);
}

TEST_CASE("superlevel bound over random normalized sequences", "[analysis]") {
    std::mt19937_64 rng(20260819);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_normalized(rng, 30);
        auto scan = scan_real_part(f, 200000);
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            auto res = superlevel_measure(scan, f, eps);
            CHECK(res.report.satisfied);
            CHECK(res.measure.lower <= res.measure.upper);
        }
    }
}

TEST_CASE("superlevel bound covers irrational frequencies and phases", "[analysis]") {
    CosinePolynomial f{{{0.5, std::sqrt(2.0), 0.7}, {0.5, 3.1, -1.2}}};
    for (double eps : {0.3, 0.05, 1e-3}) {
        auto res = superlevel_measure(f, eps, 400000);
        CHECK(res.report.satisfied);
    }
}

TEST_CASE("superlevel preconditions", "[analysis]") {
    CosinePolynomial f{{{1.0, 1.0, 0.0}}};
    CHECK_THROWS_AS(superlevel_measure(f, 0.0, 10000), precondition_error);
    CHECK_THROWS_AS(superlevel_measure(f, 1.5, 10000), precondition_error);
    CHECK_THROWS_AS(superlevel_measure(f, 0.5, 100), precondition_error);
    CosinePolynomial sub{{{0.9, 1.0, 0.0}}};
    CHECK_THROWS_AS(superlevel_measure(sub, 0.5, 10000), precondition_error);
    CosinePolynomial slow{{{1.0, 0.5, 0.0}}};
    CHECK_THROWS_AS(superlevel_measure(slow, 0.5, 10000), precondition_error);
    CHECK_THROWS_AS(scan_real_part(make_sequence({{1, 0.5}}, 0.5), 10000), precondition_error);
}

TEST_CASE("interval mass bound on the worked symmetric interval", "[analysis]") {
    auto rep = interval_mass_bound_check({{-0.3, 0.3}}, 1.0, 0.0);
    CHECK(rep.lhs == Catch::Approx(0.6));
    const double eps = 2.0 * (0.3 - std::sin(0.3));
    CHECK(eps == Catch::Approx(0.0089596).margin(1e-6));
    CHECK(rep.rhs == Catch::Approx(std::cbrt(4.0 * kPi * kPi * eps)).margin(1e-12));
    CHECK(rep.rhs == Catch::Approx(0.70721).margin(1e-4));
    CHECK(rep.satisfied);
    CHECK(meta_value(rep, "sharp_constant") == "true");
}

TEST_CASE("interval mass bound on random unions", "[analysis]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> shift(-10.0, 10.0), freq(1.0, 10.0),
        phase(-kPi, kPi), point(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = shift(rng);
        std::vector<double> cuts;
        for (int i = 0; i < 12; ++i) cuts.push_back(a + point(rng));
        std::sort(cuts.begin(), cuts.end());
        std::vector<std::pair<double, double>> E;
        for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) E.push_back({cuts[i], cuts[i + 1]});
        auto rep = interval_mass_bound_check(E, freq(rng), phase(rng));
        CHECK(rep.satisfied);
    }
}

TEST_CASE("interval mass preconditions", "[analysis]") {
    CHECK_THROWS_AS(interval_mass_bound_check({{0.0, 1.0}, {0.5, 2.0}}, 1.0, 0.0),
                    precondition_error);
    CHECK_THROWS_AS(interval_mass_bound_check({{0.0, 7.0}}, 1.0, 0.0), precondition_error);
    CHECK_THROWS_AS(interval_mass_bound_check({{0.0, 1.0}}, 0.5, 0.0), precondition_error);
    CHECK(interval_mass_bound_check({}, 1.0, 0.0).satisfied);
}

TEST_CASE("sublevel tail bound on a single atom", "[analysis]") {
    auto f = make_sequence({{3, 0.5}}, 0.0, false);
    // eps = 0.05: cos(3 theta) >= 0.9 pins theta <= acos(0.9)/3
    auto reps = sublevel_tail_check(f, 0.1, {0.05, 0.5});
    REQUIRE(reps.size() == 2);
    const double exact = std::acos(0.9) / 3.0 - 0.1;
    CHECK(std::abs(reps[0].lhs - exact) < 1e-4);
    CHECK(reps[0].rhs == Catch::Approx(4.0 * kPi * 0.1 * std::sqrt(0.05 / 0.5)));
    CHECK(reps[0].satisfied);
    // eps = mass: the sublevel set is the whole window
    CHECK(reps[1].lhs == Catch::Approx(0.1).margin(1e-12));
    CHECK(meta_value(reps[1], "boundary_cells") == "0");
    CHECK(reps[1].satisfied);
}

TEST_CASE("sublevel tail bound over random subprobability tails", "[analysis]") {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<std::int64_t> m_dist(1, 6), gap(1, 4);
    std::uniform_real_distribution<double> wgt(0.05, 1.0), mass(0.2, 1.0), frac(0.3, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::int64_t m = m_dist(rng);
        std::vector<std::pair<std::int64_t, double>> terms;
        std::int64_t k = m;
        for (int i = 0; i < 6; ++i, k += gap(rng)) terms.push_back({k, wgt(rng)});
        const double r = mass(rng);
        double total = 0;
        for (auto& [_, w] : terms) total += w;
        for (auto& [_, w] : terms) w *= r / total;
        auto f = make_sequence(std::move(terms), 0.0, false);
        const double theta0 = frac(rng) / static_cast<double>(m);
        // eps = mass must use the mass the sequence actually carries
        const double ra = f.total_mass();
        for (double eps : {ra, ra / 2, ra / 10, ra / 100}) {
            auto reps = sublevel_tail_check(f, theta0, {eps}, 20000);
            CHECK(reps[0].satisfied);
        }
    }
}

TEST_CASE("sublevel tail preconditions", "[analysis]") {
    auto f = make_sequence({{3, 0.5}}, 0.0, false);
    CHECK_THROWS_AS(sublevel_tail_check(f, 0.1, {0.0}), precondition_error);
    CHECK_THROWS_AS(sublevel_tail_check(f, 0.1, {0.6}), precondition_error);
    CHECK_THROWS_AS(sublevel_tail_check(f, 0.4, {0.1}), precondition_error);
    auto zero = make_sequence({{3, 0.0}}, 0.0, false);
    CHECK_THROWS_AS(sublevel_tail_check(zero, 0.1, {0.1}), precondition_error);
}

TEST_CASE("layer cake bound on the identity profile", "[analysis]") {
    std::vector<double> phi(4096);
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = 0.25 + (static_cast<double>(i) + 0.5) * 0.75 / 4096.0;
    auto rep = layer_cake_check(phi, 0.75, 0.25, 1.0, 1.0, 0.0, 1.0);
    CHECK(rep.lhs == Catch::Approx(std::log(4.0)).margin(1e-5));
    CHECK(rep.rhs == Catch::Approx(4.75));
    CHECK(rep.satisfied);
    CHECK(meta_value(rep, "hypothesis") == "holds");
}

TEST_CASE("layer cake reports a violated distribution hypothesis", "[analysis]") {
    std::vector<double> phi(512, 0.25);
    auto rep = layer_cake_check(phi, 1.0, 0.25, 1.0, 0.1, 0.0, 1.0);
    CHECK_FALSE(rep.satisfied);
    CHECK(meta_value(rep, "hypothesis") == "violated");
}

TEST_CASE("layer cake bound over admissible quadratic profiles", "[analysis]") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> rd(0.5, 2.0), ed(0.01, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
        const double r = rd(rng), eta = ed(rng) * r, omega = 1.0;
        // phi(s) = r s^2 on [sqrt(eta/r), 1]: meas{phi <= t} <= sqrt(t/r)
        const double s0 = std::sqrt(eta / r);
        const int n = 2048;
        std::vector<double> phi;
        const double width = omega - s0;
        for (int i = 0; i < n; ++i) {
            const double s = s0 + (static_cast<double>(i) + 0.5) * width / n;
            phi.push_back(r * s * s);
        }
        for (double p : {1.0, 2.0, 3.0})
            for (double d : {0.0, 0.3}) {
                auto rep = layer_cake_check(phi, width, eta, r, omega, d, p);
                CHECK(rep.satisfied);
                CHECK(meta_value(rep, "hypothesis") == "holds");
            }
    }
}

TEST_CASE("dyadic lp window bound at the unit atom", "[analysis]") {
    auto f = make_sequence({{1, 1.0}});
    auto rep = dyadic_lp_integral(f, 1.0, 0.25);
    CHECK(rep.integral == Catch::Approx(0.2515264).margin(2e-6));
    CHECK(rep.rhs == Catch::Approx(192.0));
    CHECK(rep.satisfied);
    CHECK(meta_value(rep.report, "r") == "0");
    CHECK(rep.integral_error <= 1e-6 * rep.integral);
}

TEST_CASE("dyadic lp window bound across exponents and scales", "[analysis]") {
    auto one = make_sequence({{1, 1.0}});
    auto two = make_sequence({{1, 0.5}, {2, 0.5}});
    auto fe = log_power_sequence(1.0, 1 << 15);
    for (const auto& f : {one, two, fe})
        for (double p : {1.0, 2.0, 3.0})
            for (int j : {2, 6, 10}) {
                auto rep = dyadic_lp_integral(f, p, std::ldexp(1.0, -j));
                CHECK(rep.satisfied);
                CHECK(rep.integral_error <= 1e-6 * std::max(rep.integral, 1e-30));
            }
}

TEST_CASE("dyadic lp integral is self consistent under tighter tolerance", "[analysis]") {
    auto f = make_sequence({{1, 0.5}, {2, 0.5}});
    auto loose = dyadic_lp_integral(f, 2.0, 0.125, {1e-6, 0.0, 40});
    auto tight = dyadic_lp_integral(f, 2.0, 0.125, {1e-10, 0.0, 40});
    CHECK(std::abs(loose.integral - tight.integral) <= std::max(loose.integral_error, 1e-14));
}

TEST_CASE("dyadic lp preconditions", "[analysis]") {
    auto f = make_sequence({{1, 1.0}});
    CHECK_THROWS_AS(dyadic_lp_integral(f, 0.5, 0.25), precondition_error);
    CHECK_THROWS_AS(dyadic_lp_integral(f, 1.0, 1.5), precondition_error);
    auto far = make_sequence({{8, 1.0}});
    CHECK_THROWS_AS(dyadic_lp_integral(far, 1.0, 0.5), precondition_error);
}

TEST_CASE("block ratios and verdicts", "[analysis]") {
    CHECK(dyadic_verdict({}) == SeriesVerdict::Converging);
    CHECK(dyadic_verdict({0.0, 0.0}) == SeriesVerdict::Converging);
    CHECK(dyadic_verdict({1.0}) == SeriesVerdict::Inconclusive);
    CHECK(dyadic_verdict({1.0, 1.0, 1.0, 1.0, 1.0}) == SeriesVerdict::Diverging);
    CHECK(dyadic_verdict({1.0, 0.4, 0.16, 0.06, 0.02}) == SeriesVerdict::Converging);
    CHECK(dyadic_verdict({1.0, 0.9, 0.2, 0.9, 0.9}) == SeriesVerdict::Inconclusive);
    // only the last four ratios matter
    CHECK(dyadic_verdict({5.0, 1.0, 0.9, 0.81, 0.78, 0.70}) == SeriesVerdict::Diverging);
    CHECK(dyadic_verdict({0.1, 1.0, 0.5, 0.25, 0.12, 0.06}) == SeriesVerdict::Converging);
    auto r = consecutive_ratios({1.0, 2.0, 4.0, 2.0});
    REQUIRE(r.size() == 3);
    CHECK(r[0] == 2.0);
    CHECK(r[1] == 2.0);
    CHECK(r[2] == 0.5);
    CHECK(std::isinf(consecutive_ratios({0.0, 1.0})[0]));
    CHECK(consecutive_ratios({0.0, 0.0})[0] == 0.0);
}

TEST_CASE("two-sided comparison diverges for the unit atom", "[analysis]") {
    auto rep = l1_two_sided(make_sequence({{1, 1.0}}), 1, 16);
    CHECK(rep.lower_series.verdict == SeriesVerdict::Diverging);
    CHECK(rep.upper_series.verdict == SeriesVerdict::Diverging);
    CHECK(rep.integral.verdict == SeriesVerdict::Diverging);
    // both series collapse to the harmonic sum H_{2^16 - 1}
    CHECK(rep.lower_series.total == Catch::Approx(11.66756).margin(1e-3));
    CHECK(rep.upper_series.total == Catch::Approx(rep.lower_series.total));
    // closed form: integral of 1/(2 sin(theta/2)) is log tan(theta/4)
    const double exact = std::log(std::tan(0.25)) - std::log(std::tan(std::ldexp(1.0, -18)));
    CHECK(rep.integral.total == Catch::Approx(exact).epsilon(1e-6));
}

TEST_CASE("two-sided comparison diverges for the two-atom sequence", "[analysis]") {
    for (std::int64_t m0 : {1, 2}) {
        auto rep = l1_two_sided(make_sequence({{1, 0.5}, {2, 0.5}}), m0, 14);
        CHECK(rep.lower_series.verdict == SeriesVerdict::Diverging);
        CHECK(rep.upper_series.verdict == SeriesVerdict::Diverging);
        CHECK(rep.integral.verdict == SeriesVerdict::Diverging);
    }
}

TEST_CASE("two-sided comparison on slowly decaying log weights", "[analysis]") {
    auto f0 = log_power_sequence(0.0, 1 << 17);
    auto rep0 = l1_two_sided(f0, 1, 16);
    CHECK(rep0.lower_series.verdict == SeriesVerdict::Diverging);
    CHECK(rep0.upper_series.verdict == SeriesVerdict::Diverging);
    CHECK(rep0.integral.verdict == SeriesVerdict::Diverging);

    // W_n ~ c log^2 n here, so the upper blocks shrink like 1/j^2: the
    // ratios (j/(j+1))^2 creep toward 1 and never show geometric decay
    auto f1 = log_power_sequence(1.0, 1 << 17);
    auto rep1 = l1_two_sided(f1, 1, 16);
    REQUIRE(rep1.upper_series.ratios.size() == 15);
    for (std::size_t i = 11; i < 15; ++i) {
        CHECK(rep1.upper_series.ratios[i] >= 0.8);
        CHECK(rep1.upper_series.ratios[i] < 1.0);
    }
    CHECK(rep1.upper_series.ratios[14] == Catch::Approx(0.8775).margin(5e-3));
    CHECK(rep1.upper_series.verdict == SeriesVerdict::Diverging);
    CHECK_FALSE(rep1.truncated_at_support);
}

TEST_CASE("two-sided comparison truncates at the stored support", "[analysis]") {
    auto f = log_power_sequence(1.0, 1 << 12);
    auto rep = l1_two_sided(f, 1, 16);
    CHECK(rep.truncated_at_support);
    CHECK(rep.levels == 12);
}

TEST_CASE("two-sided comparison preconditions", "[analysis]") {
    CHECK_THROWS_AS(l1_two_sided(make_sequence({{5, 1.0}}), 3, 8), precondition_error);
    CHECK_THROWS_AS(l1_two_sided(make_sequence({{1, 1.0}}), 0, 8), precondition_error);
    CHECK_THROWS_AS(l1_two_sided(make_sequence({{1, 1.0}}), 1, 30), precondition_error);
}

TEST_CASE("log power sequences are normalized with a certified tail", "[analysis]") {
    for (double s : {0.0, 0.5, 1.0}) {
        auto f = log_power_sequence(s, 1 << 12);
        CHECK(f.tail_mass > 0);
        CHECK(f.total_mass() == Catch::Approx(1.0).margin(1e-12));
        CHECK(f.terms.front().first == 1);
        // the certified tail stays on the density scale a_K * K
        const double scale = f.terms.back().second * 4096.0;
        CHECK(f.tail_mass > 0.5 * scale);
        CHECK(f.tail_mass < 3.0 * scale);
    }
}

TEST_CASE("condensation bracket on the worked inverse-square instance", "[analysis]") {
    auto q = [](std::int64_t n) -> mpq_class { return mpq_class(1) / (mpq_class(n) * mpq_class(n)); };
    auto rep = dyadic_block_compare(q, 1.0, 2, 20);
    CHECK(rep.satisfied);
    CHECK(rep.lhs == Catch::Approx(0.141911).margin(1e-3));
    CHECK(rep.rhs == Catch::Approx(1.57973).margin(1e-3));
    CHECK(std::stod(meta_value(rep, "middle")) == Catch::Approx(0.5).margin(1e-3));
    CHECK(meta_value(rep, "left_below_middle") == "certified");
    CHECK(meta_value(rep, "middle_below_right") == "certified");
}

TEST_CASE("condensation bracket across half-integer exponents", "[analysis]") {
    auto q = [](std::int64_t n) -> mpq_class { return mpq_class(1) / (mpq_class(n) * mpq_class(n + 1)); };
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0})
        for (int m : {1, 2, 3}) {
            auto rep = dyadic_block_compare(q, alpha, m, 12);
            CHECK(rep.satisfied);
        }
}

TEST_CASE("condensation bracket on random rational hyperbolas", "[analysis]") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<long> coef(1, 50);
    for (int trial = 0; trial < 20; ++trial) {
        const long p = coef(rng), q0 = coef(rng), step = coef(rng);
        auto q = [=](std::int64_t n) -> mpq_class { return mpq_class(p) / (mpq_class(q0) + mpq_class(step) * mpq_class(n)); };
        std::uniform_int_distribution<int> mi(1, 3);
        const double alpha = 0.5 * std::uniform_int_distribution<int>(0, 4)(rng);
        auto rep = dyadic_block_compare(q, alpha, mi(rng), 10);
        CHECK(rep.satisfied);
    }
}

TEST_CASE("condensation bracket preconditions", "[analysis]") {
    auto inc = [](std::int64_t n) -> mpq_class { return mpq_class(n); };
    CHECK_THROWS_AS(dyadic_block_compare(inc, 1.0, 1, 6), precondition_error);
    auto ok = [](std::int64_t n) -> mpq_class { return mpq_class(1, static_cast<unsigned long>(n)); };
    CHECK_THROWS_AS(dyadic_block_compare(ok, 0.3, 1, 6), precondition_error);
    CHECK_THROWS_AS(dyadic_block_compare(ok, 1.0, 0, 6), precondition_error);
    CHECK_THROWS_AS(dyadic_block_compare(ok, 1.0, 3, 2), precondition_error);
}

TEST_CASE("lp criteria at the unit atom", "[analysis]") {
    auto rep = lp_criteria(make_sequence({{1, 1.0}}), 0.5, 3.0);
    CHECK(rep.p_star == Catch::Approx(3.0));
    CHECK(rep.weighted_norm == Catch::Approx(1.0));
    CHECK(rep.n0 == 1);
    CHECK(rep.membership_sum.total == 0.0);
    CHECK(rep.membership_sum.verdict == SeriesVerdict::Converging);
    CHECK(rep.l2_integral == Catch::Approx(2.0572695).margin(1e-3));
    CHECK(rep.l2_bound == Catch::Approx(kPi * kPi * kPi));
    CHECK(rep.l2_report.satisfied);
}

TEST_CASE("lp criteria on random aperiodic sequences", "[analysis]") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 15; ++trial) {
        auto f = random_normalized(rng, 20);
        if (!is_aperiodic(f)) continue;
        auto rep = lp_criteria(f, 0.5, 3.0, 10);
        CHECK(rep.l2_report.satisfied);
        CHECK(rep.membership_sum.verdict == SeriesVerdict::Converging);
    }
}

TEST_CASE("lp criteria on a slowly decaying sequence", "[analysis]") {
    auto f = log_power_sequence(1.0, 1 << 14);
    auto rep = lp_criteria(f, 0.4, 3.0, 13);
    CHECK(rep.p_star == Catch::Approx(1.0 + 1.0 / 0.6));
    CHECK(std::isnan(rep.weighted_norm));
    CHECK(rep.l2_report.satisfied);
    CHECK_FALSE(rep.sum_truncated_at_support);
}

TEST_CASE("lp criteria preconditions", "[analysis]") {
    auto f = make_sequence({{1, 1.0}});
    CHECK_THROWS_AS(lp_criteria(f, 0.5, 2.0), precondition_error);
    CHECK_THROWS_AS(lp_criteria(f, 1.0, 3.0), precondition_error);
    auto zero = make_sequence({{1, 0.0}}, 1.0);
    CHECK_THROWS_AS(lp_criteria(zero, 0.5, 3.0), precondition_error);
}

TEST_CASE("window lower sums grow past the critical exponent", "[analysis]") {
    std::vector<double> theta, width, bound;
    for (int m = 1; m <= 6; ++m) {
        const double t = std::ldexp(1.0, -m);
        theta.push_back(t);
        width.push_back(std::pow(t, 2.0));          // theta^{3 - 2 nu}, nu = 1/2
        bound.push_back(std::pow(t, 1.4));          // theta^{2 - nu - eps}, eps = 0.1
    }
    auto lows = lp_window_lower_sums(theta, width, bound, 6.0);
    for (std::size_t i = 1; i < lows.size(); ++i) CHECK(lows[i] > lows[i - 1]);
    CHECK(lows.back() / lows.front() == Catch::Approx(4.0).margin(1e-9));
    CHECK_THROWS_AS(lp_window_lower_sums(theta, width, bound, 0.5), precondition_error);
    CHECK_THROWS_AS(lp_window_lower_sums({1.0}, {}, {}, 2.0), precondition_error);
}

TEST_CASE("epsilon-set bound at the unit atom", "[analysis]") {
    auto f = make_sequence({{1, 1.0}});
    auto rep = epsilon_set_bound(f, 0.5, 0.25, {1e-1, 1e-2, 1e-3, 2.0});
    CHECK(rep.c_alpha > 4.0);
    CHECK(rep.c_alpha < 7.0);
    for (const auto& chk : rep.checks) CHECK(chk.satisfied);
    // eps = 2 makes E the whole circle; the bound must clear 2 pi
    CHECK(rep.checks.back().lhs == Catch::Approx(2.0 * kPi).margin(1e-3));
}

TEST_CASE("epsilon sublevel sets sit inside the superlevel sets", "[analysis]") {
    std::mt19937_64 rng(2026);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_normalized(rng, 15);
        const double lips = derivative_bound(f);
        auto dist = cell_center_samples(
            [&](double t) { return modulus(one_minus_eval(f, t)); }, -kPi, kPi, 40000);
        auto re = cell_center_samples([&](double t) { return eval(f, t).re; }, -kPi, kPi, 40000);
        for (double eps : {0.5, 0.1, 0.01}) {
            auto E = certified_sublevel_from_samples(dist, -kPi, kPi, eps, lips);
            auto G = certified_superlevel_from_samples(re, -kPi, kPi, 1.0 - eps, lips);
            CHECK(E.lower <= G.lower);
            CHECK(E.upper <= G.upper);
        }
    }
}

TEST_CASE("epsilon-set preconditions", "[analysis]") {
    auto periodic = make_sequence({{2, 1.0}});
    CHECK_THROWS_AS(epsilon_set_bound(periodic, 0.5, 0.25, {0.1}), precondition_error);
    auto f = make_sequence({{1, 1.0}});
    CHECK_THROWS_AS(epsilon_set_bound(f, 0.5, 0.6, {0.1}), precondition_error);
    CHECK_THROWS_AS(epsilon_set_bound(f, 1.0, 0.25, {0.1}), precondition_error);
}
