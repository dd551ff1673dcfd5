#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "leaky/coupling.hpp"
#include "leaky/sandpile.hpp"

using namespace leaky;

namespace {

// Reference stabilizer: one topple at a time, scanning for the first site at
// or above threshold. Deliberately naive; the batched engine must match it.
template <class S>
StabilizationResult<S> naive_stabilize(HeightField<S> h, const ToppleRule<S>& rule) {
    const S thr = rule.threshold();
    Grid<S> cnt(h.radius(), S(0));
    bool any = true;
    while (any) {
        any = false;
        for (int y = -h.radius(); y <= h.radius() && !any; ++y) {
            for (int x = -h.radius(); x <= h.radius() && !any; ++x) {
                if (h(x, y) >= thr) {
                    h(x, y) -= thr;
                    cnt(x, y) += 1;
                    h(x + 1, y) += rule.c_right;
                    h(x - 1, y) += rule.c_left;
                    h(x, y + 1) += rule.c_up;
                    h(x, y - 1) += rule.c_down;
                    any = true;
                }
            }
        }
    }
    StabilizationResult<S> res;
    res.max_topples = S(0);
    S total(0);
    for (const auto& c : cnt.cells()) {
        total += c;
        if (c > res.max_topples) res.max_topples = c;
    }
    res.leaked = total * rule.leak_per_topple();
    res.odometer = Grid<S>(cnt.radius(), S(0));
    for (std::size_t i = 0; i < cnt.size(); ++i) res.odometer[i] = cnt[i] * thr;
    res.final = std::move(h);
    res.topples = std::move(cnt);
    return res;
}

// Classical ASM with background height -1: origin starts at n-1, every other
// site at -1; threshold 4, sends 1 chip each way. Oracle for the modified-ASM
// equivalence stated by the coupling theorem.
Grid<std::int64_t> classical_asm_background_minus1(std::int64_t n, int radius) {
    Grid<std::int64_t> h(radius, -1);
    h(0, 0) = n - 1;
    bool any = true;
    while (any) {
        any = false;
        for (int y = -radius; y <= radius; ++y)
            for (int x = -radius; x <= radius; ++x)
                if (h(x, y) >= 4) {
                    if (h.on_edge(x, y)) throw std::runtime_error("oracle grid too small");
                    std::int64_t k = h(x, y) / 4;
                    h(x, y) -= 4 * k;
                    h(x + 1, y) += k;
                    h(x - 1, y) += k;
                    h(x, y + 1) += k;
                    h(x, y - 1) += k;
                    any = true;
                }
    }
    return h;
}

Rational qsum(const Grid<Rational>& g) {
    Rational s(0);
    for (const auto& v : g.cells()) s += v;
    return s;
}

}  // namespace

TEST_CASE("point_source basics") {
    SECTION("empty configuration") {
        auto f = point_source<double>(0.0, 5);
        for (double v : f.cells()) REQUIRE(v == 0.0);
    }
    SECTION("five chips at the origin") {
        auto f = point_source<double>(5.0, 2);
        REQUIRE(f(0, 0) == 5.0);
        REQUIRE(f(1, 0) == 0.0);
        REQUIRE(f.radius() == 2);
    }
    SECTION("astronomic float counts are representable") {
        auto f = point_source<double>(1e100, 200);
        REQUIRE(f(0, 0) == 1e100);
    }
    SECTION("float overflow advises rational mode") {
        REQUIRE_THROWS_AS(point_source<double>(1e301, 4), std::overflow_error);
        REQUIRE_THROWS_WITH(point_source<double>(1e301, 4),
                            Catch::Matchers::ContainsSubstring("rational"));
    }
    SECTION("negative count rejected") {
        REQUIRE_THROWS_AS(point_source<double>(-1.0, 4), std::invalid_argument);
    }
}

TEST_CASE("stabilize small hand cases") {
    auto rule = ToppleRule<double>::uniform(1.25);  // threshold 5
    SECTION("below threshold: nothing fires") {
        auto res = stabilize(point_source<double>(3.0, 4), rule);
        REQUIRE(res.visited_count() == 0);
        REQUIRE(res.final(0, 0) == 3.0);
        REQUIRE(res.leaked == 0.0);
    }
    SECTION("single forced topple") {
        auto res = stabilize(point_source<double>(5.0, 4), rule);
        REQUIRE(res.final(0, 0) == 0.0);
        REQUIRE(res.final(1, 0) == 1.0);
        REQUIRE(res.final(-1, 0) == 1.0);
        REQUIRE(res.final(0, 1) == 1.0);
        REQUIRE(res.final(0, -1) == 1.0);
        REQUIRE(res.leaked == 1.0);
        REQUIRE(res.odometer(0, 0) == 5.0);
        REQUIRE(res.visited_count() == 1);
        REQUIRE(res.max_topples == 1.0);
    }
    SECTION("batched engine matches the naive reference, rational mode") {
        auto r2 = ToppleRule<Rational>::uniform(Rational(2));
        auto field = point_source<Rational>(Rational(100), 8);
        auto fast = stabilize(field, r2);
        auto slow = naive_stabilize(field, r2);
        REQUIRE(fast.final == slow.final);
        REQUIRE(fast.odometer == slow.odometer);
        REQUIRE(fast.topples == slow.topples);
        REQUIRE(fast.leaked == slow.leaked);
    }
}

TEST_CASE("apply_T") {
    SECTION("zero field") {
        auto rule = ToppleRule<double>::uniform(1.25);
        Grid<double> u(3, 0.0);
        auto t = apply_T(u, rule);
        for (double v : t.cells()) REQUIRE(v == 0.0);
    }
    SECTION("hand evaluation at a point mass") {
        auto rule = ToppleRule<double>::uniform(1.25);  // c d = 5
        Grid<double> u(3, 0.0);
        u(0, 0) = 5.0;
        auto t = apply_T(u, rule);
        REQUIRE(t(0, 0) == -5.0);
        REQUIRE(t(1, 0) == 1.0);
        REQUIRE(t(-1, 0) == 1.0);
        REQUIRE(t(0, 1) == 1.0);
        REQUIRE(t(0, -1) == 1.0);
        REQUIRE(t(1, 1) == 0.0);
    }
    SECTION("odometer identity Tu = f - n delta, exact") {
        auto rule = ToppleRule<Rational>::uniform(Rational(5, 4));
        const Rational n(137);
        auto res = stabilize(point_source<Rational>(n, 16), rule);
        auto tu = apply_T(res.odometer, rule);
        for (int y = -10; y <= 10; ++y)
            for (int x = -10; x <= 10; ++x) {
                Rational rhs = res.final(x, y) - (x == 0 && y == 0 ? n : Rational(0));
                REQUIRE(tu(x, y) == rhs);
            }
    }
    SECTION("odometer identity, float mode at n = 1e20") {
        auto rule = ToppleRule<double>::uniform(2.0);
        const double n = 1e20;
        auto res = stabilize(point_source<double>(n, suggest_radius(std::log(n), 2.0)), rule);
        auto tu = apply_T(res.odometer, rule);
        double worst = 0;
        for (int y = -res.final.radius(); y <= res.final.radius(); ++y)
            for (int x = -res.final.radius(); x <= res.final.radius(); ++x) {
                double rhs = res.final(x, y) - (x == 0 && y == 0 ? n : 0.0);
                worst = std::max(worst, std::abs(tu(x, y) - rhs));
            }
        REQUIRE(worst <= 1e-9 * n);
    }
}

TEST_CASE("abelianness under random firing orders") {
    std::mt19937_64 rng(20240817);
    auto rule = ToppleRule<Rational>::uniform(Rational(3, 2));
    for (int trial = 0; trial < 10; ++trial) {
        HeightField<Rational> f(6, Rational(0));
        std::uniform_int_distribution<int> coord(-2, 2), chunk(0, 60);
        long mass = 0;
        while (mass < 440) {
            int c = chunk(rng);
            f(coord(rng), coord(rng)) += c;
            mass += c;
        }
        auto ref = stabilize(f, rule);
        for (int order = 0; order < 20; ++order) {
            auto alt = stabilize_random_order(f, rule, rng);
            REQUIRE(alt.final == ref.final);
            REQUIRE(alt.odometer == ref.odometer);
        }
    }
}

TEST_CASE("conservation, symmetry, monotonicity") {
    SECTION("mass accounting is exact in rational mode") {
        auto rule = ToppleRule<Rational>::uniform(Rational(7, 5));
        auto field = point_source<Rational>(Rational(5000), 24);
        auto res = stabilize(field, rule);
        REQUIRE(!res.boundary_touched);
        REQUIRE(qsum(res.final) + res.leaked == Rational(5000));
    }
    SECTION("mass accounting in float mode") {
        auto rule = ToppleRule<double>::uniform(2.0);
        double n = 1e20;
        auto res = stabilize(point_source<double>(n, suggest_radius(std::log(n), 2.0)), rule);
        KahanSum total;
        for (double v : res.final.cells()) total.add(v);
        REQUIRE(std::abs(total.value() + res.leaked - n) <= 1e-9 * n);
    }
    SECTION("dihedral symmetry of the uniform rule") {
        auto rule = ToppleRule<double>::uniform(1.5);
        double n = 1e12;
        auto res = stabilize(point_source<double>(n, suggest_radius(std::log(n), 1.5)), rule);
        const int R = res.final.radius();
        for (int y = 0; y <= R; ++y)
            for (int x = y; x <= R; ++x) {
                double v = res.final(x, y);
                for (auto [sx, sy] : {std::pair{y, x}, {-x, y}, {x, -y}, {-y, x}, {y, -x}, {-x, -y}, {-y, -x}}) {
                    REQUIRE_THAT(res.final(sx, sy),
                                 Catch::Matchers::WithinRel(v, 1e-12) ||
                                     Catch::Matchers::WithinAbs(v, 1e-300));
                }
            }
    }
    SECTION("visited sets are monotone in n") {
        auto rule = ToppleRule<double>::uniform(2.0);
        auto small = stabilize(point_source<double>(1e6, 40), rule);
        auto big = stabilize(point_source<double>(1e8, 40), rule);
        for (int y = -40; y <= 40; ++y)
            for (int x = -40; x <= 40; ++x)
                if (small.visited(x, y)) REQUIRE(big.visited(x, y));
    }
    SECTION("final heights live in [0, threshold)") {
        auto rule = ToppleRule<double>::uniform(1.25);
        auto res = stabilize(point_source<double>(3.7e7, suggest_radius(std::log(3.7e7), 1.25)), rule);
        for (double v : res.final.cells()) {
            REQUIRE(v >= 0.0);
            REQUIRE(v < rule.threshold());
        }
    }
}

TEST_CASE("grid growth") {
    auto rule = ToppleRule<double>::uniform(2.0);
    SECTION("auto mode grows and matches a big fixed grid") {
        auto grown = stabilize(point_source<double>(1e8, 4), rule);
        auto fixed = stabilize(point_source<double>(1e8, 64), rule);
        REQUIRE(grown.boundary_touched);
        const int R = grown.final.radius();
        REQUIRE(R >= grown.visited_radius() + 1);
        for (int y = -R; y <= R; ++y)
            for (int x = -R; x <= R; ++x) REQUIRE(grown.final(x, y) == fixed.final(x, y));
        REQUIRE(grown.visited_count() == fixed.visited_count());
    }
    SECTION("fixed mode errors out") {
        StabilizeOptions opt;
        opt.auto_grow = false;
        REQUIRE_THROWS_AS(stabilize(point_source<double>(1e8, 4), rule, opt), GridOverflowError);
    }
}

TEST_CASE("modified ASM") {
    SECTION("below threshold") {
        auto res = stabilize_modified_asm(4);
        REQUIRE(res.total_fires == 0);
        REQUIRE(res.final(0, 0) == 4);
    }
    SECTION("single forced topple") {
        auto res = stabilize_modified_asm(5);
        REQUIRE(res.total_fires == 1);
        REQUIRE(res.final(0, 0) == 1);
        REQUIRE(res.final(1, 0) == 1);
        REQUIRE(res.final(0, -1) == 1);
    }
    SECTION("visited heights stay in [1, 5)") {
        auto res = stabilize_modified_asm(1000);
        for (int y = -res.final.radius(); y <= res.final.radius(); ++y)
            for (int x = -res.final.radius(); x <= res.final.radius(); ++x) {
                REQUIRE(res.final(x, y) < 5);
                if (res.topples(x, y) > 0) REQUIRE(res.final(x, y) >= 1);
            }
    }
    SECTION("equivalent to classical ASM with background -1") {
        auto res = stabilize_modified_asm(1000);
        auto oracle = classical_asm_background_minus1(1000, res.final.radius());
        for (int y = -res.final.radius(); y <= res.final.radius(); ++y)
            for (int x = -res.final.radius(); x <= res.final.radius(); ++x)
                REQUIRE(res.final(x, y) - 1 == oracle(x, y));
    }
    SECTION("batched and recorded runs agree") {
        auto fast = stabilize_modified_asm(977);
        auto slow = stabilize_modified_asm(977, -1, true);
        REQUIRE(fast.final == slow.final);
        REQUIRE(fast.topples == slow.topples);
        REQUIRE(fast.max_topples == slow.max_topples);
    }
}

TEST_CASE("coupled run") {
    SECTION("n = 0 trivially coupled") {
        auto rep = coupled_run(0);
        REQUIRE(rep.trivial);
        REQUIRE(rep.coupled());
    }
    SECTION("n = 5 hand values") {
        auto rep = coupled_run(5);
        REQUIRE(rep.m_n == 1);
        REQUIRE(rep.t == Rational(1, 8));
        REQUIRE(rep.modified_final(0, 0) == 1);
        REQUIRE(rep.leaky_final(0, 0) == Rational(1) - Rational(4) * rep.t);  // = 1/2
        REQUIRE(ceil_rational(rep.leaky_final(0, 0)) == 1);
        REQUIRE(rep.coupled());
    }
    SECTION("n = 2000 full coupling checks") {
        auto rep = coupled_run(2000);
        REQUIRE(rep.coupled());
        REQUIRE(rep.m_n > 10);
    }
}

TEST_CASE("radial profile") {
    auto rule = ToppleRule<Rational>::uniform(Rational(5, 4));
    SECTION("single visited site") {
        auto res = stabilize(point_source<Rational>(Rational(5), 4), rule);
        auto prof = radial_profile(res, {0.0, 0.5, 1.0});
        for (const auto& s : prof) REQUIRE(s.lattice_r == 0);
    }
    SECTION("L1 ball geometry") {
        StabilizationResult<Rational> res;
        res.topples = Grid<Rational>(6, Rational(0));
        for (int y = -3; y <= 3; ++y)
            for (int x = -3; x <= 3; ++x)
                if (std::abs(x) + std::abs(y) <= 3) res.topples(x, y) = 1;
        res.final = Grid<Rational>(6, Rational(0));
        res.odometer = res.topples;
        auto prof = radial_profile(res, {0.0, 1.0});
        REQUIRE(prof[0].lattice_r == 3);
        REQUIRE(prof[1].lattice_r == 1);  // (1,1) is the farthest diagonal point in the ball
    }
    SECTION("anisotropy of a large simulation sits between circle and diamond") {
        auto frule = ToppleRule<double>::uniform(2.0);
        auto res = stabilize(point_source<double>(1e20, suggest_radius(std::log(1e20), 2.0)), frule);
        auto prof = radial_profile(res, {0.0, 1.0});
        double ratio = prof[0].euclid_r / prof[1].euclid_r;
        REQUIRE(ratio > 1.0);
        REQUIRE(ratio < std::sqrt(2.0));
    }
    SECTION("empty visited set is an error") {
        auto res = stabilize(point_source<Rational>(Rational(3), 4), rule);
        REQUIRE_THROWS_AS(radial_profile(res, {0.0}), std::invalid_argument);
    }
}
