#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lpquant/lpquant.hpp"

using namespace lpquant;
using Catch::Approx;
using testutil::all_atoms;
using testutil::make_space;
using testutil::space1d;

TEST_CASE("exhaustive search finds the two-cluster optimum") {
    const MeasureSpace sp = space1d({0.0, 0.1, 5.0, 5.1});
    const NormDescriptor n = NormDescriptor::euclidean(1);
    const OracleResult r = brute_force(sp, n, 2.0, 2);

    CHECK(r.cost == Approx(0.1).margin(1e-12));
    REQUIRE(r.partition.size() == 2);
    CHECK(r.partition[0] == Cell{0, 1});
    CHECK(r.partition[1] == Cell{2, 3});
    CHECK(r.centers[0][0] == Approx(0.05).margin(1e-12));
    CHECK(r.centers[1][0] == Approx(5.05).margin(1e-12));
    CHECK(r.enumerated == 8);  // 2^(4-1) labelings

    SECTION("k equal to the atom count gives zero cost") {
        CHECK(brute_force(sp, n, 2.0, 4).cost == Approx(0.0).margin(1e-12));
    }

    SECTION("k = 1 agrees with the whole-space mean") {
        const OracleResult one = brute_force(sp, n, 2.0, 1);
        const PMeanResult m = solve_pmean(sp, all_atoms(sp), n, 2.0);
        CHECK(one.cost == Approx(std::pow(m.value, 0.5)).margin(1e-10));
        CHECK(one.enumerated == 1);
    }
}

TEST_CASE("guards refuse oversized instances") {
    std::mt19937_64 g(71);
    const MeasureSpace big = testutil::random_space(g, 14, 1);
    const NormDescriptor n = NormDescriptor::euclidean(1);
    CHECK_THROWS_AS(brute_force(big, n, 2.0, 2), error);

    const MeasureSpace ok = testutil::random_space(g, 6, 1);
    CHECK_THROWS_AS(brute_force(ok, n, 2.0, 5), error);

    SECTION("explicit overrides widen the guards") {
        OracleOptions opts;
        opts.max_atoms = 14;
        opts.max_assignments = 20'000'000.0;
        CHECK_NOTHROW(brute_force(big, n, 2.0, 2, opts));
        OracleOptions wide;
        wide.max_groups = 5;
        wide.max_assignments = 20'000'000.0;
        CHECK_NOTHROW(brute_force(ok, n, 2.0, 5, wide));
    }

    SECTION("p = inf is not supported") {
        CHECK_THROWS_AS(brute_force(ok, n, kInf, 2), error);
    }
}

TEST_CASE("oracle cost lower-bounds the iterative solver") {
    std::mt19937_64 g(72);
    for (int t = 0; t < 12; ++t) {
        const int d = 1 + t % 2;
        const MeasureSpace sp = testutil::random_space(g, 7, d);
        const NormDescriptor n = d == 1 ? NormDescriptor::euclidean(1)
                                        : NormDescriptor::lq(2, 3.0);
        const double p = 1.0 + t % 3;
        const OracleResult oracle = brute_force(sp, n, p, 2);

        QuantizerConfig cfg;
        cfg.k = 2;
        cfg.p = p;
        cfg.restarts = 12;
        cfg.seed = t;
        const QuantizeReport rep = lloyd(sp, n, cfg);
        CHECK(oracle.cost <= rep.cost + 1e-9);
    }
}

TEST_CASE("optimal assignments are in Voronoi form") {
    std::mt19937_64 g(73);
    for (int t = 0; t < 8; ++t) {
        const MeasureSpace sp = testutil::random_space(g, 6, 1);
        const NormDescriptor n = NormDescriptor::euclidean(1);
        const OracleResult r = brute_force(sp, n, 2.0, 2);
        if (r.partition.size() < 2) continue;

        SimpleFunction h;
        h.centers = r.centers;
        h.assignment.resize(sp.size());
        for (std::size_t gi = 0; gi < r.partition.size(); ++gi)
            for (int a : r.partition[gi])
                h.assignment[a] = static_cast<int>(gi);
        QuantizerConfig cfg;
        cfg.k = 2;
        const Certificate cert = certify(sp, n, cfg, h);
        CHECK(cert.voronoi_residual <= 1e-10);
    }
}

TEST_CASE("infinite mass forces the zero group") {
    const MeasureSpace sp = space1d({4.0, 4.1, -3.0}, {1.0, 1.0, 1.0}, true);
    const NormDescriptor n = NormDescriptor::euclidean(1);
    const OracleResult r = brute_force(sp, n, 2.0, 3);

    REQUIRE(!r.partition.empty());
    CHECK(r.centers[0] == Vec{0.0});
    CHECK(r.enumerated == 27);  // all 3^3 labelings; no symmetry to exploit

    // optimal: {4, 4.1} on their mean, {-3} exact, nothing at zero
    CHECK(r.cost == Approx(std::sqrt(2.0 * 0.05 * 0.05)).margin(1e-12));

    SECTION("the flag forces the regime on finite spaces") {
        const MeasureSpace fin = space1d({4.0, 4.1, -3.0});
        OracleOptions opts;
        opts.pinned_zero = true;
        const OracleResult rf = brute_force(fin, n, 2.0, 3, opts);
        CHECK(rf.centers[0] == Vec{0.0});
        CHECK(rf.cost == Approx(std::sqrt(2.0 * 0.05 * 0.05)).margin(1e-12));
    }
}

TEST_CASE("grid bound stays below the cell objective") {
    const MeasureSpace sp = space1d({0.0, 2.0});
    const NormDescriptor n = NormDescriptor::euclidean(1);
    const Cell cell = all_atoms(sp);

    // true infimum of (x-0)^2 + (x-2)^2 is 2 at x = 1
    const double fine =
        grid_lower_bound(sp, cell, n, 2.0, {-6.0}, {6.0}, 4001);
    CHECK(fine <= 2.0 + 1e-12);
    CHECK(fine >= 1.5);  // slack shrinks with the grid step

    SECTION("bound is sound at random points in the box") {
        std::mt19937_64 g(74);
        const double lb =
            grid_lower_bound(sp, cell, n, 2.0, {-6.0}, {6.0}, 101);
        for (int t = 0; t < 200; ++t) {
            const double x = testutil::uniform(g, -6.0, 6.0);
            CHECK(lb <= m_p_value(sp, cell, n, 2.0, {x}) + 1e-12);
        }
    }

    SECTION("nested refinement only improves this bound") {
        double prev = 0.0;
        for (int res : {11, 21, 41, 81, 161, 321, 641, 1281}) {
            const double lb =
                grid_lower_bound(sp, cell, n, 2.0, {-6.4}, {6.4}, res);
            CHECK(lb >= prev - 1e-12);
            prev = lb;
        }
        CHECK(prev > 0.0);
    }

    SECTION("a box missing the coercivity ball is rejected") {
        CHECK_THROWS_AS(
            grid_lower_bound(sp, cell, n, 2.0, {-0.5}, {0.5}, 11), error);
        CHECK_THROWS_AS(
            grid_lower_bound(sp, cell, n, 2.0, {0.0}, {6.0}, 11), error);
    }

    SECTION("a singleton cell bottoms out at zero") {
        const double lb =
            grid_lower_bound(sp, {0}, n, 2.0, {-3.0}, {3.0}, 101);
        CHECK(lb == 0.0);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(
            grid_lower_bound(sp, cell, n, 2.0, {-6.0}, {6.0}, 1), error);
        CHECK_THROWS_AS(
            grid_lower_bound(sp, cell, n, 2.0, {6.0}, {-6.0}, 11), error);
        CHECK_THROWS_AS(grid_lower_bound(sp, cell, n, 2.0, {-6.0, -6.0},
                                         {6.0, 6.0}, 11),
                        error);
    }
}

TEST_CASE("memoization does not change oracle results") {
    // two instances back to back reuse nothing across calls; equal inputs
    // must give equal outputs
    std::mt19937_64 g(75);
    const MeasureSpace sp = testutil::random_space(g, 7, 2);
    const NormDescriptor n = NormDescriptor::lq(2, 3.0);
    const OracleResult a = brute_force(sp, n, 2.5, 3);
    const OracleResult b = brute_force(sp, n, 2.5, 3);
    CHECK(a.cost == b.cost);
    CHECK(a.partition == b.partition);
    CHECK(a.enumerated == b.enumerated);
}
