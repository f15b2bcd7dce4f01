#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lpquant/lpquant.hpp"

using namespace lpquant;
using Catch::Approx;
using testutil::make_space;
using testutil::space1d;

namespace {

SimpleFunction fn(std::vector<Vec> centers, std::vector<int> assignment,
                  std::optional<int> background = std::nullopt) {
    SimpleFunction h;
    h.centers = std::move(centers);
    h.assignment = std::move(assignment);
    h.background_center = background;
    return h;
}

}  // namespace

TEST_CASE("simple functions validate against their space") {
    const MeasureSpace sp = space1d({0.0, 2.0});

    CHECK_NOTHROW(validate(sp, fn({{1.0}}, {0, 0})));
    // assignment out of range
    CHECK_THROWS_AS(validate(sp, fn({{1.0}}, {0, 1})), error);
    CHECK_THROWS_AS(validate(sp, fn({{1.0}}, {0, -1})), error);
    // wrong assignment length
    CHECK_THROWS_AS(validate(sp, fn({{1.0}}, {0})), error);
    // center dimension mismatch
    CHECK_THROWS_AS(validate(sp, fn({{1.0, 2.0}}, {0, 0})), error);
    // no centers
    CHECK_THROWS_AS(validate(sp, fn({}, {0, 0})), error);
    // background center must be the zero vector
    CHECK_THROWS_AS(validate(sp, fn({{1.0}}, {0, 0}, 0)), error);
    CHECK_NOTHROW(validate(sp, fn({{0.0}, {2.0}}, {0, 1}, 0)));

    SECTION("infinite mass requires a background cell") {
        const MeasureSpace inf_sp = space1d({0.0, 2.0}, {1.0, 1.0}, true);
        CHECK_THROWS_AS(validate(inf_sp, fn({{1.0}}, {0, 0})), error);
        CHECK_NOTHROW(validate(inf_sp, fn({{0.0}, {2.0}}, {0, 1}, 0)));
    }
}

TEST_CASE("approximation cost in L^p") {
    const MeasureSpace sp = space1d({0.0, 2.0});
    const NormDescriptor n = NormDescriptor::euclidean(1);
    const SimpleFunction mid = fn({{1.0}}, {0, 0});

    CHECK(cost(sp, n, 2.0, mid) == Approx(std::sqrt(2.0)));
    CHECK(cost(sp, n, 1.0, mid) == Approx(2.0));
    CHECK(cost(sp, n, kInf, mid) == Approx(1.0));

    const SimpleFunction exact = fn({{0.0}, {2.0}}, {0, 1});
    CHECK(cost(sp, n, 2.0, exact) == 0.0);

    SECTION("weights enter for finite p only") {
        const MeasureSpace wsp = space1d({0.0, 2.0}, {4.0, 1.0});
        CHECK(cost(wsp, n, 2.0, mid) == Approx(std::sqrt(5.0)));
        CHECK(cost(wsp, n, kInf, mid) == Approx(1.0));
    }
}

TEST_CASE("reduction merges duplicates and drops unused centers") {
    const MeasureSpace sp = space1d({0.0, 1.0, 5.0});

    SECTION("exact duplicate centers land on the lowest index") {
        const SimpleFunction h =
            fn({{0.5}, {5.0}, {0.5}}, {0, 2, 1});  // centers 0 and 2 equal
        const SimpleFunction r = reduce(sp, h);
        REQUIRE(r.centers.size() == 2);
        CHECK(r.centers[0] == Vec{0.5});
        CHECK(r.centers[1] == Vec{5.0});
        CHECK(r.assignment == std::vector<int>{0, 0, 1});
        CHECK(degree(sp, h) == 2);
    }

    SECTION("zero-mass cells disappear") {
        const SimpleFunction h = fn({{0.5}, {99.0}, {5.0}}, {0, 0, 2});
        const SimpleFunction r = reduce(sp, h);
        REQUIRE(r.centers.size() == 2);
        CHECK(r.centers[1] == Vec{5.0});
        CHECK(r.assignment == std::vector<int>{0, 0, 1});
    }

    SECTION("the background cell survives even when empty") {
        const MeasureSpace inf_sp = space1d({1.0, 5.0}, {1.0, 1.0}, true);
        const SimpleFunction h = fn({{0.0}, {1.0}, {5.0}}, {1, 2}, 0);
        const SimpleFunction r = reduce(inf_sp, h);
        REQUIRE(r.centers.size() == 3);
        REQUIRE(r.background_center.has_value());
        CHECK(*r.background_center == 0);
        CHECK(r.centers[0] == Vec{0.0});
    }

    SECTION("reduction is idempotent") {
        const SimpleFunction h = fn({{0.5}, {5.0}, {0.5}}, {0, 2, 1});
        const SimpleFunction once = reduce(sp, h);
        const SimpleFunction twice = reduce(sp, once);
        CHECK(once.centers == twice.centers);
        CHECK(once.assignment == twice.assignment);
    }

    SECTION("cost is preserved") {
        std::mt19937_64 g(31);
        const NormDescriptor n = NormDescriptor::euclidean(1);
        for (int t = 0; t < 50; ++t) {
            const MeasureSpace rsp = testutil::random_space(g, 6, 1);
            std::vector<Vec> centers = {{0.2}, {0.8}, {0.2}, {10.0}};
            std::vector<int> assignment(6);
            for (int a = 0; a < 6; ++a)
                assignment[a] = static_cast<int>(
                    testutil::uniform(g, 0.0, 2.999));  // never cell 3
            const SimpleFunction h = fn(centers, assignment);
            const double p = testutil::uniform(g, 1.0, 3.0);
            CHECK(cost(rsp, n, p, reduce(rsp, h)) ==
                  Approx(cost(rsp, n, p, h)).margin(1e-14));
        }
    }
}

TEST_CASE("degree counts distinct used values") {
    const MeasureSpace sp = space1d({0.0, 1.0});
    CHECK(degree(sp, fn({{0.5}}, {0, 0})) == 1);
    CHECK(degree(sp, fn({{0.0}, {1.0}}, {0, 1})) == 2);
    CHECK(degree(sp, fn({{0.0}, {0.0}}, {0, 1})) == 1);
}

TEST_CASE("bounded reduction zeroes far centers") {
    const MeasureSpace sp = space1d({0.1, 5.0});
    const NormDescriptor n = NormDescriptor::euclidean(1);
    const SimpleFunction h = fn({{0.1}, {5.0}}, {0, 1});

    const SimpleFunction g = bounded_reduction(sp, n, 2.0, h, 1.0);
    // the center at 5 exceeds the threshold and is replaced by 0
    REQUIRE(g.centers.size() == 2);
    bool has_zero = false;
    for (const Vec& c : g.centers) has_zero |= (c == Vec{0.0});
    CHECK(has_zero);

    SECTION("unchanged when every center is small") {
        const SimpleFunction same = bounded_reduction(sp, n, 2.0, h, 100.0);
        CHECK(same.centers == h.centers);
        CHECK(same.assignment == h.assignment);
    }

    SECTION("the cost inequality holds") {
        std::mt19937_64 rg(32);
        for (int t = 0; t < 100; ++t) {
            const MeasureSpace rsp = testutil::random_space(rg, 6, 1, -3.0, 3.0);
            std::vector<Vec> centers;
            const int k = 3;
            for (int i = 0; i < k; ++i)
                centers.push_back({testutil::uniform(rg, -4.0, 4.0)});
            std::vector<int> assignment(6);
            for (int a = 0; a < 6; ++a)
                assignment[a] =
                    static_cast<int>(testutil::uniform(rg, 0.0, 2.999));
            const SimpleFunction rh = fn(centers, assignment);
            const double p = testutil::uniform(rg, 1.0, 3.0);
            const double thr = testutil::uniform(rg, 0.5, 3.0);
            const SimpleFunction rg2 = bounded_reduction(rsp, n, p, rh, thr);

            // cost(g)^p <= cost(h)^p + sum over zeroed cells of w||f||^p
            double dropped = 0.0;
            for (std::size_t a = 0; a < rsp.size(); ++a) {
                const Vec& old_c = rh.centers[rh.assignment[a]];
                if (eval(n, old_c) > thr)
                    dropped += rsp.atom(a).weight *
                               std::pow(eval(n, rsp.atom(a).value), p);
            }
            const double lhs = std::pow(cost(rsp, n, p, rg2), p);
            const double rhs = std::pow(cost(rsp, n, p, rh), p) + dropped;
            CHECK(lhs <= rhs + 1e-10 * std::max(1.0, rhs));
        }
    }
}
