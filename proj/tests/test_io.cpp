#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "helpers.hpp"
#include "lpquant/lpquant.hpp"

using namespace lpquant;
using Catch::Approx;
using testutil::make_space;
using testutil::space1d;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("doubles survive a print/parse cycle bit-exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 1e300,
                     0.30000000000000004}) {
        const std::string s = fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK_THROWS_AS(fmt_double(kInf), error);
    CHECK_THROWS_AS(fmt_double(std::nan("")), error);
}

TEST_CASE("space JSON round-trips byte-exactly") {
    const MeasureSpace sp = make_space(
        {{0.1, {1.0 / 3.0, 1e-300}}, {2.0 / 7.0, {-0.1, 5e22}}});
    const std::string once = to_json(sp);
    const MeasureSpace back = space_from_json(nlohmann::json::parse(once));
    CHECK(to_json(back) == once);

    CHECK(back.dim() == 2);
    CHECK(back.size() == 2);
    CHECK(back.atom(0).weight == 0.1);
    CHECK(back.atom(1).value[1] == 5e22);
    CHECK(!back.infinite_mass());

    SECTION("the infinite-mass flag survives") {
        const MeasureSpace bg = space1d({1.0, 2.0}, {}, true);
        const std::string s = to_json(bg);
        CHECK(space_from_json(nlohmann::json::parse(s)).infinite_mass());
        CHECK(to_json(space_from_json(nlohmann::json::parse(s))) == s);
    }

    SECTION("missing keys are reported as malformed") {
        CHECK_THROWS_AS(space_from_json(nlohmann::json::parse("{}")), error);
        CHECK_THROWS_AS(
            space_from_json(nlohmann::json::parse("{\"dim\": 1}")), error);
        CHECK_THROWS_AS(space_from_json(nlohmann::json::parse(
                            "{\"dim\": 1, \"atoms\": [{\"w\": 1}]}")),
                        error);
        CHECK_THROWS_AS(space_from_json(nlohmann::json::parse("[1, 2]")),
                        error);
    }
}

TEST_CASE("CSV spaces parse with comments and blanks") {
    const std::string text =
        "# weight, x, y\n"
        "\n"
        "1.0, 0.0, 0.5\n"
        "  \t\n"
        "0.25,1,2\n"
        "# trailing comment\n";
    const MeasureSpace sp = space_from_csv(text);
    REQUIRE(sp.size() == 2);
    CHECK(sp.dim() == 2);
    CHECK(sp.atom(0).weight == 1.0);
    CHECK(sp.atom(1).value == Vec{1.0, 2.0});
    CHECK(!sp.infinite_mass());

    SECTION("bad numbers name the offending line") {
        CHECK_THROWS_WITH(space_from_csv("1.0, abc\n"),
                          Catch::Matchers::ContainsSubstring("line 1"));
        CHECK_THROWS_WITH(space_from_csv("1, 2\n1, 2x\n"),
                          Catch::Matchers::ContainsSubstring("line 2"));
    }

    SECTION("rows must have a consistent width") {
        CHECK_THROWS_WITH(space_from_csv("1, 2, 3\n1, 2\n"),
                          Catch::Matchers::ContainsSubstring("line 2"));
    }

    SECTION("a file with no data rows is rejected") {
        CHECK_THROWS_AS(space_from_csv("# only comments\n\n"), error);
        CHECK_THROWS_AS(space_from_csv(""), error);
    }

    SECTION("a weight-only row has no coordinates") {
        CHECK_THROWS_AS(space_from_csv("1.0\n2.0\n"), error);
    }
}

TEST_CASE("simple functions round-trip through JSON") {
    SimpleFunction h;
    h.centers = {{0.05}, {5.05}};
    h.assignment = {0, 0, 1, 1};
    const std::string once = to_json(h);
    const SimpleFunction back =
        simplefn_from_json(nlohmann::json::parse(once));
    CHECK(to_json(back) == once);
    CHECK(back.centers == h.centers);
    CHECK(back.assignment == h.assignment);
    CHECK(!back.background_center);

    SECTION("an integer background index survives") {
        h.centers.insert(h.centers.begin(), Vec{0.0});
        for (int& a : h.assignment) ++a;
        h.background_center = 0;
        const std::string s = to_json(h);
        const SimpleFunction b = simplefn_from_json(nlohmann::json::parse(s));
        REQUIRE(b.background_center);
        CHECK(*b.background_center == 0);
        CHECK(to_json(b) == s);
    }

    SECTION("a full report is accepted and its function extracted") {
        nlohmann::json rep;
        rep["manifest"] = {{"tool", "x"}};
        rep["cost"] = 0.1;
        rep["best"] = nlohmann::json::parse(once);
        const SimpleFunction b = simplefn_from_json(rep);
        CHECK(b.centers == h.centers);
        CHECK(b.assignment == h.assignment);
    }

    SECTION("missing fields are malformed") {
        CHECK_THROWS_AS(
            simplefn_from_json(nlohmann::json::parse("{\"centers\": []}")),
            error);
    }
}

TEST_CASE("writer emits stable indented JSON") {
    JsonWriter w;
    w.begin_object();
    w.key("name").value("a\"b\\c\nd");
    w.key("inner").begin_object();
    w.key("xs").value(Vec{1.0, 2.5});
    w.key("empty").begin_array().end_array();
    w.end_object();
    w.key("flags").begin_array();
    w.value(true);
    w.null();
    w.pair_value(3, 0.5);
    w.end_array();
    w.end_object();

    const std::string expect =
        "{\n"
        "  \"name\": \"a\\\"b\\\\c\\nd\",\n"
        "  \"inner\": {\n"
        "    \"xs\": [1, 2.5],\n"
        "    \"empty\": []\n"
        "  },\n"
        "  \"flags\": [\n"
        "    true,\n"
        "    null,\n"
        "    [3, 0.5]\n"
        "  ]\n"
        "}";
    CHECK(w.str() == expect);
    CHECK_NOTHROW(nlohmann::json::parse(w.str()));
}

TEST_CASE("space files load by extension") {
    const std::string jpath = temp_path("lpq_test_space.json");
    const std::string cpath = temp_path("lpq_test_space.csv");
    write_file(jpath, to_json(space1d({0.0, 1.0})));
    write_file(cpath, "1, 0\n1, 1\n");

    CHECK(load_space(jpath).size() == 2);
    CHECK(load_space(cpath).size() == 2);
    CHECK(load_space(jpath).atom(1).value == load_space(cpath).atom(1).value);

    SECTION("unknown extensions are refused") {
        const std::string tpath = temp_path("lpq_test_space.txt");
        write_file(tpath, "1, 0\n");
        CHECK_THROWS_WITH(
            load_space(tpath),
            Catch::Matchers::ContainsSubstring("unsupported"));
        std::filesystem::remove(tpath);
    }

    SECTION("missing files are reported") {
        CHECK_THROWS_WITH(
            load_space(temp_path("lpq_does_not_exist.json")),
            Catch::Matchers::ContainsSubstring("cannot open"));
    }

    SECTION("invalid JSON is malformed, not a crash") {
        const std::string bpath = temp_path("lpq_test_bad.json");
        write_file(bpath, "{\"dim\": 1, \"atoms\": [");
        CHECK_THROWS_AS(load_space(bpath), error);
        std::filesystem::remove(bpath);
    }

    std::filesystem::remove(jpath);
    std::filesystem::remove(cpath);
}

TEST_CASE("function files load and validate against a space") {
    const MeasureSpace sp = space1d({0.0, 0.1, 5.0, 5.1});
    SimpleFunction h;
    h.centers = {{0.05}, {5.05}};
    h.assignment = {0, 0, 1, 1};
    const std::string fpath = temp_path("lpq_test_fn.json");
    write_file(fpath, to_json(h));
    const SimpleFunction back = load_simplefn(fpath);
    CHECK_NOTHROW(validate(sp, back));
    CHECK(cost(sp, NormDescriptor::euclidean(1), 2.0, back) ==
          Approx(0.1).margin(1e-12));
    std::filesystem::remove(fpath);
}
