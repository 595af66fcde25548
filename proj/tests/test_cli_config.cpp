#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qtm/config.hpp>

#include <sstream>

using namespace qtm;

static const char* kSample = R"(
# sample configuration
[model]
J = 1.0
zeta = 1.3
h = 1.0
temperature = 0.1
trotter_n = 0

[numerics]
quad_order = 48
tol = 1e-10

[spectrum]
max_exc = 1
max_n = 0

[cft]
temperatures = [0.05, 0.025]

[excitation]
s = 0

[[root]]
side = 1
particle = true
n = 0

[[root]]
side = 1
particle = false
n = 0

[sweep]
temperatures = [0.2, 0.1]
trotter = [64, 128]

[output]
path = "out.json"
format = "json"
)";

TEST_CASE("parser types scalars, arrays and array-of-tables") {
    std::istringstream is(kSample);
    toml_mini::Doc d = toml_mini::parse(is);
    const auto& m = d.tables.at("model");
    CHECK(m.at("J").kind == toml_mini::Value::Float);
    CHECK(m.at("trotter_n").kind == toml_mini::Value::Int);
    CHECK(m.at("trotter_n").i == 0);
    CHECK(d.tables.at("numerics").at("tol").f == doctest::Approx(1e-10));
    CHECK(d.tables.at("output").at("path").s == "out.json");
    const auto& cft = d.tables.at("cft").at("temperatures");
    REQUIRE(cft.kind == toml_mini::Value::Arr);
    REQUIRE(cft.arr.size() == 2u);
    CHECK(cft.arr[1].f == doctest::Approx(0.025));
    REQUIRE(d.arrays.count("root") == 1u);
    REQUIRE(d.arrays.at("root").size() == 2u);
    CHECK(d.arrays.at("root")[0].at("particle").b == true);
    CHECK(d.arrays.at("root")[1].at("particle").b == false);
}

TEST_CASE("configuration binding picks up every section") {
    std::istringstream is(kSample);
    RunConfig c = config_from_doc(toml_mini::parse(is));
    CHECK(c.model.zeta == doctest::Approx(1.3));
    CHECK(c.model.T == doctest::Approx(0.1));
    CHECK(c.qo.seg_order == 48);
    CHECK(c.nopt.tol == doctest::Approx(1e-10));
    CHECK(c.max_exc == 1);
    CHECK(c.max_n == 0);
    REQUIRE(c.exc.spec.size() == 2u);
    CHECK(c.exc.spec[0].particle);
    CHECK_FALSE(c.exc.spec[1].particle);
    REQUIRE(c.sweep_trotter.size() == 2u);
    CHECK(c.sweep_trotter[1] == 128);
    CHECK(c.out_path == "out.json");
    CHECK(c.format == "json");
}

TEST_CASE("emit-parse round trip is the identity on the emitted text") {
    std::istringstream is(kSample);
    RunConfig c = config_from_doc(toml_mini::parse(is));
    std::string text1 = emit_config(c);
    std::istringstream is2(text1);
    RunConfig c2 = config_from_doc(toml_mini::parse(is2));
    std::string text2 = emit_config(c2);
    CHECK(text1 == text2);
    CHECK(c2.model.T == c.model.T);
    CHECK(c2.exc.spec.size() == c.exc.spec.size());
}

TEST_CASE("malformed input raises a configuration error") {
    auto parse_str = [](const std::string& s) {
        std::istringstream is(s);
        return toml_mini::parse(is);
    };
    CHECK_THROWS_AS(parse_str("[model\nJ = 1.0\n"), QtmError);
    CHECK_THROWS_AS(parse_str("[model]\nJ 1.0\n"), QtmError);
    CHECK_THROWS_AS(parse_str("[model]\nJ = \n"), QtmError);
    try {
        parse_str("[model\n");
    } catch (const QtmError& e) {
        CHECK(e.kind == "ConfigParse");
    }
    CHECK_THROWS_AS(load_config("/nonexistent/path.toml"), QtmError);
}

TEST_CASE("17-significant-digit formatting is lossless and deterministic") {
    for (double x : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-13, 12345.678901234567}) {
        std::string s = num17(x);
        CHECK(std::stod(s) == x);
        CHECK(num17(x) == s);
    }
}

TEST_CASE("defaults survive partial configuration files") {
    std::istringstream is("[model]\ntemperature = 0.3\n");
    RunConfig c = config_from_doc(toml_mini::parse(is));
    CHECK(c.model.T == doctest::Approx(0.3));
    CHECK(c.model.J == doctest::Approx(1.0));
    CHECK(c.qo.seg_order == 64);
    CHECK(c.format == "json");
    CHECK(c.cft_temps.size() == 3u);
}
