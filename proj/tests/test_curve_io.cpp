#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "purcell/curve_io.hpp"
#include "purcell/errors.hpp"
#include "purcell/number_format.hpp"

using namespace purcell;

namespace {

RateCurve sample_curve() {
    RateCurve c;
    c.samples = {{0.1, 0.9}, {0.2, 1.0 / 3.0}, {0.30000000000000004, 0.0}, {-0.5, 1.0078052156567183}};
    c.metadata.scenario = "broken: x0=1 beta=0.5";
    c.metadata.seed = 18446744073709551615ull;
    c.metadata.sigma_rel = 0.01;
    return c;
}

}  // namespace

TEST_CASE("CSV layout") {
    RateCurve c;
    c.samples = {{0.5, 0.70710678118654746}};
    CHECK(to_csv(c) == "t,gamma_ratio\n0.5,0.70710678118654746\n");
    c.metadata.seed = 7;
    c.metadata.sigma_rel = 0.01;
    c.metadata.scenario = "demo";
    CHECK(to_csv(c) == "# scenario: demo\n# seed: 7\n# sigma_rel: 0.01\nt,gamma_ratio\n0.5,0.70710678118654746\n");
}

TEST_CASE("CSV and JSON round trips are exact") {
    const auto c = sample_curve();
    CHECK(from_csv(to_csv(c)) == c);
    CHECK(from_json(to_json(c)) == c);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RateCurve r;
    for (int i = 0; i < 500; ++i) r.samples.push_back({u(rng) - 0.5, u(rng) * 3.0});
    CHECK(from_csv(to_csv(r)) == r);
    CHECK(from_json(to_json(r)) == r);
}

TEST_CASE("JSON keys are sorted") {
    const auto text = to_json(sample_curve());
    CHECK(text.find("\"metadata\"") < text.find("\"samples\""));
    CHECK(text.find("\"scenario\"") < text.find("\"seed\""));
    CHECK(text.find("\"seed\"") < text.find("\"sigma_rel\""));
    CHECK(text.find("\"gamma_ratio\"") < text.find("\"t\""));
    CHECK(text.back() == '\n');
}

TEST_CASE("import sniffs the format") {
    const auto c = sample_curve();
    std::istringstream csv(to_csv(c));
    CHECK(import_curve(csv) == c);
    std::istringstream json("  \n" + to_json(c));
    CHECK(import_curve(json) == c);
    std::ostringstream os;
    export_curve(os, c, CurveFormat::Json);
    CHECK(os.str() == to_json(c));
    CHECK(parse_format("csv") == CurveFormat::Csv);
    CHECK_THROWS_AS(parse_format("xml"), ParseError);
}

TEST_CASE("CSV tolerates CRLF, blank lines and a leading plus") {
    const auto c = from_csv("t,gamma_ratio\r\n0.1,+0.5\r\n\r\n0.2, 0.25\r\n");
    REQUIRE(c.samples.size() == 2);
    CHECK(c.samples[1].ratio == 0.25);
    CHECK(c.samples[0].ratio == 0.5);
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(from_csv(""), ParseError);
    CHECK_THROWS_AS(from_csv("0.1,0.5\n"), ParseError);
    CHECK_THROWS_AS(from_csv("t,gamma_ratio\n0.1\n"), ParseError);
    CHECK_THROWS_AS(from_csv("t,gamma_ratio\n0.1,0.5,3\n"), ParseError);
    CHECK_THROWS_AS(from_csv("t,gamma_ratio\n0.1,abc\n"), ParseError);
    CHECK_THROWS_AS(from_csv("t,gamma_ratio\n0.1,-0.5\n"), ParseError);
    CHECK_THROWS_AS(from_csv("t,gamma_ratio\n0.1,nan\n"), ParseError);
    CHECK_THROWS_AS(from_csv("# seed: -3\nt,gamma_ratio\n"), ParseError);
    CHECK_THROWS_AS(from_json("{"), ParseError);
    CHECK_THROWS_AS(from_json("{\"samples\": [], \"extra\": 1}"), ParseError);
    CHECK_THROWS_AS(from_json("{\"samples\": [{\"t\": 0.1}]}"), ParseError);
    CHECK_THROWS_AS(from_json("{\"metadata\": {\"colour\": 1}, \"samples\": []}"), ParseError);
    CHECK_THROWS_AS(from_json("[]"), ParseError);
}

TEST_CASE("multi-line scenario text cannot be written") {
    auto c = sample_curve();
    c.metadata.scenario = "two\nlines";
    CHECK_THROWS_AS(to_csv(c), DomainError);
    CHECK_THROWS_AS(to_json(c), DomainError);
}

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308, -0.0, 123456789.0}) {
        CHECK(parse_number(format_number(v)) == v);
    }
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK_THROWS_AS(parse_number(""), ParseError);
    CHECK_THROWS_AS(parse_number("1.5x"), ParseError);
}
