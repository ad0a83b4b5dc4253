#include <doctest.h>

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "purcell/curve_io.hpp"

namespace fs = std::filesystem;
using purcell::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = run(args, in, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("purcell_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"simulate", "--help"}).code == 0);
    CHECK(call({}).code == 2);
    CHECK(call({"launch"}).code == 2);
    CHECK(call({"simulate", "--bogus"}).code == 2);
    CHECK(call({"simulate", "--grid", "0.1:0.9"}).code == 2);
    CHECK(call({"simulate", "--preset", "fig9"}).code == 2);
    CHECK(call({"simulate", "--format", "xml"}).code == 2);
}

TEST_CASE("simulate writes a curve and a summary") {
    const auto r = call({"simulate", "--beta", "0.5", "--x0", "2", "--points", "0.1,0.2,0.25,0.5,0.9"});
    REQUIRE(r.code == 0);
    const auto curve = purcell::from_csv(r.out);
    CHECK(curve.samples.size() == 5);
    CHECK(r.err.find("gap edge: t = 0.25") != std::string::npos);
    CHECK(r.err.find("analytic 0.25") != std::string::npos);

    const auto j = call({"simulate", "--grid", "0.1:0.9:3", "--format", "json"});
    REQUIRE(j.code == 0);
    CHECK(purcell::from_json(j.out).samples.size() == 3);
}

TEST_CASE("critical point and pole map to exit 3") {
    CHECK(call({"simulate", "--points", "0.1,0"}).code == 3);
    CHECK(call({"simulate", "--points", "-0.003,0.1"}).code == 3);
    CHECK(call({"simulate", "--points", "-0.5,0.1"}).code == 0);
}

TEST_CASE("noise is reproducible from the seed") {
    const std::vector<std::string> args{"simulate", "--sigma", "0.01", "--seed", "11", "--grid", "0.05:0.95:50"};
    const auto a = call(args);
    const auto b = call(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("# seed: 11\n") != std::string::npos);
    auto other = args;
    other[4] = "12";
    CHECK(call(other).out != a.out);
}

TEST_CASE("fit reads stdin and reports JSON") {
    const auto sim = call({"simulate", "--beta", "0.25", "--x0", "0.8", "--grid", "0.05:0.95:50"});
    const auto fit = call({"fit", "-"}, sim.out);
    REQUIRE(fit.code == 0);
    const auto doc = nlohmann::json::parse(fit.out);
    CHECK(doc.at("params").at("beta").get<double>() == doctest::Approx(0.25).epsilon(1e-9));

    const auto cls = call({"fit", "--classify", "-"}, sim.out);
    REQUIRE(cls.code == 0);
    CHECK(nlohmann::json::parse(cls.out).at("best").get<std::string>() == "1/4");

    CHECK(call({"fit", "-"}, "t,gamma_ratio\n0.1,abc\n").code == 2);
    CHECK(call({"fit", "-"}, "t,gamma_ratio\n0.1,0.5\n").code == 2);
    CHECK(call({"fit", "/nonexistent/curve.csv"}).code == 2);
}

TEST_CASE("fit handles the symmetric phase") {
    const auto sim = call({"simulate", "--grid=-1:-0.01:40"});
    REQUIRE(sim.code == 0);
    const auto fit = call({"fit", "-"}, sim.out);
    REQUIRE(fit.code == 0);
    CHECK(nlohmann::json::parse(fit.out).at("params").at("delta").get<double>() ==
          doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("fit reports an exhausted iteration budget as exit 5") {
    const auto sim = call({"simulate", "--beta", "0.25", "--x0", "0.8", "--grid", "0.05:0.95:50",
                           "--sigma", "0.01", "--seed", "1"});
    REQUIRE(sim.code == 0);
    const auto r = call({"fit", "--max-iterations", "0", "-"}, sim.out);
    CHECK(r.code == 5);
    CHECK_FALSE(nlohmann::json::parse(r.out).at("converged").get<bool>());
    CHECK(call({"fit", "-"}, sim.out).code == 0);
}

TEST_CASE("config file, preset and flag precedence") {
    const auto cfg = scratch("cfg.json");
    std::ofstream(cfg) << R"({"beta": 0.25, "x0": 0.5, "grid": "0.2:0.8:4"})";
    const auto from_cfg = call({"simulate", "--config", cfg.string()});
    REQUIRE(from_cfg.code == 0);
    const auto c = purcell::from_csv(from_cfg.out);
    REQUIRE(c.samples.size() == 4);
    CHECK(c.samples[0].ratio == doctest::Approx(std::sqrt(1.0 - 0.25 * std::sqrt(0.2))).epsilon(1e-15));

    // Flags win over the file.
    const auto flagged = call({"simulate", "--config", cfg.string(), "--beta", "0.5"});
    const auto f = purcell::from_csv(flagged.out);
    CHECK(f.samples[0].ratio == doctest::Approx(std::sqrt(1.0 - 0.25 * 0.2)).epsilon(1e-15));

    // The file wins over the preset.
    const auto preset = call({"simulate", "--preset", "fig4", "--config", cfg.string()});
    CHECK(purcell::from_csv(preset.out).samples.size() == 4);

    const auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"betta": 0.25})";
    CHECK(call({"simulate", "--config", bad.string()}).code == 2);
    std::ofstream(bad) << R"({"beta": "high"})";
    CHECK(call({"simulate", "--config", bad.string()}).code == 2);
    CHECK(call({"simulate", "--config", "/nonexistent.json"}).code == 2);
}

TEST_CASE("fig2 preset writes three curves") {
    const auto dir = scratch("fig2");
    fs::remove_all(dir);
    const auto r = call({"simulate", "--preset", "fig2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    for (const char* b : {"0.5", "0.25", "0.125"}) {
        const auto path = dir / (std::string("fig2_beta_") + b + ".csv");
        REQUIRE(fs::exists(path));
        CHECK(purcell::from_csv(slurp(path)).samples.size() == 99);
    }
    CHECK(call({"simulate", "--preset", "fig2"}).code == 2);
}

TEST_CASE("dos table") {
    const auto r = call({"dos", "--x", "0.5", "--omega", "0.25,1"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "omega,dos,vacuum\n0.25,0,0.0625\n1,0.8660254037844386,1\n");
    const auto g = call({"dos", "--x", "0", "--omega-grid", "0:2:3"});
    CHECK(g.out == "omega,dos,vacuum\n0,0,0\n1,1,1\n2,4,4\n");
}

TEST_CASE("oracle-check exit codes") {
    const auto ok = call({"oracle-check", "--x-list", "0.5,1.2"});
    CHECK(ok.code == 0);
    CHECK(ok.out.starts_with("x,closed_form,oracle,abs_diff,eta_error_bar\n"));

    // Too small a cutoff leaves resonant weight outside the range.
    CHECK(call({"oracle-check", "--x-list", "0.5", "--k-max", "1.5"}).code == 4);
    CHECK(call({"oracle-check", "--x-list", "0.5", "--max-subdivisions", "2", "--rel-tol", "1e-14"}).code == 4);
    // A tolerance no quadrature can meet fails honestly.
    CHECK(call({"oracle-check", "--x-list", "0.9", "--tolerance", "1e-9"}).code == 4);
    CHECK(call({"oracle-check", "--etas", "0.08,0.04"}).code == 2);
}

TEST_CASE("output to a file matches stdout") {
    const auto path = scratch("curve.csv");
    const std::vector<std::string> base{"simulate", "--grid", "0.1:0.9:9"};
    auto with_out = base;
    with_out.insert(with_out.end(), {"--out", path.string()});
    REQUIRE(call(with_out).code == 0);
    CHECK(slurp(path) == call(base).out);
}
