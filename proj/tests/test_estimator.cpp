#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

#include "purcell/errors.hpp"
#include "purcell/estimator.hpp"
#include "purcell/sweep.hpp"

using namespace purcell;
using namespace purcell::estimate;

namespace {

RateCurve broken_curve(double beta, double x0, double first = 0.05, double last = 0.95, std::size_t n = 50) {
    return sweep_broken(TemperatureGrid::linspace(first, last, n), {x0, beta, {}});
}

RateCurve symmetric_curve(const SymmetricPhaseLaw& law, double first, double last, std::size_t n) {
    PhaseScenario s;
    s.symmetric = law;
    s.emitter = {2.4e15, 1e-29};
    return sweep_full(TemperatureGrid::linspace(first, last, n), s);
}

}  // namespace

TEST_CASE("weighted line fit against the normal equations") {
    const std::vector<LinearPoint> pts{{0.0, 1.0, 1.0}, {1.0, 2.9, 2.0}, {2.0, 5.2, 1.0}, {3.0, 6.8, 4.0}};
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        sw += p.weight;
        sx += p.weight * p.log_t;
        sy += p.weight * p.log_deficit;
        sxx += p.weight * p.log_t * p.log_t;
        sxy += p.weight * p.log_t * p.log_deficit;
    }
    const double det = sw * sxx - sx * sx;
    const double slope = (sw * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / sw;
    const auto fit = weighted_line_fit(pts);
    CHECK(fit.slope == doctest::Approx(slope).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(intercept).epsilon(1e-13));
    CHECK(fit.n == 4);
    REQUIRE(fit.r_squared.has_value());
    CHECK(*fit.r_squared > 0.99);
    CHECK(*fit.r_squared <= 1.0);
    CHECK(fit.slope_stderr > 0.0);

    CHECK_THROWS_AS(weighted_line_fit(std::vector<LinearPoint>{{1.0, 1.0, 1.0}}), InsufficientData);
    CHECK_THROWS_AS(weighted_line_fit(std::vector<LinearPoint>{{1.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}), InsufficientData);
}

TEST_CASE("linearized data are exactly a line for clean curves") {
    const auto lin = linearize_broken(broken_curve(0.25, 0.8));
    const auto line = weighted_line_fit(lin.points);
    CHECK(line.slope == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(line.intercept == doctest::Approx(2.0 * std::log(0.8)).epsilon(1e-10));
    CHECK(lin.mask.used == 50);
}

TEST_CASE("noiseless round trip recovers beta and x0") {
    for (double beta : {0.125, 0.25, 0.5}) {
        for (double x0 : {0.5, 0.8, 0.95}) {
            CAPTURE(beta);
            CAPTURE(x0);
            const auto fit = fit_broken(broken_curve(beta, x0));
            CHECK(fit.converged);
            CHECK(std::abs(fit.beta() - beta) < 1e-9);
            CHECK(std::abs(fit.x0() - x0) < 1e-9);
            CHECK(fit.dof == 48);
            CHECK(fit.residual_ss <= fit.initial_residual_ss);
        }
    }
}

TEST_CASE("a poor seed still converges") {
    const auto fit = fit_broken(broken_curve(0.125, 0.8), FitSeed{0.9, 0.3});
    CHECK(fit.converged);
    CHECK(fit.beta() == doctest::Approx(0.125).epsilon(1e-8));
}

TEST_CASE("plateau and saturated points are masked") {
    // x0 = 2, beta = 1/2: the gap opens at t = 1/4.
    const auto c = broken_curve(0.5, 2.0, 0.01, 0.99, 99);
    const auto fit = fit_broken(c);
    CHECK(fit.mask.gap > 0);
    CHECK(fit.mask.used + fit.mask.gap + fit.mask.saturated == 99);
    CHECK(fit.beta() == doctest::Approx(0.5).epsilon(1e-8));

    RateCurve sat = broken_curve(0.5, 1e-4);
    CHECK_THROWS_AS(fit_broken(sat), AllMasked);

    RateCurve plateau;
    plateau.samples = {{0.5, 0.0}, {0.6, 0.0}, {0.7, 0.0}};
    CHECK_THROWS_AS(fit_broken(plateau), DegenerateJacobian);

    RateCurve tiny;
    tiny.samples = {{0.1, 0.9}, {0.2, 0.8}};
    CHECK_THROWS_AS(fit_broken(tiny), InsufficientData);

    RateCurve symmetric_only;
    symmetric_only.samples = {{-0.1, 1.1}, {-0.2, 1.05}, {-0.3, 1.02}};
    CHECK_THROWS_AS(fit_broken(symmetric_only), AllMasked);
}

TEST_CASE("classification on clean curves") {
    for (double beta : {0.125, 0.25, 0.5}) {
        const auto cls = classify(broken_curve(beta, 0.8), CandidateSet::typical());
        CAPTURE(beta);
        CHECK(cls.best == label_for_beta(beta));
        CHECK(cls.best_score().x0 == doctest::Approx(0.8).epsilon(1e-8));
        REQUIRE(cls.margin.has_value());
        CHECK(*cls.margin > 0.0);
        CHECK(cls.scores.size() == 3);
    }
    const std::vector<double> one{0.3};
    const auto single = classify(broken_curve(0.3, 0.8), CandidateSet::from_betas(one));
    CHECK(single.best == "0.29999999999999999");
    CHECK_FALSE(single.margin.has_value());
}

TEST_CASE("candidate labels and validation") {
    CHECK(label_for_beta(0.5) == "mean field");
    CHECK(label_for_beta(0.125) == "Ising model");
    CHECK(label_for_beta(0.25) == "1/4");
    const std::vector<double> dup{0.5, 0.5};
    CHECK_THROWS_AS(CandidateSet::from_betas(dup), DomainError);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(CandidateSet::from_betas(bad), DomainError);
    CHECK_THROWS_AS(CandidateSet{}.validate(), DomainError);
}

TEST_CASE("symmetric fits recover the correlation law") {
    const double alpha = 1.0 / 137.0;
    const auto expo = symmetric_curve(SymmetricPhaseLaw::exponential(10.0), -1.0, -0.01, 50);
    const auto e = fit_symmetric(expo, CorrelationKind::Exponential, alpha);
    CHECK(e.converged);
    CHECK(std::abs(e.params.at("delta") - 10.0) < 1e-8);

    const auto power = symmetric_curve(SymmetricPhaseLaw::power_law(1.0, 1.0), -1.0, -0.01, 50);
    const auto p = fit_symmetric(power, CorrelationKind::PowerLaw, alpha);
    CHECK(p.converged);
    CHECK(std::abs(p.params.at("nu") - 1.0) < 1e-4);
    CHECK(std::abs(p.params.at("a_over_xi0") - 1.0) < 1e-4);

    const auto power2 = symmetric_curve(SymmetricPhaseLaw::power_law(3.0, 0.6), -0.8, -1e-4, 40);
    const auto p2 = fit_symmetric(power2, CorrelationKind::PowerLaw, alpha);
    CHECK(p2.params.at("nu") == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(p2.params.at("a_over_xi0") == doctest::Approx(3.0).epsilon(1e-6));

    RateCurve few;
    few.samples = {{-0.1, 1.01}, {-0.2, 1.005}};
    CHECK_THROWS_AS(fit_symmetric(few, CorrelationKind::Exponential), InsufficientData);
    CHECK_THROWS_AS(fit_symmetric(expo, CorrelationKind::Exponential, 2.0), DomainError);
}

TEST_CASE("Tc scan picks the transition temperature") {
    const double tc = 100.0;
    const BrokenPhaseLaw law{0.8, 0.25, {}};
    std::vector<AbsoluteSample> samples;
    for (int i = 0; i < 40; ++i) {
        const double temperature = 10.0 + 2.0 * i;
        const double t = 1.0 - temperature / tc;
        samples.push_back({temperature, gamma_ratio_higgs(mass_ratio(ReducedTemperature(t), law))});
    }
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(95.0 + 0.5 * i);
    const auto scan = tc_scan(samples, grid);
    CHECK(scan.best_tc == 100.0);
    CHECK(scan.best_r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scan.profile.size() == grid.size());

    CHECK_THROWS_AS(tc_scan(samples, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(tc_scan(samples, std::vector<double>{1.0}), InsufficientData);
}

TEST_CASE("JSON reports parse and carry sorted keys") {
    const auto fit = fit_broken(broken_curve(0.5, 0.8));
    const auto doc = nlohmann::json::parse(to_json(fit));
    CHECK(doc.at("params").at("beta").get<double>() == fit.beta());
    CHECK(doc.at("converged").get<bool>());
    std::vector<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.push_back(k);
    CHECK(std::is_sorted(keys.begin(), keys.end()));

    const auto cls = nlohmann::json::parse(to_json(classify(broken_curve(0.5, 0.8), CandidateSet::typical())));
    CHECK(cls.at("best").get<std::string>() == "mean field");
}
