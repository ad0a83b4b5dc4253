#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <cmath>
#include <numbers>

#include "purcell/errors.hpp"
#include "purcell/quadrature.hpp"

using namespace purcell;

TEST_CASE("polynomials up to degree 22 integrate exactly on one panel") {
    auto p = [](double x) { return 3.0 * std::pow(x, 22) - 2.0 * std::pow(x, 7) + 1.0; };
    const double exact = 3.0 / 23.0 * (std::pow(2.0, 23) - 1.0) - 2.0 / 8.0 * (std::pow(2.0, 8) - 1.0) + 1.0;
    const auto r = quad::detail::gk15(p, 1.0, 2.0);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("adaptive integration agrees with boost quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    using boost::math::quadrature::tanh_sinh;

    auto peaked = [](double x) { return 1e-2 / (std::pow(x - 0.3, 2) + 1e-4); };
    const double ref_peaked = gauss_kronrod<double, 61>::integrate(peaked, 0.0, 1.0, 15, 1e-12);
    CHECK(quad::integrate(peaked, 0.0, 1.0).value == doctest::Approx(ref_peaked).epsilon(1e-10));

    auto oscill = [](double x) { return std::sin(50.0 * x) * std::exp(-x); };
    const double ref_osc = gauss_kronrod<double, 61>::integrate(oscill, 0.0, 3.0, 15, 1e-12);
    CHECK(quad::integrate(oscill, 0.0, 3.0).value == doctest::Approx(ref_osc).epsilon(1e-10));

    auto singular = [](double x) { return std::log(x) / std::sqrt(x); };
    tanh_sinh<double> ts;
    const double ref_sing = ts.integrate(singular, 0.0, 1.0);
    quad::Options opts;
    opts.max_subdivisions = 5000;
    CHECK(quad::integrate(singular, 0.0, 1.0, opts).value == doctest::Approx(ref_sing).epsilon(1e-9));
    CHECK(ref_sing == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("semi-infinite range") {
    auto f = [](double x) { return 1.0 / (1.0 + x * x); };
    const auto r = quad::integrate_to_infinity(f, 0.0);
    CHECK(r.value == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
    auto g = [](double x) { return std::exp(-x); };
    CHECK(quad::integrate_to_infinity(g, 2.0).value == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("breakpoints are honoured and summed in order") {
    auto step = [](double x) { return x < 0.5 ? 1.0 : 3.0; };
    const std::array<double, 3> pts{0.0, 0.5, 1.0};
    const auto r = quad::integrate(step, std::span<const double>(pts));
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.intervals == 2);

    const std::array<double, 2> bad{1.0, 0.0};
    CHECK_THROWS_AS(quad::integrate(step, std::span<const double>(bad)), DomainError);
    const std::array<double, 1> single{0.0};
    CHECK_THROWS_AS(quad::integrate(step, std::span<const double>(single)), DomainError);
}

TEST_CASE("budget exhaustion and non-finite integrands are reported") {
    auto spiky = [](double x) { return 1.0 / (std::pow(x - 0.3137, 2) + 1e-16); };
    quad::Options tight;
    tight.max_subdivisions = 10;
    CHECK_THROWS_AS(quad::integrate(spiky, 0.0, 1.0, tight), ConvergenceFailure);

    auto nan = [](double x) { return x > 0.5 ? std::nan("") : 1.0; };
    CHECK_THROWS_AS(quad::integrate(nan, 0.0, 1.0), ConvergenceFailure);
}

TEST_CASE("error estimate bounds the actual error") {
    auto f = [](double x) { return std::exp(std::sin(3.0 * x)); };
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 4.0, 15, 1e-12);
    for (double tol : {1e-4, 1e-7, 1e-10}) {
        quad::Options o;
        o.rel_tol = tol;
        const auto r = quad::integrate(f, 0.0, 4.0, o);
        CAPTURE(tol);
        CHECK(std::abs(r.value - ref) <= r.error + 1e-15);
        CHECK(r.error <= tol * std::abs(r.value));
    }
}
