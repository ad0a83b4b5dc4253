#include "purcell/physics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "purcell/errors.hpp"

namespace purcell {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

PhysicalConstants PhysicalConstants::codata() {
    PhysicalConstants c;
    c.alpha = 7.2973525693e-3;
    return c;
}

void PhysicalConstants::validate() const {
    require(positive_finite(hbar), "hbar must be positive");
    require(positive_finite(c), "c must be positive");
    require(positive_finite(eps0), "eps0 must be positive");
    require(positive_finite(alpha) && alpha < 1.0, "alpha must lie in (0, 1)");
}

void EmitterSpec::validate() const {
    require(positive_finite(omega0), "omega0 must be positive");
    require(positive_finite(mu), "mu must be positive");
}

ReducedTemperature ReducedTemperature::from_absolute(double temperature, double tc) {
    require(positive_finite(tc), "Tc must be positive");
    require(std::isfinite(temperature), "temperature must be finite");
    return ReducedTemperature(1.0 - temperature / tc);
}

void BrokenPhaseLaw::validate() const {
    require(std::isfinite(x0) && x0 >= 0.0, "x0 must be >= 0");
    require(std::isfinite(beta) && beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    if (tc) require(positive_finite(*tc), "Tc must be positive");
}

SymmetricPhaseLaw SymmetricPhaseLaw::power_law(double a_over_xi0, double nu, double xi0) {
    SymmetricPhaseLaw law;
    law.kind = CorrelationKind::PowerLaw;
    law.a_over_xi0 = a_over_xi0;
    law.nu = nu;
    law.xi0 = xi0;
    law.validate();
    return law;
}

SymmetricPhaseLaw SymmetricPhaseLaw::exponential(double delta, double xi0) {
    SymmetricPhaseLaw law;
    law.kind = CorrelationKind::Exponential;
    law.delta = delta;
    law.xi0 = xi0;
    law.validate();
    return law;
}

void SymmetricPhaseLaw::validate() const {
    require(positive_finite(xi0), "xi0 must be positive");
    require(std::isfinite(t_min) && t_min >= 0.0, "t_min must be >= 0");
    if (kind == CorrelationKind::PowerLaw) {
        require(std::isfinite(a_over_xi0) && a_over_xi0 >= 0.0, "A must be >= 0");
        require(positive_finite(nu), "nu must be positive");
    } else {
        require(positive_finite(delta), "delta must be positive");
    }
}

void PhaseScenario::validate() const {
    broken.validate();
    symmetric.validate();
    emitter.validate();
    constants.validate();
}

double gamma_vacuum(const EmitterSpec& emitter, const PhysicalConstants& constants) {
    emitter.validate();
    constants.validate();
    const double w = emitter.omega0;
    const double c = constants.c;
    return (w * w * w) * (emitter.mu * emitter.mu) /
           (3.0 * std::numbers::pi * constants.eps0 * constants.hbar * (c * c * c));
}

double mass_ratio(ReducedTemperature t, const BrokenPhaseLaw& law) {
    law.validate();
    require(std::isfinite(t.value()), "t must be finite");
    require(t.value() >= 0.0, "mass_ratio requires the broken phase (t >= 0)");
    if (t.value() == 0.0) return 0.0;
    return law.x0 * std::pow(t.value(), law.beta);
}

double gamma_ratio_higgs(double x) {
    require(std::isfinite(x) && x >= 0.0, "mass ratio must be finite and >= 0");
    if (x >= 1.0) return 0.0;
    // (1 - x)(1 + x) keeps full relative precision as x -> 1.
    return std::sqrt((1.0 - x) * (1.0 + x));
}

double log_correlation_ratio(ReducedTemperature t, const SymmetricPhaseLaw& law) {
    law.validate();
    require(std::isfinite(t.value()), "t must be finite");
    require(t.value() < 0.0, "correlation length law requires the symmetric phase (t < 0)");
    const double mag = t.magnitude();
    if (mag < law.t_min || mag == 0.0) {
        throw DomainError("|t| = " + std::to_string(mag) + " is below the divergence floor t_min");
    }
    if (law.kind == CorrelationKind::Exponential) return law.delta / mag;
    return std::log1p(law.a_over_xi0 * std::pow(mag, -law.nu));
}

double correlation_ratio(ReducedTemperature t, const SymmetricPhaseLaw& law) {
    return std::exp(log_correlation_ratio(t, law));
}

double vacuum_polarization(double xi_ratio, double alpha) {
    require(positive_finite(alpha) && alpha < 1.0, "alpha must lie in (0, 1)");
    require(!std::isnan(xi_ratio) && xi_ratio >= 1.0, "xi / xi0 must be >= 1");
    return alpha / (6.0 * std::numbers::pi) * std::log(xi_ratio);
}

double z_factor(double pi_value) {
    require(!std::isnan(pi_value) && pi_value >= 0.0, "Pi must be >= 0");
    if (pi_value >= 1.0 - kPoleGuard) throw PoleReached(pi_value);
    return 1.0 / (1.0 - pi_value);
}

double gamma_ratio_symmetric(ReducedTemperature t, const SymmetricPhaseLaw& law, double alpha) {
    require(positive_finite(alpha) && alpha < 1.0, "alpha must lie in (0, 1)");
    const double pi_value = alpha / (6.0 * std::numbers::pi) * log_correlation_ratio(t, law);
    return z_factor(pi_value);
}

double gamma_ratio(ReducedTemperature t, const PhaseScenario& scenario) {
    switch (t.phase()) {
        case Phase::Critical:
            throw CriticalPoint();
        case Phase::Broken:
            return gamma_ratio_higgs(mass_ratio(t, scenario.broken));
        case Phase::Symmetric:
            break;
    }
    return gamma_ratio_symmetric(t, scenario.symmetric, scenario.constants.alpha);
}

double pole_location(const SymmetricPhaseLaw& law, double alpha) {
    law.validate();
    require(positive_finite(alpha) && alpha < 1.0, "alpha must lie in (0, 1)");
    // Pi = 1  <=>  ln(xi / xi0) = 6 pi / alpha.
    const double log_xi = 6.0 * std::numbers::pi / alpha;
    if (law.kind == CorrelationKind::Exponential) return law.delta / log_xi;
    if (law.a_over_xi0 == 0.0) return 0.0;
    const double denom = std::expm1(log_xi);
    if (!std::isfinite(denom)) return 0.0;
    return std::pow(law.a_over_xi0 / denom, 1.0 / law.nu);
}

std::optional<double> gap_onset(const BrokenPhaseLaw& law) {
    law.validate();
    if (law.x0 < 1.0) return std::nullopt;
    return std::pow(1.0 / law.x0, 1.0 / law.beta);
}

}  // namespace purcell
