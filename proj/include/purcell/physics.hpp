#pragma once

// Closed-form emission rates of a two-level emitter embedded in a medium
// near a second-order phase transition. Everything past gamma_vacuum works in
// dimensionless ratios: x = M c^2 / (hbar omega0), xi / xi0, Gamma / Gamma0
// and the reduced temperature t = 1 - T / Tc (t > 0 broken, t < 0 symmetric).

#include <optional>

namespace purcell {

struct PhysicalConstants {
    double hbar = 1.054571817e-34;  // J s
    double c = 299792458.0;         // m / s
    double eps0 = 8.8541878128e-12; // F / m
    double alpha = 1.0 / 137.0;

    /// SI values with alpha = 1/137 exactly.
    static PhysicalConstants si() { return {}; }
    /// SI values with the CODATA 2018 fine-structure constant.
    static PhysicalConstants codata();

    void validate() const;
};

struct EmitterSpec {
    double omega0 = 0.0;  // rad / s
    double mu = 0.0;      // C m

    void validate() const;
};

enum class Phase { Broken, Critical, Symmetric };

/// t = 1 - T / Tc.
class ReducedTemperature {
public:
    constexpr explicit ReducedTemperature(double t) : t_(t) {}

    static ReducedTemperature from_absolute(double temperature, double tc);

    constexpr double value() const { return t_; }
    constexpr double magnitude() const { return t_ < 0.0 ? -t_ : t_; }
    constexpr Phase phase() const {
        return t_ > 0.0 ? Phase::Broken : (t_ < 0.0 ? Phase::Symmetric : Phase::Critical);
    }

private:
    double t_;
};

/// M(t) = M0 |t|^beta, expressed through x0 = M0 c^2 / (hbar omega0).
struct BrokenPhaseLaw {
    double x0 = 1.0;
    double beta = 0.5;
    std::optional<double> tc;  // only needed for absolute-temperature data

    void validate() const;
};

enum class CorrelationKind { PowerLaw, Exponential };

/// Correlation length in the symmetric phase.
///   PowerLaw:    xi = A |t|^-nu + xi0
///   Exponential: xi = xi0 exp(delta / |t|)
/// A enters only through A / xi0, which is what gets stored.
struct SymmetricPhaseLaw {
    CorrelationKind kind = CorrelationKind::Exponential;
    double a_over_xi0 = 1.0;
    double nu = 1.0;
    double delta = 10.0;
    double xi0 = 1.0;
    double t_min = 1e-12;  // |t| below this is rejected

    static SymmetricPhaseLaw power_law(double a_over_xi0, double nu, double xi0 = 1.0);
    static SymmetricPhaseLaw exponential(double delta, double xi0 = 1.0);

    void validate() const;
};

struct PhaseScenario {
    BrokenPhaseLaw broken;
    SymmetricPhaseLaw symmetric;
    EmitterSpec emitter;
    PhysicalConstants constants;

    void validate() const;
};

/// z_factor rejects Pi >= 1 - kPoleGuard.
inline constexpr double kPoleGuard = 1e-9;

/// Free-space rate omega0^3 mu^2 / (3 pi eps0 hbar c^3), in 1/s.
double gamma_vacuum(const EmitterSpec& emitter, const PhysicalConstants& constants);

/// x0 |t|^beta. Requires t >= 0.
double mass_ratio(ReducedTemperature t, const BrokenPhaseLaw& law);

/// sqrt(1 - x^2) below the gap, exactly 0 for x >= 1.
double gamma_ratio_higgs(double x);

/// xi / xi0 for t < 0. May overflow to +inf for the exponential law at small
/// |t|; gamma_ratio_symmetric goes through log_correlation_ratio instead.
double correlation_ratio(ReducedTemperature t, const SymmetricPhaseLaw& law);

/// ln(xi / xi0), finite wherever the law is.
double log_correlation_ratio(ReducedTemperature t, const SymmetricPhaseLaw& law);

/// Pi = (alpha / 12 pi) ln((xi / xi0)^2) with the renormalization point at 1 / xi0.
double vacuum_polarization(double xi_ratio, double alpha);

/// Z = 1 / (1 - Pi). Throws PoleReached for Pi >= 1 - kPoleGuard.
double z_factor(double pi_value);

double gamma_ratio_symmetric(ReducedTemperature t, const SymmetricPhaseLaw& law, double alpha);

/// Piecewise Gamma / Gamma0 across the transition. Throws CriticalPoint at t = 0.
double gamma_ratio(ReducedTemperature t, const PhaseScenario& scenario);

/// |t*| where Pi reaches 1 in the symmetric phase. Returns 0 when the pole is
/// not reachable at any representable |t| (power law with small alpha).
double pole_location(const SymmetricPhaseLaw& law, double alpha);

/// Reduced temperature (1 / x0)^(1 / beta) beyond which emission vanishes;
/// nullopt when x0 < 1 and the gap never opens on 0 < t <= 1.
std::optional<double> gap_onset(const BrokenPhaseLaw& law);

}  // namespace purcell
