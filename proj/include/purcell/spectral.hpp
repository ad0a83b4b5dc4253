#pragma once

// Independent check of the closed-form rates: the photon spectral function
// with each delta peak replaced by a unit-area Lorentzian of width eta is
// integrated over k-space, and the eta -> 0 limit is taken by polynomial
// extrapolation along a ladder of widths.
//
// Units: frequencies in omega0, wave numbers in omega0 / c. The massive
// dispersion is omega_k = sqrt(k^2 + x^2) with x = M c^2 / (hbar omega0).

#include <iosfwd>
#include <span>
#include <vector>

namespace purcell::spectral {

struct BroadenedSpectral {
    double x = 0.0;
    double eta = 0.01;

    void validate() const;
};

struct QuadratureConfig {
    double k_max = 50.0;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    /// Largest admissible fraction of the resonant Lorentzian weight that
    /// falls beyond the cutoff.
    double tail_tol = 1e-3;

    void validate() const;
};

struct EtaLadder {
    std::vector<double> etas{0.08, 0.04, 0.02, 0.01};
    int extrapolation_order = 2;

    void validate() const;
};

double dispersion(double k, double x);

/// Normalized Lorentzian of half width eta.
double lorentzian(double detuning, double eta);

/// (1 / omega_k) [L(omega - omega_k) - L(omega + omega_k)], written as a
/// single fraction so it stays finite at omega_k = 0.
double spectral_value(double omega_k, double omega, const BroadenedSpectral& spec);

struct Integral {
    double value = 0.0;
    double error = 0.0;
    /// Resonant Lorentzian weight beyond the cutoff.
    double tail_fraction = 0.0;
    int intervals = 0;
};

/// R(x, eta): integral over 0 <= k <= k_max of k^2 omega_k^2 A(omega_k, 1).
/// Throws ConvergenceFailure or TailTooFat.
Integral integrate_rate(double x, double eta, const QuadratureConfig& quad);

/// Broadened density of states at frequency omega: integral of
/// k^2 omega_k A(omega_k, omega). Tends to omega sqrt(omega^2 - x^2) as eta -> 0.
Integral integrate_dos(double x, double omega, double eta, const QuadratureConfig& quad);

/// First frequency moment of the broadened spectral function over omega >= 0.
double spectral_first_moment(double omega_k, double eta, double rel_tol = 1e-12);

struct EtaSample {
    double eta;
    double value;
};

struct Extrapolated {
    double value = 0.0;
    double error = 0.0;
};

/// Least-squares polynomial of degree `order` in eta, evaluated at eta = 0.
/// The error is the residual-based standard error of the intercept, or the
/// change against the next-lower degree when the fit has no spare points.
/// Throws IllConditioned.
Extrapolated extrapolate_eta(std::span<const EtaSample> values, int order);

/// R(x, eta -> 0) along the ladder.
Extrapolated extrapolated_rate(double x, const EtaLadder& ladder, const QuadratureConfig& quad);

/// Quadrature density of states extrapolated to eta -> 0.
Extrapolated extrapolated_dos(double x, double omega, const EtaLadder& ladder,
                              const QuadratureConfig& quad);

struct DosRow {
    double omega;
    double dos;
    double vacuum;
};

/// Closed-form density of states omega sqrt(omega^2 - x^2), zero inside the
/// gap, normalized so the vacuum curve is omega^2.
std::vector<DosRow> dos_curve(double x, std::span<const double> omega_grid);

void write_dos_csv(std::ostream& os, std::span<const DosRow> rows);

struct OracleRow {
    double x;
    double closed_form;
    double oracle;
    double abs_diff;
    double eta_error_bar;
    bool flagged;
};

struct OracleReport {
    std::vector<OracleRow> rows;
    double tolerance;

    bool all_within(double x_limit) const;
};

/// Compares the extrapolated quadrature ratio R(x) / R(0) with sqrt(1 - x^2)
/// for every x. The x = 0 reference shares the ladder and quadrature settings.
OracleReport oracle_check(std::span<const double> x_list, const EtaLadder& ladder,
                          const QuadratureConfig& quad, double tolerance = 1e-3);

/// CSV with columns x,closed_form,oracle,abs_diff,eta_error_bar.
void write_oracle_csv(std::ostream& os, const OracleReport& report);

}  // namespace purcell::spectral
