#pragma once

// Critical-exponent estimation from Gamma / Gamma0 versus reduced temperature.
//
// Broken phase: (Gamma / Gamma0)^2 = 1 - x0^2 t^(2 beta), so
//   ln(1 - r^2) = 2 beta ln t + 2 ln x0
// gives a linear seed that a damped least-squares fit of the rate model refines.
// Symmetric phase: 1 - Gamma0 / Gamma = Pi = (alpha / 6 pi) ln(xi / xi0).

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "purcell/least_squares.hpp"
#include "purcell/physics.hpp"
#include "purcell/sweep.hpp"

namespace purcell::estimate {

/// Broken-phase points with ratio < gap or ratio > 1 - saturation carry no
/// usable information on beta and are masked out.
struct MaskThresholds {
    double gap = 1e-3;
    double saturation = 1e-6;
};

struct MaskReport {
    std::size_t used = 0;
    std::size_t gap = 0;
    std::size_t saturated = 0;
    std::size_t wrong_phase = 0;
};

struct FitOptions {
    /// Relative noise level; falls back to the curve metadata. Without one,
    /// every ratio is taken to carry the same absolute uncertainty.
    std::optional<double> sigma_rel;
    MaskThresholds mask;
    lsq::Options lm;
};

struct LinearPoint {
    double log_t;
    double log_deficit;  // ln(1 - r^2)
    double weight;
};

struct LinearizedData {
    std::vector<LinearPoint> points;
    MaskReport mask;
};

/// Throws AllMasked when nothing survives the mask, InsufficientData when
/// fewer than three points do.
LinearizedData linearize_broken(const RateCurve& curve, const FitOptions& opts = {});

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double rss = 0.0;
    std::optional<double> r_squared;  // undefined for constant data
    std::size_t n = 0;
};

LineFit weighted_line_fit(std::span<const LinearPoint> points);

struct FitResult {
    std::map<std::string, double> params;
    double residual_ss = 0.0;
    double initial_residual_ss = 0.0;
    int dof = 0;
    std::map<std::string, double> param_stderr;  // filled only when converged
    bool converged = false;
    int iterations = 0;
    MaskReport mask;

    double beta() const { return params.at("beta"); }
    double x0() const { return params.at("x0"); }
};

struct FitSeed {
    double beta;
    double x0;
};

/// Weighted fit of sqrt(max(0, 1 - x0^2 t^(2 beta))) over the unmasked points.
/// Without a seed, (beta, x0) come from the linearized regression. A fit that
/// exhausts its budget is returned with converged = false. Throws
/// DegenerateJacobian when every broken-phase point sits on the zero plateau.
FitResult fit_broken(const RateCurve& curve, std::optional<FitSeed> seed = std::nullopt,
                     const FitOptions& opts = {});

struct Candidate {
    std::string label;
    double beta;
};

/// "mean field" for 1/2, "Ising model" for 1/8, "1/4" for 1/4, the number otherwise.
std::string label_for_beta(double beta);

struct CandidateSet {
    std::vector<Candidate> candidates;

    /// 1/2, 1/4 and 1/8.
    static CandidateSet typical();
    static CandidateSet from_betas(std::span<const double> betas);

    void validate() const;
};

struct CandidateScore {
    std::string label;
    double beta = 0.0;
    double x0 = 0.0;
    double residual_ss = 0.0;
    double aic = 0.0;
    bool converged = false;
    std::string error;  // non-empty when this candidate's fit failed
};

struct Classification {
    std::string best;
    std::vector<CandidateScore> scores;
    /// AIC gap between runner-up and best; absent with a single candidate.
    std::optional<double> margin;
    /// Runner-up residual over best residual.
    std::optional<double> residual_ratio;

    const CandidateScore& best_score() const;
};

/// Fits x0 with beta pinned to each candidate and ranks them by the Gaussian
/// AIC  n ln(rss / n) + 2 k.
Classification classify(const RateCurve& curve, const CandidateSet& candidates,
                        const FitOptions& opts = {});

struct SymmetricFit {
    CorrelationKind kind = CorrelationKind::Exponential;
    std::map<std::string, double> params;  // delta, or a_over_xi0 and nu
    std::map<std::string, double> param_stderr;
    double residual_ss = 0.0;
    bool converged = false;
    int iterations = 0;
    std::size_t n = 0;
};

SymmetricFit fit_symmetric(const RateCurve& curve, CorrelationKind kind, double alpha = 1.0 / 137.0,
                           const FitOptions& opts = {});

struct AbsoluteSample {
    double temperature;
    double ratio;
};

struct TcProfilePoint {
    double tc = 0.0;
    std::optional<double> r_squared;
    std::optional<double> beta;
    std::size_t used = 0;
};

struct TcScan {
    double best_tc = 0.0;
    double best_r_squared = 0.0;
    std::vector<TcProfilePoint> profile;
};

/// Scores each candidate Tc by the R^2 of the linearized broken-phase
/// regression. Throws InsufficientData when no candidate yields a fit.
TcScan tc_scan(std::span<const AbsoluteSample> samples, std::span<const double> tc_grid,
               const FitOptions& opts = {});

// JSON renderings with sorted keys.
std::string to_json(const FitResult& fit);
std::string to_json(const Classification& cls);
std::string to_json(const SymmetricFit& fit);
std::string to_json(const TcScan& scan);

}  // namespace purcell::estimate
