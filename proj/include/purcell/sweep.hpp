#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "purcell/physics.hpp"

namespace purcell {

struct RateSample {
    double t;
    double ratio;

    bool operator==(const RateSample&) const = default;
};

struct CurveMetadata {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    /// Relative noise level the data were generated or measured with.
    std::optional<double> sigma_rel;

    bool operator==(const CurveMetadata&) const = default;
};

/// Sampled (t, Gamma / Gamma0) pairs.
struct RateCurve {
    std::vector<RateSample> samples;
    CurveMetadata metadata;

    bool operator==(const RateCurve&) const = default;

    /// Ratios are finite and >= 0.
    void validate() const;
};

/// Strictly monotone reduced temperatures, never exactly 0.
class TemperatureGrid {
public:
    TemperatureGrid() = default;
    explicit TemperatureGrid(std::vector<double> points);

    /// n evenly spaced points on [first, last]. Points that land on t = 0
    /// (to rounding) are dropped, and so are symmetric-side points with
    /// |t| < symmetric_exclusion.
    static TemperatureGrid linspace(double first, double last, std::size_t n,
                                    double symmetric_exclusion = 0.0);

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

private:
    std::vector<double> points_;
};

/// Radius of the symmetric-side window kept away from the Landau pole:
/// 1.05 |t*|.
double pole_exclusion_radius(const SymmetricPhaseLaw& law, double alpha);

RateCurve sweep_broken(const TemperatureGrid& grid, const BrokenPhaseLaw& law);

RateCurve sweep_full(const TemperatureGrid& grid, const PhaseScenario& scenario);

struct NoiseSpec {
    double sigma_rel = 0.0;
    std::uint64_t seed = 0;
    bool floor_at_zero = true;
};

/// Standard normal deviates from std::mt19937_64 through the Box-Muller
/// transform. Both members of each generated pair are used, in order.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    double uniform_open();  // (0, 1]
    double uniform();       // [0, 1)

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Multiplies each ratio by (1 + sigma_rel g_i), g_i drawn in sample order.
RateCurve add_noise(const RateCurve& curve, const NoiseSpec& noise);

/// First t (in increasing order) of the broken phase from which the ratio
/// stays exactly 0. nullopt when no such plateau is present.
std::optional<double> find_gap_edge(const RateCurve& curve);

}  // namespace purcell
