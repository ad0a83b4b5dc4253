#include "purcell/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "purcell/errors.hpp"
#include "purcell/number_format.hpp"

namespace purcell {

void RateCurve::validate() const {
    for (const auto& s : samples) {
        if (!std::isfinite(s.t) || !std::isfinite(s.ratio) || s.ratio < 0.0) {
            throw DomainError("curve sample (" + format_number(s.t) + ", " + format_number(s.ratio) +
                              ") is not a finite non-negative rate");
        }
    }
}

TemperatureGrid::TemperatureGrid(std::vector<double> points) : points_(std::move(points)) {
    const bool increasing = points_.size() < 2 || points_[1] > points_[0];
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i])) throw DomainError("grid points must be finite");
        if (points_[i] == 0.0) throw DomainError("grid must exclude the critical point t = 0");
        if (i > 0) {
            const bool ok = increasing ? points_[i] > points_[i - 1] : points_[i] < points_[i - 1];
            if (!ok) throw DomainError("grid points must be strictly monotone");
        }
    }
}

TemperatureGrid TemperatureGrid::linspace(double first, double last, std::size_t n,
                                          double symmetric_exclusion) {
    if (!std::isfinite(first) || !std::isfinite(last)) throw DomainError("grid bounds must be finite");
    if (n == 0) return TemperatureGrid();
    if (n > 1 && first == last) throw DomainError("grid bounds must differ");
    const double snap = 1e-12 * std::max(std::abs(first), std::abs(last));
    std::vector<double> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? first : std::lerp(first, last, static_cast<double>(i) / static_cast<double>(n - 1));
        if (std::abs(t) <= snap) continue;
        if (t < 0.0 && -t < symmetric_exclusion) continue;
        pts.push_back(t);
    }
    return TemperatureGrid(std::move(pts));
}

double pole_exclusion_radius(const SymmetricPhaseLaw& law, double alpha) {
    return 1.05 * pole_location(law, alpha);
}

RateCurve sweep_broken(const TemperatureGrid& grid, const BrokenPhaseLaw& law) {
    law.validate();
    RateCurve curve;
    curve.samples.reserve(grid.size());
    for (double t : grid.points()) {
        if (t <= 0.0) throw DomainError("sweep_broken requires every grid point in the broken phase");
        curve.samples.push_back({t, gamma_ratio_higgs(mass_ratio(ReducedTemperature(t), law))});
    }
    return curve;
}

RateCurve sweep_full(const TemperatureGrid& grid, const PhaseScenario& scenario) {
    scenario.validate();
    RateCurve curve;
    curve.samples.reserve(grid.size());
    for (double t : grid.points()) {
        curve.samples.push_back({t, gamma_ratio(ReducedTemperature(t), scenario)});
    }
    return curve;
}

double GaussianStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianStream::uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

RateCurve add_noise(const RateCurve& curve, const NoiseSpec& noise) {
    if (!std::isfinite(noise.sigma_rel) || noise.sigma_rel < 0.0) {
        throw DomainError("sigma_rel must be >= 0");
    }
    if (noise.sigma_rel == 0.0) return curve;
    RateCurve out = curve;
    out.metadata.seed = noise.seed;
    out.metadata.sigma_rel = noise.sigma_rel;

    GaussianStream gauss(noise.seed);
    for (auto& s : out.samples) {
        s.ratio *= 1.0 + noise.sigma_rel * gauss.next();
        if (noise.floor_at_zero && !(s.ratio > 0.0)) s.ratio = 0.0;
    }
    return out;
}

std::optional<double> find_gap_edge(const RateCurve& curve) {
    std::vector<RateSample> broken;
    for (const auto& s : curve.samples) {
        if (s.t > 0.0) broken.push_back(s);
    }
    std::sort(broken.begin(), broken.end(),
              [](const RateSample& a, const RateSample& b) { return a.t < b.t; });
    std::optional<double> edge;
    for (auto it = broken.rbegin(); it != broken.rend() && it->ratio == 0.0; ++it) edge = it->t;
    return edge;
}

}  // namespace purcell
