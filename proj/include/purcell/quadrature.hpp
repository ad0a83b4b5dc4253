#pragma once

// Globally adaptive Gauss-Kronrod (7, 15) quadrature.
//
// The interval with the largest error estimate is bisected until the summed
// error drops below max(abs_tol, rel_tol * |I|). The final sum runs over the
// intervals in left-endpoint order, so results do not depend on the order in
// which intervals were refined.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "purcell/errors.hpp"

namespace purcell::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 2000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
};

struct ByError {
    bool operator()(const Interval& l, const Interval& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.a > r.a;
    }
};

template <class F>
Interval gk15(const F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    double abs_sum = kKronrodWeights[7] * std::abs(fc);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f1[j] = f(centre - dx);
        f2[j] = f(centre + dx);
        kronrod += kKronrodWeights[j] * (f1[j] + f2[j]);
        abs_sum += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }
    asc *= std::abs(half);

    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double abs_int = abs_sum * std::abs(half);
    const double eps = std::numeric_limits<double>::epsilon();
    if (abs_int > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * abs_int, err);
    }
    return {a, b, kronrod * half, err};
}

}  // namespace detail

/// Integrates f over [points.front(), points.back()], starting from the
/// partition given by the sorted breakpoints. Throws ConvergenceFailure when
/// the subdivision budget runs out or the integrand is not finite.
template <class F>
Result integrate(const F& f, std::span<const double> points, const Options& opts = {}) {
    if (points.size() < 2) throw DomainError("quadrature needs at least two breakpoints");
    if (!std::is_sorted(points.begin(), points.end())) {
        throw DomainError("quadrature breakpoints must be sorted");
    }

    std::priority_queue<detail::Interval, std::vector<detail::Interval>, detail::ByError> work;
    std::vector<detail::Interval> done;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] == points[i]) continue;
        auto iv = detail::gk15(f, points[i], points[i + 1]);
        total += iv.value;
        total_err += iv.error;
        work.push(iv);
    }

    auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
    int count = static_cast<int>(work.size());
    while (!work.empty() && total_err > tolerance()) {
        if (!std::isfinite(total) || !std::isfinite(total_err)) {
            throw ConvergenceFailure("integrand produced a non-finite value");
        }
        if (count >= opts.max_subdivisions) {
            throw ConvergenceFailure("subdivision budget of " + std::to_string(opts.max_subdivisions) +
                                     " intervals exhausted (error estimate " +
                                     std::to_string(total_err) + ")");
        }
        const auto worst = work.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval cannot be split any further in double precision.
            done.push_back(worst);
            work.pop();
            continue;
        }
        work.pop();
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        work.push(left);
        work.push(right);
        ++count;
    }

    while (!work.empty()) {
        done.push_back(work.top());
        work.pop();
    }
    std::sort(done.begin(), done.end(),
              [](const detail::Interval& l, const detail::Interval& r) { return l.a < r.a; });
    Result out;
    for (const auto& iv : done) {
        out.value += iv.value;
        out.error += iv.error;
    }
    out.intervals = static_cast<int>(done.size());
    if (!std::isfinite(out.value)) throw ConvergenceFailure("integral is not finite");
    return out;
}

template <class F>
Result integrate(const F& f, double a, double b, const Options& opts = {}) {
    const std::array<double, 2> pts{a, b};
    return integrate(f, std::span<const double>(pts), opts);
}

/// Integral over [a, inf) through the map x = a + u / (1 - u), u in [0, 1).
template <class F>
Result integrate_to_infinity(const F& f, double a, const Options& opts = {}) {
    auto mapped = [&](double u) {
        if (u >= 1.0) return 0.0;
        const double s = 1.0 - u;
        return f(a + u / s) / (s * s);
    };
    return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace purcell::quad
