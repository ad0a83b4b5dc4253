#include "purcell/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <tuple>

#include "purcell/errors.hpp"
#include "purcell/number_format.hpp"
#include "purcell/parallel.hpp"
#include "purcell/physics.hpp"
#include "purcell/quadrature.hpp"

namespace purcell::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

quad::Options to_options(const QuadratureConfig& q) {
    quad::Options o;
    o.rel_tol = q.rel_tol;
    o.max_subdivisions = q.max_subdivisions;
    return o;
}

// Resonant Lorentzian weight centred at omega that lies beyond omega_max.
double lost_weight(double omega, double omega_max, double eta) {
    return 0.5 - std::atan((omega_max - omega) / eta) / kPi;
}

// Breakpoints over [0, k_max] that bracket the resonance at k_peak so the
// adaptive rule starts from a partition resolving the Lorentzian.
std::vector<double> resonance_partition(double k_peak, double eta, double k_max) {
    std::vector<double> pts{0.0, k_max};
    if (k_peak >= 0.0) {
        for (double m : {-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0}) {
            const double k = k_peak + m * eta;
            if (k > 0.0 && k < k_max) pts.push_back(k);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// k^2 omega_k^power A(omega_k, omega) over [0, k_max].
Integral integrate_moment(double x, double omega, double eta, int power,
                          const QuadratureConfig& q) {
    const BroadenedSpectral spec{x, eta};
    spec.validate();
    q.validate();

    const double omega_max = dispersion(q.k_max, x);
    Integral out;
    out.tail_fraction = lost_weight(omega, omega_max, eta);
    if (out.tail_fraction > q.tail_tol) {
        throw TailTooFat("cutoff k_max = " + format_number(q.k_max) + " leaves " +
                         format_number(out.tail_fraction) +
                         " of the resonant weight outside the integration range (eta = " +
                         format_number(eta) + ")");
    }

    const double k_peak =
        omega > x ? std::sqrt((omega - x) * (omega + x)) : -1.0;
    const auto pts = resonance_partition(k_peak, eta, q.k_max);
    auto integrand = [&](double k) {
        const double wk = dispersion(k, x);
        return k * k * std::pow(wk, power) * spectral_value(wk, omega, spec);
    };
    const auto r = quad::integrate(integrand, std::span<const double>(pts), to_options(q));
    out.value = r.value;
    out.error = r.error;
    out.intervals = r.intervals;
    return out;
}

}  // namespace

void BroadenedSpectral::validate() const {
    require(std::isfinite(x) && x >= 0.0, "mass ratio x must be >= 0");
    require(std::isfinite(eta) && eta > 0.0, "broadening eta must be > 0");
}

void QuadratureConfig::validate() const {
    require(std::isfinite(k_max) && k_max > 1.0, "k_max must exceed 1");
    require(std::isfinite(rel_tol) && rel_tol > 0.0, "rel_tol must be > 0");
    require(max_subdivisions > 0, "max_subdivisions must be positive");
    require(std::isfinite(tail_tol) && tail_tol > 0.0, "tail_tol must be > 0");
}

void EtaLadder::validate() const {
    require(etas.size() >= 3, "eta ladder needs at least three widths");
    require(extrapolation_order >= 0, "extrapolation order must be >= 0");
    require(etas.size() >= static_cast<std::size_t>(extrapolation_order) + 1,
            "eta ladder is shorter than extrapolation order + 1");
    for (std::size_t i = 0; i < etas.size(); ++i) {
        require(std::isfinite(etas[i]) && etas[i] > 0.0, "eta ladder entries must be > 0");
        if (i > 0) require(etas[i] < etas[i - 1], "eta ladder must be strictly decreasing");
    }
}

double dispersion(double k, double x) { return std::hypot(k, x); }

double lorentzian(double detuning, double eta) {
    return eta / (kPi * (detuning * detuning + eta * eta));
}

double spectral_value(double omega_k, double omega, const BroadenedSpectral& spec) {
    // L(w - a) - L(w + a) = (eta / pi) 4 w a / (((w - a)^2 + eta^2)((w + a)^2 + eta^2))
    const double eta2 = spec.eta * spec.eta;
    const double dm = omega - omega_k;
    const double dp = omega + omega_k;
    return 4.0 * spec.eta * omega / (kPi * (dm * dm + eta2) * (dp * dp + eta2));
}

Integral integrate_rate(double x, double eta, const QuadratureConfig& quad) {
    return integrate_moment(x, 1.0, eta, 2, quad);
}

Integral integrate_dos(double x, double omega, double eta, const QuadratureConfig& quad) {
    require(std::isfinite(omega) && omega >= 0.0, "frequency must be >= 0");
    return integrate_moment(x, omega, eta, 1, quad);
}

double spectral_first_moment(double omega_k, double eta, double rel_tol) {
    const BroadenedSpectral spec{0.0, eta};
    spec.validate();
    auto integrand = [&](double w) { return w * spectral_value(omega_k, w, spec); };
    std::vector<double> pts{0.0};
    for (double m : {-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0}) {
        const double w = omega_k + m * eta;
        if (w > 0.0) pts.push_back(w);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    quad::Options o;
    o.rel_tol = rel_tol;
    o.max_subdivisions = 10000;
    const double near = quad::integrate(integrand, std::span<const double>(pts), o).value;
    const double far = quad::integrate_to_infinity(integrand, pts.back(), o).value;
    return near + far;
}

Extrapolated extrapolate_eta(std::span<const EtaSample> values, int order) {
    require(order >= 0, "extrapolation order must be >= 0");
    const auto n = static_cast<Eigen::Index>(values.size());
    require(n >= order + 1, "need at least order + 1 ladder points");

    double scale = 0.0;
    for (const auto& s : values) {
        require(std::isfinite(s.eta) && s.eta > 0.0, "ladder widths must be > 0");
        require(std::isfinite(s.value), "ladder values must be finite");
        scale = std::max(scale, s.eta);
    }

    auto fit = [&](int degree) {
        Eigen::MatrixXd vander(n, degree + 1);
        Eigen::VectorXd rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = values[i].eta / scale;
            double p = 1.0;
            for (int j = 0; j <= degree; ++j) {
                vander(i, j) = p;
                p *= h;
            }
            rhs(i) = values[i].value;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(vander, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        if (!(smin > 0.0) || sv(0) / smin > 1e10) {
            throw IllConditioned("eta ladder spacing makes the degree-" + std::to_string(degree) +
                                 " fit ill-conditioned");
        }
        Eigen::VectorXd coef = svd.solve(rhs);
        const double rss = (vander * coef - rhs).squaredNorm();
        double cov00 = 0.0;
        for (Eigen::Index j = 0; j < sv.size(); ++j) {
            const double v = svd.matrixV()(0, j) / sv(j);
            cov00 += v * v;
        }
        return std::tuple{coef(0), rss, cov00};
    };

    const auto [intercept, rss, cov00] = fit(order);
    Extrapolated out;
    out.value = intercept;
    const Eigen::Index dof = n - (order + 1);
    if (dof > 0) {
        out.error = std::sqrt(rss / static_cast<double>(dof) * cov00);
    } else if (order > 0) {
        out.error = std::abs(intercept - std::get<0>(fit(order - 1)));
    }
    return out;
}

Extrapolated extrapolated_rate(double x, const EtaLadder& ladder, const QuadratureConfig& quad) {
    ladder.validate();
    std::vector<EtaSample> samples;
    for (double eta : ladder.etas) samples.push_back({eta, integrate_rate(x, eta, quad).value});
    return extrapolate_eta(samples, ladder.extrapolation_order);
}

Extrapolated extrapolated_dos(double x, double omega, const EtaLadder& ladder,
                              const QuadratureConfig& quad) {
    ladder.validate();
    std::vector<EtaSample> samples;
    for (double eta : ladder.etas) samples.push_back({eta, integrate_dos(x, omega, eta, quad).value});
    return extrapolate_eta(samples, ladder.extrapolation_order);
}

std::vector<DosRow> dos_curve(double x, std::span<const double> omega_grid) {
    require(std::isfinite(x) && x >= 0.0, "mass ratio x must be >= 0");
    std::vector<DosRow> rows;
    rows.reserve(omega_grid.size());
    for (double w : omega_grid) {
        require(std::isfinite(w) && w >= 0.0, "frequency grid values must be >= 0");
        const double vacuum = w * w;
        double dos = 0.0;
        if (x == 0.0) {
            dos = vacuum;
        } else if (w > x) {
            const double r = x / w;
            dos = vacuum * std::sqrt((1.0 - r) * (1.0 + r));
        }
        rows.push_back({w, dos, vacuum});
    }
    return rows;
}

void write_dos_csv(std::ostream& os, std::span<const DosRow> rows) {
    os << "omega,dos,vacuum\n";
    for (const auto& r : rows) {
        os << format_number(r.omega) << ',' << format_number(r.dos) << ','
           << format_number(r.vacuum) << '\n';
    }
}

bool OracleReport::all_within(double x_limit) const {
    return std::all_of(rows.begin(), rows.end(), [&](const OracleRow& r) {
        return r.x > x_limit || r.abs_diff < tolerance;
    });
}

OracleReport oracle_check(std::span<const double> x_list, const EtaLadder& ladder,
                          const QuadratureConfig& quad, double tolerance) {
    ladder.validate();
    quad.validate();
    for (double x : x_list) require(std::isfinite(x) && x >= 0.0, "x list entries must be >= 0");

    // Slot 0 is the x = 0 reference run.
    std::vector<double> xs{0.0};
    xs.insert(xs.end(), x_list.begin(), x_list.end());
    const std::size_t n_eta = ladder.etas.size();
    std::vector<double> raw(xs.size() * n_eta);
    parallel_for(raw.size(), [&](std::size_t i) {
        raw[i] = integrate_rate(xs[i / n_eta], ladder.etas[i % n_eta], quad).value;
    });

    auto limit = [&](std::size_t slot) {
        std::vector<EtaSample> samples;
        for (std::size_t j = 0; j < n_eta; ++j) samples.push_back({ladder.etas[j], raw[slot * n_eta + j]});
        return extrapolate_eta(samples, ladder.extrapolation_order);
    };

    const auto reference = limit(0);
    if (!(reference.value > 0.0)) throw ConvergenceFailure("reference rate R(0) is not positive");

    OracleReport report;
    report.tolerance = tolerance;
    for (std::size_t s = 1; s < xs.size(); ++s) {
        const auto lim = limit(s);
        OracleRow row;
        row.x = xs[s];
        row.closed_form = gamma_ratio_higgs(row.x);
        row.oracle = lim.value / reference.value;
        row.abs_diff = std::abs(row.oracle - row.closed_form);
        row.eta_error_bar = std::hypot(lim.error / reference.value,
                                       lim.value * reference.error / (reference.value * reference.value));
        row.flagged = !(row.abs_diff <= tolerance);
        report.rows.push_back(row);
    }
    return report;
}

void write_oracle_csv(std::ostream& os, const OracleReport& report) {
    os << "x,closed_form,oracle,abs_diff,eta_error_bar\n";
    for (const auto& r : report.rows) {
        os << format_number(r.x) << ',' << format_number(r.closed_form) << ','
           << format_number(r.oracle) << ',' << format_number(r.abs_diff) << ','
           << format_number(r.eta_error_bar) << '\n';
    }
}

}  // namespace purcell::spectral
