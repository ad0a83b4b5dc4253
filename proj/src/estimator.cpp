#include "purcell/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "purcell/errors.hpp"
#include "purcell/number_format.hpp"

namespace purcell::estimate {

namespace {

constexpr std::size_t kMinPoints = 3;

struct BrokenPoint {
    double t;
    double ratio;
    double weight;  // 1 / sigma_i^2 in ratio space
};

std::optional<double> noise_level(const RateCurve& curve, const FitOptions& opts) {
    auto sigma = opts.sigma_rel ? opts.sigma_rel : curve.metadata.sigma_rel;
    if (sigma && !(std::isfinite(*sigma) && *sigma > 0.0)) sigma.reset();
    return sigma;
}

// Absolute standard deviation of a ratio measurement.
double ratio_sigma(double ratio, const std::optional<double>& sigma_rel) {
    return sigma_rel ? *sigma_rel * ratio : 1.0;
}

std::vector<BrokenPoint> select_broken(const RateCurve& curve, const FitOptions& opts, MaskReport& mask) {
    curve.validate();
    const auto sigma = noise_level(curve, opts);
    std::vector<BrokenPoint> pts;
    mask = {};
    for (const auto& s : curve.samples) {
        if (!(s.t > 0.0)) {
            ++mask.wrong_phase;
        } else if (s.ratio < opts.mask.gap) {
            ++mask.gap;
        } else if (s.ratio > 1.0 - opts.mask.saturation) {
            ++mask.saturated;
        } else {
            const double sd = ratio_sigma(s.ratio, sigma);
            pts.push_back({s.t, s.ratio, 1.0 / (sd * sd)});
        }
    }
    mask.used = pts.size();
    return pts;
}

void require_enough(const MaskReport& mask) {
    if (mask.used == 0) {
        throw AllMasked("every broken-phase point lies in the gap or at ratio ~ 1 (" +
                        std::to_string(mask.gap) + " gap, " + std::to_string(mask.saturated) +
                        " saturated, " + std::to_string(mask.wrong_phase) + " outside the broken phase)");
    }
    if (mask.used < kMinPoints) {
        throw InsufficientData("only " + std::to_string(mask.used) + " usable points; need " +
                               std::to_string(kMinPoints));
    }
}

// Rate model sqrt(1 - x0^2 t^(2 beta)) and its partial derivatives.
struct RateModel {
    double value;
    double d_beta;
    double d_x0;
};

RateModel rate_model(double t, double beta, double x0) {
    const double tp = std::pow(t, 2.0 * beta);
    const double u = x0 * x0 * tp;
    if (!(u < 1.0)) return {0.0, 0.0, 0.0};
    const double r = std::sqrt(1.0 - u);
    return {r, -u * std::log(t) / r, -x0 * tp / r};
}

std::map<std::string, double> stderr_map(const lsq::Result& lm, Eigen::Index n,
                                         std::initializer_list<std::string> names) {
    std::map<std::string, double> out;
    if (!lm.converged) return out;
    const auto cov = lsq::covariance(lm, n);
    if (cov.size() == 0) return out;
    Eigen::Index i = 0;
    for (const auto& name : names) {
        out[name] = std::sqrt(std::max(0.0, cov(i, i)));
        ++i;
    }
    return out;
}

nlohmann::json mask_json(const MaskReport& m) {
    return {{"gap", m.gap}, {"saturated", m.saturated}, {"used", m.used}, {"wrong_phase", m.wrong_phase}};
}

nlohmann::json map_json(const std::map<std::string, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

LinearizedData linearize_broken(const RateCurve& curve, const FitOptions& opts) {
    LinearizedData out;
    const auto pts = select_broken(curve, opts, out.mask);
    require_enough(out.mask);
    const auto sigma = noise_level(curve, opts);
    out.points.reserve(pts.size());
    for (const auto& p : pts) {
        const double deficit = (1.0 - p.ratio) * (1.0 + p.ratio);
        const double sd = ratio_sigma(p.ratio, sigma);
        const double w = deficit / (2.0 * p.ratio * sd);
        out.points.push_back({std::log(p.t), std::log(deficit), w * w});
    }
    return out;
}

LineFit weighted_line_fit(std::span<const LinearPoint> points) {
    if (points.size() < 2) throw InsufficientData("a line fit needs at least two points");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (const auto& p : points) {
        sw += p.weight;
        sx += p.weight * p.log_t;
        sy += p.weight * p.log_deficit;
    }
    if (!(sw > 0.0)) throw InsufficientData("line fit weights sum to zero");
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = p.log_t - mx;
        const double dy = p.log_deficit - my;
        sxx += p.weight * dx * dx;
        sxy += p.weight * dx * dy;
        syy += p.weight * dy * dy;
    }
    if (!(sxx > 0.0)) throw InsufficientData("all points share the same temperature");

    LineFit fit;
    fit.n = points.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (const auto& p : points) {
        const double e = p.log_deficit - (fit.intercept + fit.slope * p.log_t);
        fit.rss += p.weight * e * e;
    }
    if (fit.n > 2) {
        const double s2 = fit.rss / static_cast<double>(fit.n - 2);
        fit.slope_stderr = std::sqrt(s2 / sxx);
        fit.intercept_stderr = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
    }
    if (syy > 0.0) fit.r_squared = 1.0 - fit.rss / syy;
    return fit;
}

FitResult fit_broken(const RateCurve& curve, std::optional<FitSeed> seed, const FitOptions& opts) {
    MaskReport mask;
    const auto pts = select_broken(curve, opts, mask);
    if (mask.used == 0 && mask.gap > 0 && mask.saturated == 0) {
        throw DegenerateJacobian("all broken-phase data lie on the zero plateau; the model is locally constant");
    }
    require_enough(mask);

    if (!seed) {
        const auto line = weighted_line_fit(linearize_broken(curve, opts).points);
        seed = FitSeed{std::clamp(0.5 * line.slope, 1e-3, 1.0), std::exp(0.5 * line.intercept)};
    }

    const auto n = static_cast<Eigen::Index>(pts.size());
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        r.resize(n);
        jac.resize(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& pt = pts[static_cast<std::size_t>(i)];
            const double sw = std::sqrt(pt.weight);
            const auto m = rate_model(pt.t, p(0), p(1));
            r(i) = sw * (m.value - pt.ratio);
            jac(i, 0) = sw * m.d_beta;
            jac(i, 1) = sw * m.d_x0;
        }
    };

    Eigen::VectorXd start(2);
    start << seed->beta, seed->x0;
    const auto lm = lsq::levenberg_marquardt(residuals, start, opts.lm);

    FitResult fit;
    fit.params = {{"beta", lm.params(0)}, {"x0", std::abs(lm.params(1))}};
    fit.residual_ss = lm.rss;
    fit.initial_residual_ss = lm.initial_rss;
    fit.dof = static_cast<int>(n) - 2;
    fit.converged = lm.converged;
    fit.iterations = lm.iterations;
    fit.param_stderr = stderr_map(lm, n, {"beta", "x0"});
    fit.mask = mask;
    return fit;
}

std::string label_for_beta(double beta) {
    if (beta == 0.5) return "mean field";
    if (beta == 0.125) return "Ising model";
    if (beta == 0.25) return "1/4";
    return format_number(beta);
}

CandidateSet CandidateSet::typical() {
    return {{{label_for_beta(0.5), 0.5}, {label_for_beta(0.25), 0.25}, {label_for_beta(0.125), 0.125}}};
}

CandidateSet CandidateSet::from_betas(std::span<const double> betas) {
    CandidateSet set;
    for (double b : betas) set.candidates.push_back({label_for_beta(b), b});
    set.validate();
    return set;
}

void CandidateSet::validate() const {
    if (candidates.empty()) throw DomainError("candidate set is empty");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double b = candidates[i].beta;
        if (!(std::isfinite(b) && b > 0.0 && b <= 1.0)) throw DomainError("candidate exponents must lie in (0, 1]");
        for (std::size_t j = 0; j < i; ++j) {
            if (candidates[j].beta == b) throw DomainError("candidate exponents must be distinct");
        }
    }
}

const CandidateScore& Classification::best_score() const {
    for (const auto& s : scores) {
        if (s.label == best) return s;
    }
    throw Error("classification has no best candidate");
}

Classification classify(const RateCurve& curve, const CandidateSet& candidates, const FitOptions& opts) {
    candidates.validate();
    const auto lin = linearize_broken(curve, opts);
    MaskReport mask;
    const auto pts = select_broken(curve, opts, mask);
    const auto n = static_cast<Eigen::Index>(pts.size());

    Classification out;
    std::exception_ptr first_error;
    for (const auto& cand : candidates.candidates) {
        CandidateScore score;
        score.label = cand.label;
        score.beta = cand.beta;
        try {
            // Seed x0 from the linearized intercept with the slope pinned to 2 beta.
            double sw = 0.0, s = 0.0;
            for (const auto& p : lin.points) {
                sw += p.weight;
                s += p.weight * (p.log_deficit - 2.0 * cand.beta * p.log_t);
            }
            Eigen::VectorXd start(1);
            start << std::exp(0.5 * s / sw);

            auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
                r.resize(n);
                jac.resize(n, 1);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto& pt = pts[static_cast<std::size_t>(i)];
                    const double w = std::sqrt(pt.weight);
                    const auto m = rate_model(pt.t, cand.beta, p(0));
                    r(i) = w * (m.value - pt.ratio);
                    jac(i, 0) = w * m.d_x0;
                }
            };
            const auto lm = lsq::levenberg_marquardt(residuals, start, opts.lm);
            score.x0 = std::abs(lm.params(0));
            score.residual_ss = lm.rss;
            score.converged = lm.converged;
            const double nd = static_cast<double>(n);
            const double per_point = std::max(lm.rss / nd, std::numeric_limits<double>::min());
            score.aic = nd * std::log(per_point) + 2.0;
        } catch (const Error& e) {
            score.error = e.what();
            score.aic = std::numeric_limits<double>::infinity();
            if (!first_error) first_error = std::current_exception();
        }
        out.scores.push_back(score);
    }

    std::vector<const CandidateScore*> ok;
    for (const auto& s : out.scores) {
        if (s.error.empty()) ok.push_back(&s);
    }
    if (ok.empty()) std::rethrow_exception(first_error);
    std::stable_sort(ok.begin(), ok.end(),
                     [](const CandidateScore* a, const CandidateScore* b) { return a->aic < b->aic; });
    out.best = ok.front()->label;
    if (ok.size() > 1) {
        out.margin = ok[1]->aic - ok[0]->aic;
        if (ok[0]->residual_ss > 0.0) {
            out.residual_ratio = ok[1]->residual_ss / ok[0]->residual_ss;
        } else {
            out.residual_ratio = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

SymmetricFit fit_symmetric(const RateCurve& curve, CorrelationKind kind, double alpha, const FitOptions& opts) {
    curve.validate();
    if (!(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const auto sigma = noise_level(curve, opts);
    const double scale = alpha / (6.0 * std::numbers::pi);

    // y = 1 - 1/r = Pi, with sigma_y = sigma_r / r^2.
    struct Point {
        double mag, y, weight;
    };
    std::vector<Point> pts;
    for (const auto& s : curve.samples) {
        if (!(s.t < 0.0)) continue;
        if (!(s.ratio > 0.0)) throw DomainError("symmetric-phase rates must be positive");
        const double sd = ratio_sigma(s.ratio, sigma) / (s.ratio * s.ratio);
        pts.push_back({-s.t, 1.0 - 1.0 / s.ratio, 1.0 / (sd * sd)});
    }
    if (pts.size() < kMinPoints) {
        throw InsufficientData("only " + std::to_string(pts.size()) + " symmetric-phase points; need " +
                               std::to_string(kMinPoints));
    }

    SymmetricFit fit;
    fit.kind = kind;
    fit.n = pts.size();
    const auto n = static_cast<Eigen::Index>(pts.size());

    if (kind == CorrelationKind::Exponential) {
        // Pi = scale * delta / |t|: weighted regression through the origin in 1/|t|.
        double suu = 0.0, suy = 0.0;
        for (const auto& p : pts) {
            const double u = 1.0 / p.mag;
            suu += p.weight * u * u;
            suy += p.weight * u * p.y;
        }
        const double slope = suy / suu;
        for (const auto& p : pts) {
            const double e = p.y - slope / p.mag;
            fit.residual_ss += p.weight * e * e;
        }
        fit.params["delta"] = slope / scale;
        fit.param_stderr["delta"] = std::sqrt(fit.residual_ss / static_cast<double>(n - 1) / suu) / scale;
        fit.converged = true;
        return fit;
    }

    // Power law: Pi = scale * ln(1 + a |t|^-nu), fitted in (ln a, nu).
    auto evaluate = [&](double log_a, double nu, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        r.resize(n);
        if (jac) jac->resize(n, 2);
        const double a = std::exp(log_a);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& p = pts[static_cast<std::size_t>(i)];
            const double w = std::sqrt(p.weight);
            const double g = a * std::pow(p.mag, -nu);
            r(i) = w * (scale * std::log1p(g) - p.y);
            if (jac) {
                const double dg = scale / (1.0 + g);
                (*jac)(i, 0) = w * dg * g;
                (*jac)(i, 1) = -w * dg * g * std::log(p.mag);
            }
        }
    };

    // Coarse grid for the starting point.
    double best_rss = std::numeric_limits<double>::infinity();
    Eigen::VectorXd start(2);
    start << 0.0, 1.0;
    Eigen::VectorXd r;
    for (double log_a = -6.0; log_a <= 6.0; log_a += 0.5) {
        for (double nu = 0.25; nu <= 3.0; nu += 0.25) {
            evaluate(log_a, nu, r, nullptr);
            const double rss = r.squaredNorm();
            if (rss < best_rss) {
                best_rss = rss;
                start << log_a, nu;
            }
        }
    }
    auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& res, Eigen::MatrixXd& jac) {
        evaluate(p(0), p(1), res, &jac);
    };
    const auto lm = lsq::levenberg_marquardt(residuals, start, opts.lm);
    const double a = std::exp(lm.params(0));
    fit.params = {{"a_over_xi0", a}, {"nu", lm.params(1)}};
    fit.residual_ss = lm.rss;
    fit.converged = lm.converged;
    fit.iterations = lm.iterations;
    auto se = stderr_map(lm, n, {"log_a", "nu"});
    if (!se.empty()) fit.param_stderr = {{"a_over_xi0", a * se["log_a"]}, {"nu", se["nu"]}};
    return fit;
}

TcScan tc_scan(std::span<const AbsoluteSample> samples, std::span<const double> tc_grid, const FitOptions& opts) {
    if (tc_grid.empty()) throw DomainError("Tc grid is empty");
    TcScan scan;
    bool any = false;
    for (double tc : tc_grid) {
        if (!(std::isfinite(tc) && tc > 0.0)) throw DomainError("Tc candidates must be positive");
        TcProfilePoint point;
        point.tc = tc;
        RateCurve curve;
        for (const auto& s : samples) {
            curve.samples.push_back({ReducedTemperature::from_absolute(s.temperature, tc).value(), s.ratio});
        }
        try {
            const auto lin = linearize_broken(curve, opts);
            const auto line = weighted_line_fit(lin.points);
            point.used = lin.mask.used;
            point.r_squared = line.r_squared;
            point.beta = 0.5 * line.slope;
        } catch (const InsufficientData&) {
        }
        if (point.r_squared && (!any || *point.r_squared > scan.best_r_squared)) {
            any = true;
            scan.best_tc = tc;
            scan.best_r_squared = *point.r_squared;
        }
        scan.profile.push_back(point);
    }
    if (!any) throw InsufficientData("no candidate Tc yields a usable broken-phase regression");
    return scan;
}

std::string to_json(const FitResult& fit) {
    const nlohmann::json j = {{"converged", fit.converged},
                              {"dof", fit.dof},
                              {"initial_residual_ss", fit.initial_residual_ss},
                              {"iterations", fit.iterations},
                              {"mask", mask_json(fit.mask)},
                              {"param_stderr", map_json(fit.param_stderr)},
                              {"params", map_json(fit.params)},
                              {"residual_ss", fit.residual_ss}};
    return j.dump(2) + "\n";
}

std::string to_json(const Classification& cls) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : cls.scores) {
        nlohmann::json e = {{"aic", s.error.empty() ? nlohmann::json(s.aic) : nlohmann::json(nullptr)},
                            {"beta", s.beta},
                            {"converged", s.converged},
                            {"label", s.label},
                            {"residual_ss", s.residual_ss},
                            {"x0", s.x0}};
        if (!s.error.empty()) e["error"] = s.error;
        scores.push_back(e);
    }
    const auto ratio = cls.residual_ratio && std::isfinite(*cls.residual_ratio) ? cls.residual_ratio : std::nullopt;
    const nlohmann::json j = {{"best", cls.best},
                              {"margin", optional_json(cls.margin)},
                              {"residual_ratio", optional_json(ratio)},
                              {"scores", scores}};
    return j.dump(2) + "\n";
}

std::string to_json(const SymmetricFit& fit) {
    const nlohmann::json j = {{"converged", fit.converged},
                              {"iterations", fit.iterations},
                              {"law", fit.kind == CorrelationKind::Exponential ? "exponential" : "power"},
                              {"n", fit.n},
                              {"param_stderr", map_json(fit.param_stderr)},
                              {"params", map_json(fit.params)},
                              {"residual_ss", fit.residual_ss}};
    return j.dump(2) + "\n";
}

std::string to_json(const TcScan& scan) {
    nlohmann::json profile = nlohmann::json::array();
    for (const auto& p : scan.profile) {
        profile.push_back({{"beta", optional_json(p.beta)},
                           {"r_squared", optional_json(p.r_squared)},
                           {"tc", p.tc},
                           {"used", p.used}});
    }
    const nlohmann::json j = {{"best_r_squared", scan.best_r_squared}, {"best_tc", scan.best_tc}, {"profile", profile}};
    return j.dump(2) + "\n";
}

}  // namespace purcell::estimate
