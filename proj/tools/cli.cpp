#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "purcell/curve_io.hpp"
#include "purcell/errors.hpp"
#include "purcell/estimator.hpp"
#include "purcell/number_format.hpp"
#include "purcell/physics.hpp"
#include "purcell/spectral.hpp"
#include "purcell/sweep.hpp"

namespace purcell::cli {

namespace {

struct RunConfig {
    // shared
    std::string out = "-";
    std::string format = "csv";
    double alpha = 1.0 / 137.0;
    std::string law = "exponential";

    // simulate
    std::string preset;
    double beta = 0.5;
    double x0 = 1.0;
    std::string grid = "0.01:0.99:99";
    std::vector<double> points;
    double delta = 10.0;
    double a_over_xi0 = 1.0;
    double nu = 1.0;
    double sigma = 0.0;
    bool sigma_given = false;
    std::uint64_t seed = 0;
    bool floor_at_zero = true;

    // dos
    double x = 0.5;
    std::string omega_grid = "0:2:201";
    std::vector<double> omega;

    // oracle-check
    std::vector<double> x_list{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 1.2, 1.5};
    std::vector<double> etas{0.08, 0.04, 0.02, 0.01};
    int order = 2;
    double k_max = 50.0;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
    double tail_tol = 1e-3;
    double tolerance = 1e-3;

    // fit
    std::string input = "-";
    bool classify = false;
    std::vector<double> candidates{0.5, 0.25, 0.125};
    std::string phase = "auto";
    std::string tc_grid;
    int max_iterations = 200;
};

class UsageError : public Error {
public:
    using Error::Error;
};

struct GridSpec {
    double first;
    double last;
    std::size_t count;
};

GridSpec parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("grid '" + text + "' must look like first:last:count");
    const double count = parse_number(parts[2]);
    if (!(count >= 1.0) || count != std::floor(count) || count > 1e7) {
        throw UsageError("grid count in '" + text + "' must be a positive integer");
    }
    return {parse_number(parts[0]), parse_number(parts[1]), static_cast<std::size_t>(count)};
}

CorrelationKind parse_law(const std::string& name) {
    if (name == "exponential" || name == "exp") return CorrelationKind::Exponential;
    if (name == "power" || name == "power-law") return CorrelationKind::PowerLaw;
    throw UsageError("unknown correlation law '" + name + "' (expected exponential or power)");
}

// Config file keys, one setter each. Values are type-checked by nlohmann.
using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <class T>
Setter field(T RunConfig::*member) {
    return [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); };
}

const std::map<std::string, Setter>& config_fields() {
    static const std::map<std::string, Setter> fields = {
        {"out", field(&RunConfig::out)},
        {"format", field(&RunConfig::format)},
        {"alpha", field(&RunConfig::alpha)},
        {"law", field(&RunConfig::law)},
        {"preset", field(&RunConfig::preset)},
        {"beta", field(&RunConfig::beta)},
        {"x0", field(&RunConfig::x0)},
        {"grid", field(&RunConfig::grid)},
        {"points", field(&RunConfig::points)},
        {"delta", field(&RunConfig::delta)},
        {"a_over_xi0", field(&RunConfig::a_over_xi0)},
        {"nu", field(&RunConfig::nu)},
        {"sigma", [](RunConfig& c, const nlohmann::json& v) {
             c.sigma = v.get<double>();
             c.sigma_given = true;
         }},
        {"seed", field(&RunConfig::seed)},
        {"floor_at_zero", field(&RunConfig::floor_at_zero)},
        {"x", field(&RunConfig::x)},
        {"omega_grid", field(&RunConfig::omega_grid)},
        {"omega", field(&RunConfig::omega)},
        {"x_list", field(&RunConfig::x_list)},
        {"etas", field(&RunConfig::etas)},
        {"order", field(&RunConfig::order)},
        {"k_max", field(&RunConfig::k_max)},
        {"rel_tol", field(&RunConfig::rel_tol)},
        {"max_subdivisions", field(&RunConfig::max_subdivisions)},
        {"tail_tol", field(&RunConfig::tail_tol)},
        {"tolerance", field(&RunConfig::tolerance)},
        {"input", field(&RunConfig::input)},
        {"classify", field(&RunConfig::classify)},
        {"candidates", field(&RunConfig::candidates)},
        {"phase", field(&RunConfig::phase)},
        {"tc_grid", field(&RunConfig::tc_grid)},
        {"max_iterations", field(&RunConfig::max_iterations)},
    };
    return fields;
}

void load_config(const std::string& path, RunConfig& cfg) {
    std::ifstream file(path);
    if (!file) throw UsageError("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(file);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
    const auto& fields = config_fields();
    for (const auto& [key, value] : doc.items()) {
        const auto it = fields.find(key);
        if (it == fields.end()) throw UsageError("unknown config key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
}

void apply_preset(const std::string& name, RunConfig& cfg) {
    if (name.empty()) return;
    if (name == "fig2") {
        cfg.x0 = 1.0;
        cfg.grid = "0.01:0.99:99";
    } else if (name == "fig4") {
        cfg.beta = 0.5;
        cfg.x0 = 2.0;
        cfg.law = "exponential";
        cfg.delta = 10.0;
        cfg.alpha = 1.0 / 137.0;
        cfg.grid = "-0.5:0.5:1001";
    } else {
        throw UsageError("unknown preset '" + name + "' (expected fig2 or fig4)");
    }
}

// Value of `--name VALUE` or `--name=VALUE` ahead of full parsing.
std::string prescan(const std::vector<std::string>& args, const std::string& name) {
    std::string value;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == name && i + 1 < args.size()) value = args[i + 1];
        if (args[i].starts_with(name + "=")) value = args[i].substr(name.size() + 1);
    }
    return value;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }
    void finish() {
        os_->flush();
        if (!*os_) throw Error("failed to write output");
    }

private:
    std::ofstream file_;
    std::ostream* os_;
};

PhaseScenario scenario_from(const RunConfig& cfg) {
    PhaseScenario s;
    s.broken.x0 = cfg.x0;
    s.broken.beta = cfg.beta;
    s.symmetric = parse_law(cfg.law) == CorrelationKind::Exponential
                      ? SymmetricPhaseLaw::exponential(cfg.delta)
                      : SymmetricPhaseLaw::power_law(cfg.a_over_xi0, cfg.nu);
    s.constants.alpha = cfg.alpha;
    // Rates are ratios; the emitter only fixes units and does not enter them.
    s.emitter = {2.4e15, 1e-29};
    s.validate();
    return s;
}

std::string describe(const PhaseScenario& s, const std::string& preset) {
    std::string d = "broken: x0=" + format_number(s.broken.x0) + " beta=" + format_number(s.broken.beta);
    if (s.symmetric.kind == CorrelationKind::Exponential) {
        d += "; symmetric: exponential delta=" + format_number(s.symmetric.delta);
    } else {
        d += "; symmetric: power a_over_xi0=" + format_number(s.symmetric.a_over_xi0) +
             " nu=" + format_number(s.symmetric.nu);
    }
    d += "; alpha=" + format_number(s.constants.alpha);
    if (preset == "fig4") d += "; x0=2 is a chosen value that exposes the zero-emission plateau";
    if (preset == "fig2") d += "; x0=1 is a chosen value";
    return d;
}

RateCurve simulate_curve(const RunConfig& cfg, const PhaseScenario& scenario, std::ostream& err) {
    const double exclusion = pole_exclusion_radius(scenario.symmetric, scenario.constants.alpha);
    TemperatureGrid grid;
    if (!cfg.points.empty()) {
        for (double t : cfg.points) {
            if (t == 0.0) throw CriticalPoint();
        }
        grid = TemperatureGrid(cfg.points);
    } else {
        const auto g = parse_grid(cfg.grid);
        grid = TemperatureGrid::linspace(g.first, g.last, g.count, exclusion);
    }
    const bool broken_only = std::all_of(grid.points().begin(), grid.points().end(),
                                         [](double t) { return t > 0.0; });
    RateCurve curve = broken_only ? sweep_broken(grid, scenario.broken) : sweep_full(grid, scenario);
    curve.metadata.scenario = describe(scenario, cfg.preset);
    if (cfg.sigma > 0.0) {
        curve = add_noise(curve, {cfg.sigma, cfg.seed, cfg.floor_at_zero});
    }

    std::size_t broken = 0;
    for (const auto& s : curve.samples) broken += s.t > 0.0 ? 1 : 0;
    err << "points: " << curve.samples.size() << " (broken " << broken << ", symmetric "
        << curve.samples.size() - broken << ")\n";
    const auto edge = find_gap_edge(curve);
    const auto analytic = gap_onset(scenario.broken);
    err << "gap edge: " << (edge ? "t = " + format_number(*edge) : std::string("none on grid"))
        << " (analytic " << (analytic ? format_number(*analytic) : std::string("none")) << ")\n";
    err << "pole: |t*| = " << format_number(pole_location(scenario.symmetric, scenario.constants.alpha))
        << ", excluded |t| < " << format_number(exclusion) << "\n";
    return curve;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto format = parse_format(cfg.format);
    if (cfg.preset == "fig2") {
        if (cfg.out.empty() || cfg.out == "-") throw UsageError("--preset fig2 writes three files; pass --out DIR");
        std::filesystem::create_directories(cfg.out);
        for (double beta : {0.5, 0.25, 0.125}) {
            RunConfig c = cfg;
            c.beta = beta;
            const auto scenario = scenario_from(c);
            const auto curve = simulate_curve(c, scenario, err);
            const auto path = std::filesystem::path(cfg.out) /
                              ("fig2_beta_" + format_number(beta) + (format == CurveFormat::Csv ? ".csv" : ".json"));
            Output o(path.string(), out);
            export_curve(o.stream(), curve, format);
            o.finish();
        }
        return kOk;
    }
    const auto scenario = scenario_from(cfg);
    const auto curve = simulate_curve(cfg, scenario, err);
    Output o(cfg.out, out);
    export_curve(o.stream(), curve, format);
    o.finish();
    return kOk;
}

int cmd_dos(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> omegas = cfg.omega;
    if (omegas.empty()) {
        const auto g = parse_grid(cfg.omega_grid);
        for (std::size_t i = 0; i < g.count; ++i) {
            omegas.push_back(g.count == 1 ? g.first
                                          : std::lerp(g.first, g.last, static_cast<double>(i) / static_cast<double>(g.count - 1)));
        }
    }
    const auto rows = spectral::dos_curve(cfg.x, omegas);
    Output o(cfg.out, out);
    spectral::write_dos_csv(o.stream(), rows);
    o.finish();
    return kOk;
}

int cmd_oracle_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    spectral::EtaLadder ladder{cfg.etas, cfg.order};
    spectral::QuadratureConfig quad{cfg.k_max, cfg.rel_tol, cfg.max_subdivisions, cfg.tail_tol};
    ladder.validate();
    quad.validate();
    const auto report = spectral::oracle_check(cfg.x_list, ladder, quad, cfg.tolerance);
    Output o(cfg.out, out);
    spectral::write_oracle_csv(o.stream(), report);
    o.finish();
    const bool pass = report.all_within(0.9);
    std::size_t flagged = 0;
    for (const auto& r : report.rows) flagged += r.flagged ? 1 : 0;
    err << "oracle-check: " << report.rows.size() << " rows, " << flagged << " above tolerance "
        << format_number(cfg.tolerance) << "; " << (pass ? "PASS" : "FAIL") << " for x <= 0.9\n";
    return pass ? kOk : kQuadrature;
}

RateCurve read_input(const std::string& input, std::istream& in) {
    if (input.empty() || input == "-") return import_curve(in);
    std::ifstream file(input, std::ios::binary);
    if (!file) throw UsageError("cannot open input '" + input + "'");
    return import_curve(file);
}

int cmd_fit(const RunConfig& cfg, std::istream& in, std::ostream& out) {
    const auto curve = read_input(cfg.input, in);
    estimate::FitOptions opts;
    if (cfg.sigma_given) opts.sigma_rel = cfg.sigma;
    if (cfg.max_iterations < 0) throw UsageError("--max-iterations must be >= 0");
    opts.lm.max_iterations = cfg.max_iterations;

    std::string json;
    bool converged = true;
    if (!cfg.tc_grid.empty()) {
        const auto g = parse_grid(cfg.tc_grid);
        std::vector<double> tcs;
        for (std::size_t i = 0; i < g.count; ++i) {
            tcs.push_back(g.count == 1 ? g.first
                                       : std::lerp(g.first, g.last, static_cast<double>(i) / static_cast<double>(g.count - 1)));
        }
        std::vector<estimate::AbsoluteSample> samples;
        for (const auto& s : curve.samples) samples.push_back({s.t, s.ratio});
        json = estimate::to_json(estimate::tc_scan(samples, tcs, opts));
    } else {
        std::string phase = cfg.phase;
        if (phase == "auto") {
            const bool all_symmetric = !curve.samples.empty() &&
                                       std::all_of(curve.samples.begin(), curve.samples.end(),
                                                   [](const RateSample& s) { return s.t < 0.0; });
            phase = all_symmetric ? "symmetric" : "broken";
        }
        if (phase == "symmetric") {
            const auto fit = estimate::fit_symmetric(curve, parse_law(cfg.law), cfg.alpha, opts);
            converged = fit.converged;
            json = estimate::to_json(fit);
        } else if (phase != "broken") {
            throw UsageError("unknown phase '" + phase + "' (expected auto, broken or symmetric)");
        } else if (cfg.classify) {
            const auto cls = estimate::classify(curve, estimate::CandidateSet::from_betas(cfg.candidates), opts);
            converged = cls.best_score().converged;
            json = estimate::to_json(cls);
        } else {
            const auto fit = estimate::fit_broken(curve, std::nullopt, opts);
            converged = fit.converged;
            json = estimate::to_json(fit);
        }
    }
    Output o(cfg.out, out);
    o.stream() << json;
    o.finish();
    return converged ? kOk : kConvergence;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Purcell-effect rates across a second-order phase transition"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "purcell 1.0.0");
    app.add_option("--config", "JSON config file; flags override its values");

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", "JSON config file; flags override its values");
    };

    auto* simulate = app.add_subcommand("simulate", "Sweep Gamma/Gamma0 over reduced temperature");
    add_config(simulate);
    simulate->add_option("--preset", cfg.preset, "Scenario preset: fig2 (three exponents) or fig4 (both phases)");
    simulate->add_option("--beta", cfg.beta, "Critical exponent of the photon mass law");
    simulate->add_option("--x0", cfg.x0, "Mass amplitude M0 c^2 / (hbar omega0)");
    simulate->add_option("--grid", cfg.grid, "Reduced-temperature grid first:last:count");
    simulate->add_option("--points", cfg.points, "Explicit reduced temperatures (comma separated)")->delimiter(',');
    simulate->add_option("--law", cfg.law, "Correlation-length law: exponential or power");
    simulate->add_option("--delta", cfg.delta, "Exponential law: xi = xi0 exp(delta/|t|)");
    simulate->add_option("--a-over-xi0", cfg.a_over_xi0, "Power law amplitude A/xi0");
    simulate->add_option("--nu", cfg.nu, "Power law exponent nu");
    simulate->add_option("--alpha", cfg.alpha, "Fine-structure constant");
    simulate->add_option("--sigma", cfg.sigma, "Relative Gaussian noise level");
    simulate->add_option("--seed", cfg.seed, "Noise generator seed");
    simulate->add_flag("--no-floor{false}", cfg.floor_at_zero, "Allow noisy rates below zero");
    simulate->add_option("--format", cfg.format, "Output format: csv or json");
    simulate->add_option("--out", cfg.out, "Output path ('-' for stdout; a directory for --preset fig2)");

    auto* dos = app.add_subcommand("dos", "Photon density of states table");
    add_config(dos);
    dos->add_option("--x", cfg.x, "Photon mass ratio x");
    dos->add_option("--omega-grid", cfg.omega_grid, "Frequency grid first:last:count (units of omega0)");
    dos->add_option("--omega", cfg.omega, "Explicit frequencies (comma separated)")->delimiter(',');
    dos->add_option("--out", cfg.out, "Output path ('-' for stdout)");

    auto* oracle = app.add_subcommand("oracle-check", "Compare closed-form rates with spectral quadrature");
    add_config(oracle);
    oracle->add_option("--x-list", cfg.x_list, "Mass ratios to check (comma separated)")->delimiter(',');
    oracle->add_option("--etas", cfg.etas, "Decreasing broadening ladder (comma separated)")->delimiter(',');
    oracle->add_option("--order", cfg.order, "Polynomial order of the eta extrapolation");
    oracle->add_option("--k-max", cfg.k_max, "Wave-number cutoff in units of omega0/c");
    oracle->add_option("--rel-tol", cfg.rel_tol, "Relative quadrature tolerance");
    oracle->add_option("--max-subdivisions", cfg.max_subdivisions, "Quadrature interval budget");
    oracle->add_option("--tail-tol", cfg.tail_tol, "Largest resonant weight allowed beyond the cutoff");
    oracle->add_option("--tolerance", cfg.tolerance, "Pass threshold on |oracle - closed form|");
    oracle->add_option("--out", cfg.out, "Report path ('-' for stdout)");

    auto* fit = app.add_subcommand("fit", "Estimate exponents from a rate curve");
    add_config(fit);
    fit->add_option("input", cfg.input, "Curve file (CSV or JSON); '-' reads stdin");
    fit->add_flag("--classify", cfg.classify, "Rank candidate exponents instead of a free fit");
    fit->add_option("--candidates", cfg.candidates, "Candidate exponents (comma separated)")->delimiter(',');
    fit->add_option("--phase", cfg.phase, "auto, broken or symmetric");
    fit->add_option("--law", cfg.law, "Symmetric phase law: exponential or power");
    fit->add_option("--alpha", cfg.alpha, "Fine-structure constant");
    auto* fit_sigma = fit->add_option("--sigma", cfg.sigma, "Relative noise level (overrides curve metadata)");
    fit->add_option("--tc-grid", cfg.tc_grid, "Scan Tc over first:last:count; input holds absolute T");
    fit->add_option("--max-iterations", cfg.max_iterations, "Damped least-squares iteration budget");
    fit->add_option("--out", cfg.out, "Output path ('-' for stdout)");

    std::vector<std::string> argv_store{"purcell"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        // Defaults, then preset, then config file; flags are applied by the parse below.
        apply_preset(prescan(args, "--preset"), cfg);
        if (const auto path = prescan(args, "--config"); !path.empty()) {
            load_config(path, cfg);
            apply_preset(cfg.preset, cfg);
            load_config(path, cfg);
        }
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (fit_sigma->count() > 0) cfg.sigma_given = true;
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(cfg, out, err);
        if (dos->parsed()) return cmd_dos(cfg, out);
        if (oracle->parsed()) return cmd_oracle_check(cfg, out, err);
        return cmd_fit(cfg, in, out);
    } catch (const PoleReached& e) {
        err << "error: " << e.what() << "\n";
        return kPole;
    } catch (const CriticalPoint& e) {
        err << "error: " << e.what() << "\n";
        return kPole;
    } catch (const ConvergenceFailure& e) {
        err << "quadrature error: " << e.what() << "\n";
        return kQuadrature;
    } catch (const TailTooFat& e) {
        err << "quadrature error: " << e.what() << "\n";
        return kQuadrature;
    } catch (const IllConditioned& e) {
        err << "quadrature error: " << e.what() << "\n";
        return kQuadrature;
    } catch (const NoConvergence& e) {
        err << "error: " << e.what() << "\n";
        return kConvergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace purcell::cli
