#include "cli.hpp"

#include "she/cycle.hpp"
#include "she/entropy.hpp"
#include "she/errors.hpp"
#include "she/oracle.hpp"
#include "she/raman.hpp"
#include "she/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace she::cli {

namespace {

using report::Cell;
using report::Document;
using report::Table;

const std::vector<double> kSweepEtaNbar0{1.0, 2.0, 5.0, 10.0, 20.0};
const std::vector<double> kSweepNbarNbar0{0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0};
const std::vector<double> kBoundNbar0{1.0, 5.0, 10.0};
const std::vector<int> kSweepKappas{1, 5, 10};

SpinTemperature parse_spin(const std::string& text)
{
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "+inf" || lower == "infinity")
        return SpinTemperature::polarized();
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ValidationError("--lambda-s: expected a number or 'inf', got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(value))
        throw ValidationError("--lambda-s: expected a number or 'inf', got '" + text + "'");
    return SpinTemperature::inverse(value);
}

template <typename T>
std::string join(const std::vector<T>& values)
{
    std::ostringstream s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        s << (i ? " " : "");
        if constexpr (std::is_floating_point_v<T>)
            s << report::format_double(values[i]);
        else
            s << values[i];
    }
    return s.str();
}

std::vector<std::pair<std::string, std::string>> resolved(const RunConfig& c)
{
    auto d = [](double v) { return report::format_double(v); };
    return {
        {"eta", d(c.eta)},
        {"kappa", std::to_string(c.kappa)},
        {"nbar0", d(c.nbar0)},
        {"lambda_s", c.lambda_s},
        {"tail_eps", d(c.tail_eps)},
        {"tmax", d(c.tmax)},
        {"samples", std::to_string(c.samples)},
        {"gamma_s", d(c.gamma_s)},
        {"gamma_h", d(c.gamma_h)},
        {"t_reset", d(c.t_reset)},
        {"t_therm", d(c.t_therm)},
        {"t_extract", d(c.t_extract)},
        {"format", c.format},
        {"workers", std::to_string(c.workers)},
        {"kappas", join(c.kappas)},
        {"nbar0s", join(c.nbar0s)},
        {"eta_min", d(c.eta_min)},
        {"eta_max", d(c.eta_max)},
        {"eta_count", std::to_string(c.eta_count)},
        {"scan_count", std::to_string(c.scan_count)},
        {"refine_tol", d(c.refine_tol)},
        {"ripple", d(c.ripple)},
        {"bound_points", std::to_string(c.bound_points)},
        {"inject_eta_mismatch", d(c.inject_eta_mismatch)},
        {"oracle_samples", std::to_string(c.oracle_samples)},
    };
}

Document make_document(const std::string& command, const RunConfig& cfg)
{
    Document doc;
    doc.command = command;
    doc.config = resolved(cfg);
    return doc;
}

EngineParams engine_params(const RunConfig& cfg)
{
    return make_params(cfg.eta, cfg.kappa, cfg.nbar0, parse_spin(cfg.lambda_s), cfg.tail_eps);
}

TimeScan time_scan(const RunConfig& cfg)
{
    TimeScan scan;
    scan.omega_t_max = cfg.tmax;
    scan.count = cfg.scan_count;
    scan.refine_tol = cfg.refine_tol;
    scan.ripple = cfg.ripple;
    return scan;
}

SweepSpec sweep_spec(const RunConfig& cfg, std::vector<int> kappas, std::vector<double> nbar0s)
{
    SweepSpec spec;
    spec.kappa_values = std::move(kappas);
    spec.nbar0_values = std::move(nbar0s);
    spec.eta_grid = {cfg.eta_min, cfg.eta_max, cfg.eta_count};
    spec.t_scan = time_scan(cfg);
    spec.tail_eps = cfg.tail_eps;
    spec.workers = cfg.workers;
    return spec;
}

double total_variation(std::span<const double> a, std::span<const double> b)
{
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        tv += std::abs(a[i] - b[i]);
    return 0.5 * tv;
}

Table ledger_table()
{
    return Table{"ledgers",
                 {"stage", "work_hbar_nu", "spinlabour_hbar", "heat_hbar_nu", "spintherm_hbar", "w_tilde_v",
                  "w_tilde_s"},
                 {}};
}

void add_ledger(Table& t, const std::string& stage, const WorkLedger& l)
{
    t.add_row({stage, l.work, l.spinlabour, l.heat, l.spintherm, l.w_tilde_v, l.w_tilde_s});
}

} // namespace

void validate(const RunConfig& cfg)
{
    if (!(cfg.eta >= 0.0) || !std::isfinite(cfg.eta))
        throw ValidationError("--eta must be finite and >= 0");
    if (cfg.kappa < 0)
        throw ValidationError("--kappa must be >= 0");
    if (!(cfg.nbar0 >= 0.0) || !std::isfinite(cfg.nbar0))
        throw ValidationError("--nbar0 must be finite and >= 0");
    (void)parse_spin(cfg.lambda_s);
    if (!(cfg.tail_eps > 0.0 && cfg.tail_eps < 1.0))
        throw ValidationError("--tail-eps must lie in (0, 1)");
    if (!(cfg.tmax >= 0.0))
        throw ValidationError("--tmax must be >= 0 (0 selects the automatic window)");
    if (cfg.samples < 2)
        throw ValidationError("--samples must be >= 2");
    if (!(cfg.gamma_s > 0.0) || !(cfg.gamma_h > 0.0))
        throw ValidationError("--gamma-s and --gamma-h must be > 0");
    if (!(cfg.t_reset > 0.0) || !(cfg.t_therm > 0.0))
        throw ValidationError("--t-reset and --t-therm must be > 0");
    if (!(cfg.t_extract >= 0.0))
        throw ValidationError("--t-extract must be >= 0");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ValidationError("--format must be csv or json");
    if (cfg.workers < 1)
        throw ValidationError("--workers must be >= 1");
    if (cfg.scan_count < 3)
        throw ValidationError("--scan-count must be >= 3");
    if (!(cfg.refine_tol > 0.0))
        throw ValidationError("--refine-tol must be > 0");
    if (!(cfg.ripple >= 0.0))
        throw ValidationError("--ripple must be >= 0");
    if (cfg.bound_points < 2)
        throw ValidationError("--bound-points must be >= 2");
    if (cfg.oracle_samples < 2)
        throw ValidationError("--oracle-samples must be >= 2");
}

Document cmd_dynamics(const RunConfig& cfg)
{
    validate(cfg);
    const EngineParams params = engine_params(cfg);
    const RamanModel model(params);

    std::optional<TfResult> tf;
    if (params.kappa >= 1) {
        TimeScan scan = time_scan(cfg);
        scan.omega_t_max = 0.0;
        try {
            tf = find_tf(model, scan);
        } catch (const ComputationError&) {
            if (cfg.tmax <= 0.0)
                throw;
        }
    }
    const double tmax = cfg.tmax > 0.0 ? cfg.tmax : (tf ? 2.0 * tf->t_f : 10.0);
    const double t_final = tf ? tf->t_f : tmax;

    Document doc = make_document("dynamics", cfg);
    const auto initial = model.initial_state();
    const double nbar_i = mean_phonon(initial);
    const double jz_i = spin_z(initial);

    Table series{"series",
                 {"omega_t", "nbar_quanta", "p_up", "p_down", "s_spin_nats", "s_vib_nats", "work_hbar_nu",
                  "spinlabour_hbar"},
                 {}};
    for (int k = 0; k < cfg.samples; ++k) {
        const double t = tmax * k / (cfg.samples - 1);
        const auto st = model.evolve(t);
        const auto [up, down] = spin_populations(st);
        const double nbar = mean_phonon(st);
        series.add_row({t, nbar, up, down, spin_entropy(st), vib_entropy(st), nbar_i - nbar, spin_z(st) - jz_i});
    }

    const auto final_state = model.evolve(t_final);
    const auto p_final = final_state.phonon_marginal();
    const double nbar_f = mean_phonon(final_state);
    const auto matched = thermal_distribution(nbar_f, params.cutoff);
    Table dist{"phonon_distribution", {"m", "p_initial", "p_final", "p_thermal_matched"}, {}};
    const auto p_initial = initial.phonon_marginal();
    for (std::size_t m = 0; m < p_final.size(); ++m)
        dist.add_row({static_cast<long long>(m), p_initial[m], p_final[m], matched.probs[m]});

    doc.summary["n_max"] = params.cutoff.n_max;
    doc.summary["t_final_omega_t"] = t_final;
    doc.summary["t_final_is_first_minimum"] = tf.has_value();
    doc.summary["nbar_final"] = nbar_f;
    doc.summary["work_final_hbar_nu"] = nbar_i - nbar_f;
    doc.summary["p_down_final"] = spin_populations(final_state).second;
    doc.summary["tv_final_vs_matched_thermal"] = total_variation(p_final, matched.probs);
    doc.tables = {std::move(series), std::move(dist)};
    return doc;
}

Document cmd_find_tf(const RunConfig& cfg)
{
    validate(cfg);
    const EngineParams params = engine_params(cfg);
    const RamanModel model(params);
    const auto tf = find_tf(model, time_scan(cfg));
    const auto st = model.evolve(tf.t_f);

    Document doc = make_document("find-tf", cfg);
    Table t{"tf",
            {"eta", "kappa", "nbar0", "t_f_omega_t", "nbar_tf_quanta", "work_hbar_nu", "p_down", "window_omega_t",
             "grid_step_omega_t"},
            {}};
    t.add_row({params.eta, static_cast<long long>(params.kappa), params.nbar0, tf.t_f, tf.nbar_tf,
               model.mean_phonon_at(0.0) - tf.nbar_tf, spin_populations(st).second, tf.window, tf.grid_step});
    doc.tables = {std::move(t)};
    doc.summary["t_f_omega_t"] = tf.t_f;
    doc.summary["nbar_tf"] = tf.nbar_tf;
    return doc;
}

Document cmd_sweep_eta(const RunConfig& cfg)
{
    validate(cfg);
    const auto nbar0s = cfg.nbar0s.empty() ? kSweepEtaNbar0 : cfg.nbar0s;
    const auto spec = sweep_spec(cfg, {cfg.kappa}, nbar0s);
    she::validate(spec);

    RunConfig shown = cfg;
    shown.nbar0s = nbar0s;
    Document doc = make_document("sweep-eta", shown);
    Table curves{"w_eta", {"kappa", "nbar0", "eta", "work_hbar_nu", "t_f_omega_t", "found"}, {}};
    Table optimum{"optimum", {"kappa", "nbar0", "eta_opt", "w_opt_hbar_nu", "t_f_opt_omega_t", "refined"}, {}};
    for (double nbar0 : nbar0s) {
        const auto curve = sweep_eta(cfg.kappa, nbar0, spec);
        for (const auto& p : curve.points)
            curves.add_row({static_cast<long long>(cfg.kappa), nbar0, p.eta, p.work, p.t_f,
                            static_cast<long long>(p.found)});
        optimum.add_row({static_cast<long long>(cfg.kappa), nbar0, curve.eta_opt, curve.w_opt, curve.t_f_opt,
                         static_cast<long long>(curve.refined)});
    }
    doc.tables = {std::move(curves), std::move(optimum)};
    return doc;
}

Document cmd_sweep_nbar(const RunConfig& cfg)
{
    validate(cfg);
    RunConfig shown = cfg;
    shown.kappas = cfg.kappas.empty() ? kSweepKappas : cfg.kappas;
    shown.nbar0s = cfg.nbar0s.empty() ? kSweepNbarNbar0 : cfg.nbar0s;
    const auto spec = sweep_spec(cfg, shown.kappas, shown.nbar0s);
    const auto result = sweep_nbar(spec);

    Document doc = make_document("sweep-nbar", shown);
    Table optimum{"optimum",
                  {"kappa", "nbar0", "eta_opt", "w_opt_hbar_nu", "t_f_opt_omega_t", "bound_w_max_hbar_nu",
                   "bound_violated"},
                  {}};
    Table curves{"w_eta", {"kappa", "nbar0", "eta", "work_hbar_nu", "t_f_omega_t", "found"}, {}};
    long long violations = 0;
    for (const auto& row : result.rows) {
        optimum.add_row({static_cast<long long>(row.kappa), row.nbar0, row.eta_opt, row.w_opt, row.t_f_opt,
                         row.bound_w_max, static_cast<long long>(row.bound_violated)});
        violations += row.bound_violated;
        for (const auto& p : row.curve.points)
            curves.add_row({static_cast<long long>(row.kappa), row.nbar0, p.eta, p.work, p.t_f,
                            static_cast<long long>(p.found)});
    }
    doc.summary["bound_violations"] = violations;
    doc.tables = {std::move(optimum), std::move(curves)};
    return doc;
}

Document cmd_bound(const RunConfig& cfg)
{
    validate(cfg);
    if (cfg.kappa < 1)
        throw ValidationError("bound: --kappa must be >= 1");
    const auto nbar0s = cfg.nbar0s.empty() ? kBoundNbar0 : cfg.nbar0s;
    for (double n : nbar0s)
        if (!(n >= 0.0))
            throw ValidationError("bound: nbar0 values must be >= 0");

    RunConfig shown = cfg;
    shown.nbar0s = nbar0s;
    Document doc = make_document("bound", shown);
    Table lhs{"lhs", {"nbar0", "kappa", "p_down", "lhs_nats"}, {}};
    Table bound{"bound", {"nbar0", "kappa", "p_down_max", "w_max_hbar_nu"}, {}};
    for (double nbar0 : nbar0s) {
        const double upper = std::min(1.0, nbar0 / cfg.kappa);
        for (int i = 0; i < cfg.bound_points; ++i) {
            const double p = upper * i / (cfg.bound_points - 1);
            lhs.add_row({nbar0, static_cast<long long>(cfg.kappa), p, subadd_lhs_thermal(p, nbar0, cfg.kappa)});
        }
        const double p_max = max_pdown_bound(nbar0, cfg.kappa);
        bound.add_row({nbar0, static_cast<long long>(cfg.kappa), p_max, cfg.kappa * p_max});
    }
    doc.tables = {std::move(lhs), std::move(bound)};
    return doc;
}

Document cmd_cycle(const RunConfig& cfg)
{
    validate(cfg);
    CycleConfig config;
    config.params = engine_params(cfg);
    if (cfg.t_extract > 0.0)
        config.t_extract = cfg.t_extract;
    config.t_reset = cfg.t_reset;
    config.t_therm = cfg.t_therm;
    config.gamma_s = cfg.gamma_s;
    config.gamma_h = cfg.gamma_h;
    config.samples_per_stage = cfg.samples;
    config.scan = time_scan(cfg);
    config.scan.omega_t_max = 0.0;
    const auto traj = run_cycle(config);
    const auto balance = balance_report(traj);

    Document doc = make_document("cycle", cfg);
    Table points{"trajectory",
                 {"stage", "t_stage", "nbar_quanta", "p_down", "s_spin_nats", "s_vib_nats", "s_joint_nats",
                  "delta_free_entropy", "free_entropy_slack"},
                 {}};
    for (const auto& p : traj.points)
        points.add_row({std::string(stage_name(p.stage)), p.t, p.nbar, p.p_down, p.s_spin, p.s_vib, p.s_joint,
                        p.delta_f, p.free_entropy_slack});
    Table ledgers = ledger_table();
    add_ledger(ledgers, "extract", traj.ledgers[0]);
    add_ledger(ledgers, "reset", traj.ledgers[1]);
    add_ledger(ledgers, "therm", traj.ledgers[2]);
    add_ledger(ledgers, "cycle", balance.totals);

    doc.summary["t_extract_omega_t"] = traj.t_extract;
    doc.summary["nbar_error"] = traj.nbar_error;
    doc.summary["p_down_end"] = traj.pdown_end;
    doc.summary["p_down_b"] = spin_populations(traj.corners[1]).second;
    doc.summary["reset_spintherm_hbar"] = balance.reset_spintherm;
    doc.summary["therm_heat_hbar_nu"] = balance.therm_heat;
    doc.tables = {std::move(points), std::move(ledgers)};
    return doc;
}

Document cmd_oracle_check(const RunConfig& cfg)
{
    validate(cfg);
    oracle::OracleSuiteOptions options;
    options.eta_offset = cfg.inject_eta_mismatch;
    options.tail_eps = cfg.tail_eps;
    options.time_samples = cfg.oracle_samples;
    const auto results = oracle::run_oracle_suite(options);

    Document doc = make_document("oracle-check", cfg);
    Table t{"comparisons", {"name", "max_deviation", "tolerance", "passed"}, {}};
    bool all = true;
    for (const auto& r : results) {
        t.add_row({r.name, r.max_deviation, r.tolerance, static_cast<long long>(r.passed)});
        all = all && r.passed;
    }
    doc.summary["all_passed"] = all;
    doc.tables = {std::move(t)};
    return doc;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    CLI::App app{"Trapped-ion spin-heat engine: extraction dynamics, sweeps, bounds and full cycles", "she"};
    app.set_config("--config", "", "Plain-text key=value file; command-line flags override it");
    app.fallthrough();
    app.require_subcommand(1);

    app.add_option("--eta", cfg.eta, "Lamb-Dicke parameter")->capture_default_str();
    app.add_option("--kappa", cfg.kappa, "Sideband order (quanta per spin flip)")->capture_default_str();
    app.add_option("--nbar0", cfg.nbar0, "Initial / bath mean phonon number")->capture_default_str();
    app.add_option("--lambda-s", cfg.lambda_s, "Inverse spin temperature, number or 'inf'")->capture_default_str();
    app.add_option("--tail-eps", cfg.tail_eps, "Fock tail-mass tolerance")->capture_default_str();
    app.add_option("--tmax", cfg.tmax, "Time window in Omega*t (0 = automatic)")->capture_default_str();
    app.add_option("--samples", cfg.samples, "Samples per series / cycle stage")->capture_default_str();
    app.add_option("--gamma-s", cfg.gamma_s, "Spin reset rate")->capture_default_str();
    app.add_option("--gamma-h", cfg.gamma_h, "Hot-bath coupling rate")->capture_default_str();
    app.add_option("--t-reset", cfg.t_reset, "Reset duration in units of 1/gamma_s")->capture_default_str();
    app.add_option("--t-therm", cfg.t_therm, "Re-thermalization duration in units of 1/gamma_h")
        ->capture_default_str();
    app.add_option("--t-extract", cfg.t_extract, "Extraction duration in Omega*t (0 = first nbar minimum)")
        ->capture_default_str();
    app.add_option("--out", cfg.out, "Output path, '-' for stdout")->capture_default_str();
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads for sweeps")->capture_default_str();
    app.add_option("--kappas", cfg.kappas, "Sideband orders for sweep-nbar")->delimiter(',');
    app.add_option("--nbar0s", cfg.nbar0s, "nbar0 list for sweeps and bounds")->delimiter(',');
    app.add_option("--eta-min", cfg.eta_min, "Smallest eta of the sweep grid")->capture_default_str();
    app.add_option("--eta-max", cfg.eta_max, "Largest eta of the sweep grid")->capture_default_str();
    app.add_option("--eta-count", cfg.eta_count, "Number of eta grid points")->capture_default_str();
    app.add_option("--scan-count", cfg.scan_count, "Time-scan samples for t_f search")->capture_default_str();
    app.add_option("--refine-tol", cfg.refine_tol, "Relative tolerance of the t_f refinement")
        ->capture_default_str();
    app.add_option("--ripple", cfg.ripple, "Dips of nbar(t) shallower than this (quanta) are not minima")
        ->capture_default_str();
    app.add_option("--bound-points", cfg.bound_points, "P_down samples per bound curve")->capture_default_str();
    app.add_option("--inject-eta-mismatch", cfg.inject_eta_mismatch,
                   "Perturb eta on the dense side of oracle-check (harness sanity)")
        ->capture_default_str();
    app.add_option("--oracle-samples", cfg.oracle_samples, "Time samples per oracle comparison")
        ->capture_default_str();

    app.add_subcommand("dynamics", "Extraction-stage time series and phonon distributions");
    app.add_subcommand("find-tf", "First minimum of nbar(t)");
    app.add_subcommand("sweep-eta", "Work at t_f as a function of eta");
    app.add_subcommand("sweep-nbar", "Optimal eta and work over a (kappa, nbar0) grid with the entropy bound");
    app.add_subcommand("bound", "Sub-additivity left-hand side and maximal P_down");
    app.add_subcommand("cycle", "Full extract -> reset -> re-thermalize cycle");
    app.add_subcommand("oracle-check", "Certify closed forms against dense reference evolutions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e, out, err);
        app.exit(e, out, err);
        return kValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Document doc;
        if (command == "dynamics")
            doc = cmd_dynamics(cfg);
        else if (command == "find-tf")
            doc = cmd_find_tf(cfg);
        else if (command == "sweep-eta")
            doc = cmd_sweep_eta(cfg);
        else if (command == "sweep-nbar")
            doc = cmd_sweep_nbar(cfg);
        else if (command == "bound")
            doc = cmd_bound(cfg);
        else if (command == "cycle")
            doc = cmd_cycle(cfg);
        else
            doc = cmd_oracle_check(cfg);

        const auto format = cfg.format == "json" ? report::Format::Json : report::Format::Csv;
        if (cfg.out == "-") {
            report::write(doc, format, out);
        } else {
            std::ofstream file(cfg.out);
            if (!file)
                throw ComputationError("cannot open output file '" + cfg.out + "'");
            report::write(doc, format, file);
            if (!file)
                throw ComputationError("failed writing output file '" + cfg.out + "'");
        }
        if (command == "oracle-check" && !doc.summary["all_passed"].get<bool>()) {
            err << "oracle-check: at least one comparison exceeded its tolerance\n";
            return kOracleFailure;
        }
        return kSuccess;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

} // namespace she::cli
