// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "she/cycle.hpp"
#include "she/entropy.hpp"
#include "she/fock.hpp"
#include "she/open_system.hpp"
#include "she/oracle.hpp"
#include "she/raman.hpp"
#include "she/sweep.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace she;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body)
{
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.passed)
        ++failures;
    std::printf("criterion %2d  %s  %-34s %s\n", id, v.passed ? "PASS" : "FAIL", title, v.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

struct GridRun {
    EngineParams params;
    std::vector<double> times;
};

std::vector<GridRun> unitary_grid(SpinTemperature spin)
{
    std::vector<GridRun> runs;
    for (double eta : {0.05, 0.4})
        for (int kappa : {1, 5})
            for (double nbar0 : {1.0, 5.0}) {
                GridRun r{make_params(eta, kappa, nbar0, spin), {}};
                const double t_f = find_tf(r.params).t_f;
                for (int i = 0; i < 50; ++i)
                    r.times.push_back(2.0 * t_f * i / 49.0);
                runs.push_back(std::move(r));
            }
    return runs;
}

const std::vector<GridRun>& polarized_grid()
{
    static const auto grid = unitary_grid(SpinTemperature::polarized());
    return grid;
}

double von_neumann(const Eigen::MatrixXcd& rho)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (double p : es.eigenvalues())
        if (p > 1e-300)
            s -= p * std::log(p);
    return s;
}

Verdict dense_equivalence()
{
    const auto start = Clock::now();
    double worst = 0.0;
    for (const auto& run : polarized_grid()) {
        const RamanModel model(run.params);
        const oracle::DensePropagator prop(oracle::build_effective_hamiltonian(run.params));
        const Eigen::VectorXd rho0 = oracle::initial_density(run.params).diagonal().real();
        for (double t : run.times) {
            const auto dense = oracle::populations(prop.evolve_diagonal(rho0, t), run.params.cutoff.n_max, t);
            const auto fast = model.evolve(t);
            for (std::size_t m = 0; m < fast.levels(); ++m) {
                worst = std::max(worst, std::abs(fast.p_up[m] - dense.p_up[m]));
                worst = std::max(worst, std::abs(fast.p_down[m] - dense.p_down[m]));
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-9 && elapsed < 30.0, fmt("max|dP|=%.3e (tol 1e-9)  runtime=%.1fs (limit 30s)", worst, elapsed)};
}

Verdict conservation()
{
    double worst = 0.0;
    for (const auto& run : polarized_grid()) {
        const RamanModel model(run.params);
        const double total0 = model.initial_state().total();
        for (double t : run.times)
            worst = std::max(worst, std::abs(model.evolve(t).total() - total0));
    }
    return {worst < 1e-12, fmt("max drift=%.3e (tol 1e-12)", worst)};
}

Verdict work_spinlabour_lock()
{
    double worst = 0.0;
    for (const auto& run : polarized_grid()) {
        const RamanModel model(run.params);
        const double nbar_initial = mean_phonon(model.initial_state());
        for (double t : run.times) {
            const auto st = model.evolve(t);
            const double residual = nbar_initial - mean_phonon(st) - run.params.kappa * spin_populations(st).second;
            worst = std::max(worst, std::abs(residual));
        }
    }
    return {worst < 1e-10, fmt("max residual=%.3e (tol 1e-10)", worst)};
}

Verdict unitless_work_identity()
{
    double worst = 0.0;
    for (double lambda : {0.0, 0.5, 2.0})
        for (const auto& run : unitary_grid(SpinTemperature::inverse(lambda))) {
            const RamanModel model(run.params);
            const auto initial = model.initial_state();
            for (double t : run.times) {
                const auto l = ledger(initial, model.evolve(t), run.params);
                worst = std::max(worst, std::abs(l.w_tilde_s - l.w_tilde_v));
            }
        }
    return {worst < 1e-12, fmt("max|Ws-Wv|=%.3e (tol 1e-12)", worst)};
}

Verdict subadditivity()
{
    double lowest = std::numeric_limits<double>::infinity();
    std::vector<SpinTemperature> spins{SpinTemperature::polarized(), SpinTemperature::inverse(0.0),
                                       SpinTemperature::inverse(0.5), SpinTemperature::inverse(2.0)};
    for (const auto& spin : spins) {
        const auto grid = spin.is_polarized() ? polarized_grid() : unitary_grid(spin);
        for (const auto& run : grid) {
            const RamanModel model(run.params);
            const auto initial = model.initial_state();
            const double s0 = spin_entropy(initial) + vib_entropy(initial);
            for (double t : run.times) {
                const auto st = model.evolve(t);
                lowest = std::min(lowest, spin_entropy(st) + vib_entropy(st) - s0);
            }
        }
    }
    return {lowest >= -1e-9, fmt("min(dSs+dSv)=%.3e (tol -1e-9)", lowest)};
}

// The entropy entering the free entropy is checked against the von Neumann
// entropy of the dense density matrix at a few times per run.
Verdict free_entropy_saturation()
{
    double worst = 0.0;
    double worst_entropy = 0.0;
    for (double lambda : {0.5, 2.0}) {
        const auto spin = SpinTemperature::inverse(lambda);
        for (const auto& run : unitary_grid(spin)) {
            const RamanModel model(run.params);
            const auto initial = model.initial_state();
            const double lambda_v = std::log1p(1.0 / run.params.nbar0);
            for (double t : run.times) {
                const auto st = model.evolve(t);
                const auto l = ledger(initial, st, run.params);
                const auto acc = free_entropy(st, initial, spin, lambda_v, run.params.kappa);
                worst = std::max(worst, std::abs(lambda * l.w_tilde_s + lambda_v * l.w_tilde_v + acc.delta_f));
            }
            if (run.params.nbar0 > 1.0)
                continue;
            const auto h = oracle::build_effective_hamiltonian(run.params);
            const auto rho0 = oracle::initial_density(run.params);
            const oracle::DensePropagator prop(h);
            for (std::size_t i : {std::size_t{0}, run.times.size() / 3, run.times.size() - 1}) {
                const double t = run.times[i];
                const double s_dense = von_neumann(prop.evolve(rho0, t));
                worst_entropy = std::max(worst_entropy, std::abs(s_dense - joint_entropy(model.evolve(t))));
            }
        }
    }
    return {worst < 1e-9 && worst_entropy < 1e-9,
            fmt("max|sum|=%.3e  max|S-S_dense|=%.3e (tol 1e-9)", worst, worst_entropy)};
}

Verdict dissipative_closed_forms()
{
    // Spin reset against the dense Lindblad integrator, starting from an extraction end state.
    const auto params = make_params(0.4, 1, 1.0);
    const double t_f = find_tf(params).t_f;
    const int n_max = params.cutoff.n_max;
    const auto levels = static_cast<Eigen::Index>(n_max + 1);
    const auto rho_b = oracle::evolve_dense(oracle::build_effective_hamiltonian(params),
                                            oracle::initial_density(params), t_f);
    const auto state_b = RamanModel(params).evolve(t_f);
    Eigen::MatrixXcd raise = Eigen::MatrixXcd::Zero(2 * levels, 2 * levels);
    for (int m = 0; m <= n_max; ++m)
        raise(oracle::index(0, m, n_max), oracle::index(1, m, n_max)) = 1.0;
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2 * levels, 2 * levels);
    const double gamma_s = 0.7;
    double reset_err = 0.0;
    for (double t : {0.5, 2.0, 10.0}) {
        const auto dense = oracle::populations(oracle::evolve_lindblad_dense(rho_b, zero, {{raise, gamma_s}}, t),
                                               n_max, t);
        const auto fast = spin_reset(state_b, {gamma_s, t});
        for (std::size_t m = 0; m < fast.levels(); ++m) {
            reset_err = std::max(reset_err, std::abs(fast.p_up[m] - dense.p_up[m]));
            reset_err = std::max(reset_err, std::abs(fast.p_down[m] - dense.p_down[m]));
        }
    }

    // Re-thermalization: mean relaxation law and convergence to the bath state.
    const double nbar_bath = 5.0;
    const double gamma_h = 1.3;
    const auto start = make_params(0.4, 1, nbar_bath);
    const RamanModel model(start);
    const auto marginal = model.evolve(find_tf(model).t_f).phonon_marginal();
    double n_initial = 0.0;
    for (std::size_t m = 0; m < marginal.size(); ++m)
        n_initial += m * marginal[m];
    double mean_rel = 0.0;
    for (double t : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        const auto p = rethermalize(marginal, {gamma_h, nbar_bath, t});
        double n = 0.0;
        for (std::size_t m = 0; m < p.size(); ++m)
            n += m * p[m];
        const double exact = nbar_bath + (n_initial - nbar_bath) * std::exp(-gamma_h * t);
        mean_rel = std::max(mean_rel, std::abs(n - exact) / exact);
    }
    const auto relaxed = rethermalize(marginal, {gamma_h, nbar_bath, 20.0 / gamma_h});
    const auto bath = thermal_distribution(nbar_bath, start.cutoff);
    double tv = 0.0;
    for (std::size_t m = 0; m < relaxed.size(); ++m)
        tv += 0.5 * std::abs(relaxed[m] - bath.probs[m]);

    const bool ok = reset_err < 1e-8 && mean_rel < 1e-6 && tv < 1e-6;
    return {ok, fmt("reset=%.3e (1e-8) mean_rel=%.3e (1e-6) TV=%.3e (1e-6)", reset_err, mean_rel, tv)};
}

Verdict cycle_closure()
{
    const auto start = Clock::now();
    CycleConfig config;
    config.params = make_params(0.4, 1, 5.0);
    config.t_reset = 10.0;
    config.t_therm = 20.0;
    const auto traj = run_cycle(config);
    const double elapsed = seconds_since(start);

    double therm_lo = std::numeric_limits<double>::infinity();
    double therm_hi = -therm_lo;
    std::vector<double> reset_s;
    for (const auto& p : traj.points) {
        if (p.stage == Stage::Therm) {
            therm_lo = std::min(therm_lo, p.s_spin);
            therm_hi = std::max(therm_hi, p.s_spin);
        } else if (p.stage == Stage::Reset) {
            reset_s.push_back(p.s_spin);
        }
    }
    const double pdown_b = spin_populations(traj.corners[1]).second;
    bool rise_fall = true;
    if (pdown_b > 0.5) {
        const auto peak = std::max_element(reset_s.begin(), reset_s.end());
        rise_fall = peak != reset_s.begin() && peak != reset_s.end() - 1 && *peak > reset_s.front() &&
                    *peak > reset_s.back();
    }
    const bool ok = traj.nbar_error < 1e-3 && traj.pdown_end < 1e-4 && therm_hi - therm_lo < 1e-12 && rise_fall &&
                    elapsed < 10.0;
    auto detail = fmt("|nbar-5|=%.2e Pdown_end=%.2e dS_therm=%.1e runtime=%.2fs", traj.nbar_error, traj.pdown_end,
                      therm_hi - therm_lo, elapsed);
    detail += fmt(" Pdown(tf)=%.3f", pdown_b);
    detail += rise_fall ? " rise-then-fall=yes" : " rise-then-fall=no";
    return {ok, detail};
}

Verdict sweep_shape()
{
    const auto start = Clock::now();
    const SweepResult result = sweep_nbar(SweepSpec{});
    const double elapsed = seconds_since(start);

    auto row = [&](int kappa, double nbar0) -> const SweepRow& {
        for (const auto& r : result.rows)
            if (r.kappa == kappa && r.nbar0 == nbar0)
                return r;
        throw std::runtime_error("missing sweep row");
    };

    const std::vector<double> fig_nbar{1.0, 2.0, 5.0, 10.0, 20.0};
    bool interior = true;
    bool decreasing = true;
    for (std::size_t i = 0; i < fig_nbar.size(); ++i) {
        const auto& curve = row(1, fig_nbar[i]).curve;
        const auto best = std::max_element(curve.points.begin(), curve.points.end(),
                                           [](const EtaPoint& a, const EtaPoint& b) { return a.work < b.work; });
        interior = interior && best != curve.points.begin() && best != curve.points.end() - 1;
        if (i > 0)
            decreasing = decreasing && row(1, fig_nbar[i]).eta_opt < row(1, fig_nbar[i - 1]).eta_opt;
    }

    const auto nbar_grid = SweepSpec{}.nbar0_values;
    bool nondecreasing = true;
    bool below_quantum = true;
    for (std::size_t i = 0; i < nbar_grid.size(); ++i) {
        below_quantum = below_quantum && row(1, nbar_grid[i]).w_opt < 1.0;
        if (i > 0)
            nondecreasing = nondecreasing && row(1, nbar_grid[i]).w_opt >= row(1, nbar_grid[i - 1]).w_opt;
    }
    // Saturation: the gain over the last step of the grid is small next to the gain over the first.
    const double first_gain = row(1, nbar_grid[1]).w_opt - row(1, nbar_grid[0]).w_opt;
    const double last_gain = row(1, nbar_grid.back()).w_opt - row(1, nbar_grid[nbar_grid.size() - 2]).w_opt;
    const bool saturates = last_gain < 0.25 * first_gain;
    double k10_low = 0.0;
    for (double n : nbar_grid)
        if (n <= 1.0)
            k10_low = std::max(k10_low, row(10, n).w_opt / 10.0);
    const bool k10_ok = k10_low < 1e-3;

    int violations = 0;
    for (const auto& r : result.rows)
        violations += r.bound_violated;

    std::string detail = std::string("(a) interior max ") + (interior ? "yes" : "no") + "; (b) eta_opt decreasing " +
                         (decreasing ? "yes" : "no") + "; (c) W_opt nondecreasing " + (nondecreasing ? "yes" : "no") +
                         ", <hbar nu " + (below_quantum ? "yes" : "no");
    detail += fmt(", saturation gain ratio %.3f, kappa=10 W/kappa=%.1e", last_gain / first_gain, k10_low);
    detail += fmt("; (d) bound violations %.0f/%.0f; runtime %.0fs (limit 300s)", violations,
                  static_cast<double>(result.rows.size()), elapsed);
    const bool ok = interior && decreasing && nondecreasing && below_quantum && saturates && k10_ok &&
                    violations == 0 && elapsed < 300.0;
    return {ok, detail};
}

Verdict adiabatic_convergence()
{
    auto deviation = [](double ratio) {
        EngineParams eff = make_params(0.1, 1, 1.0);
        eff.omega = ratio;
        const auto adia = oracle::resonant_adiabatic_params(ratio, 1.0, 0.1, 1);
        const double period = find_tf(eff).t_f / ratio;
        std::vector<double> times;
        for (int i = 0; i <= 40; ++i)
            times.push_back(period * i / 40.0);
        return oracle::compare_adiabatic_vs_effective(adia, eff, times);
    };
    const double d1 = deviation(0.01);
    const double d2 = deviation(0.005);
    const double factor = d1 / d2;
    return {d1 < 5e-3 && factor >= 3.0 && factor <= 5.0,
            fmt("dev(0.01)=%.3e (tol 5e-3) dev(0.005)=%.3e factor=%.2f (want [3,5])", d1, d2, factor)};
}

} // namespace

int main()
{
    report(1, "closed form vs dense unitary", dense_equivalence);
    report(2, "population conservation", conservation);
    report(3, "work-spinlabour lock", work_spinlabour_lock);
    report(4, "unitless work identity", unitless_work_identity);
    report(5, "sub-additivity", subadditivity);
    report(6, "free-entropy saturation", free_entropy_saturation);
    report(7, "dissipative closed forms", dissipative_closed_forms);
    report(8, "cycle closure", cycle_closure);
    report(9, "sweep shape and bound", sweep_shape);
    report(10, "adiabatic convergence", adiabatic_convergence);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
