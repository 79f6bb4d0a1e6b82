#include "she/cycle.hpp"

#include "she/entropy.hpp"
#include "she/errors.hpp"

#include <cmath>
#include <limits>

namespace she {

std::string_view stage_name(Stage stage)
{
    switch (stage) {
    case Stage::Extract:
        return "extract";
    case Stage::Reset:
        return "reset";
    case Stage::Therm:
        return "therm";
    }
    return "unknown";
}

void validate(const CycleConfig& config)
{
    if (config.params.kappa < 1)
        throw ValidationError("cycle: kappa must be >= 1");
    if (config.t_extract && !(*config.t_extract >= 0.0))
        throw ValidationError("cycle: t_extract must be >= 0");
    if (!(config.t_reset > 0.0) || !(config.t_therm > 0.0))
        throw ValidationError("cycle: t_reset and t_therm must be > 0");
    if (!(config.gamma_s > 0.0) || !(config.gamma_h > 0.0))
        throw ValidationError("cycle: gamma_s and gamma_h must be > 0");
    if (config.samples_per_stage < 2)
        throw ValidationError("cycle: samples_per_stage must be >= 2");
}

FreeEntropyAccount free_entropy(const JointPopulations& state, const JointPopulations& reference,
                                SpinTemperature spin, double lambda_v, int kappa)
{
    if (spin.is_polarized())
        throw ValidationError("free_entropy: lambda_s is infinite; the free entropy diverges in this limit");
    if (kappa < 1)
        throw ValidationError("free_entropy: kappa must be >= 1");

    auto account = [&](const JointPopulations& st) {
        FreeEntropyAccount acc;
        acc.lambda_s = spin.lambda();
        acc.lambda_v = lambda_v;
        acc.a_s = -spin_z(st);
        acc.a_v = -mean_phonon(st) / kappa;
        acc.entropy = joint_entropy(st);
        acc.f_tilde = acc.lambda_s * acc.a_s + acc.lambda_v * acc.a_v - acc.entropy;
        return acc;
    };
    auto out = account(state);
    out.delta_f = out.f_tilde - account(reference).f_tilde;
    return out;
}

CycleTrajectory run_cycle(const CycleConfig& config)
{
    validate(config);
    const auto& params = config.params;
    const RamanModel model(params);
    const int n = config.samples_per_stage;
    const bool finite_spin = !params.spin.is_polarized();
    const double lambda_v = config.lambda_v.value_or(std::log1p(1.0 / params.nbar0));

    CycleTrajectory traj;
    traj.kappa = params.kappa;
    traj.nbar0 = params.nbar0;
    traj.t_extract = config.t_extract ? *config.t_extract : find_tf(model, config.scan).t_f;

    const JointPopulations start = model.initial_state();
    WorkLedger extracted{}; // cumulative work done on the optical field

    auto record = [&](Stage stage, double t, const JointPopulations& st) {
        TrajectoryPoint pt;
        pt.stage = stage;
        pt.t = t;
        pt.nbar = mean_phonon(st);
        pt.p_down = spin_populations(st).second;
        pt.s_spin = spin_entropy(st);
        pt.s_vib = vib_entropy(st);
        pt.s_joint = joint_entropy(st);
        if (finite_spin) {
            const auto acc = free_entropy(st, start, params.spin, lambda_v, params.kappa);
            pt.delta_f = acc.delta_f;
            pt.free_entropy_slack =
                -acc.delta_f - (acc.lambda_s * extracted.w_tilde_s + acc.lambda_v * extracted.w_tilde_v);
        } else {
            pt.delta_f = std::numeric_limits<double>::quiet_NaN();
            pt.free_entropy_slack = std::numeric_limits<double>::quiet_NaN();
        }
        traj.points.push_back(pt);
    };

    auto grid = [n](double span, int k) { return span * static_cast<double>(k) / static_cast<double>(n - 1); };

    // A -> B: unitary extraction.
    JointPopulations b = start;
    for (int k = 0; k < n; ++k) {
        const double t = grid(traj.t_extract, k);
        b = model.evolve(t);
        extracted = ledger(start, b, params);
        record(Stage::Extract, t, b);
    }
    traj.ledgers[0] = extracted;

    // B -> C: spin reset, closed form from B at each sample.
    JointPopulations c = b;
    for (int k = 0; k < n; ++k) {
        const double gt = grid(config.t_reset, k);
        c = spin_reset(b, {config.gamma_s, gt / config.gamma_s});
        record(Stage::Reset, gt, c);
    }
    traj.ledgers[1] = ledger(b, c, params);

    // C -> A': re-thermalization, stepped between samples.
    JointPopulations a_end = c;
    record(Stage::Therm, 0.0, a_end);
    for (int k = 1; k < n; ++k) {
        const double dt = (grid(config.t_therm, k) - grid(config.t_therm, k - 1)) / config.gamma_h;
        a_end = rethermalize(a_end, ThermParams{config.gamma_h, params.nbar0, dt});
        record(Stage::Therm, grid(config.t_therm, k), a_end);
    }
    traj.ledgers[2] = ledger(c, a_end, params);

    traj.corners = {start, b, c, a_end};
    traj.nbar_error = std::abs(mean_phonon(a_end) - params.nbar0);
    traj.pdown_end = spin_populations(a_end).second;
    return traj;
}

CycleBalance balance_report(const CycleTrajectory& trajectory)
{
    bool seen[3] = {false, false, false};
    for (const auto& p : trajectory.points)
        seen[static_cast<int>(p.stage)] = true;
    if (!seen[0] || !seen[1] || !seen[2])
        throw ValidationError("balance_report: trajectory is missing a stage");

    CycleBalance out;
    const auto& extract = trajectory.ledgers[0];
    out.totals.work = extract.work;
    out.totals.heat = extract.work;
    out.totals.spinlabour = extract.spinlabour;
    out.totals.spintherm = -extract.spinlabour;
    out.totals.w_tilde_s = extract.w_tilde_s;
    out.totals.w_tilde_v = extract.w_tilde_v;
    out.reset_spintherm = trajectory.ledgers[1].spinlabour;
    out.therm_heat = -trajectory.ledgers[2].work;
    return out;
}

} // namespace she
