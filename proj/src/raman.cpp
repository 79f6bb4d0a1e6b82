#include "she/raman.hpp"

#include "she/errors.hpp"

#include <cmath>
#include <string>

namespace she {

SpinTemperature SpinTemperature::inverse(double lambda_s)
{
    if (std::isnan(lambda_s))
        throw ValidationError("lambda_s must not be NaN");
    SpinTemperature s;
    if (!(std::isinf(lambda_s) && lambda_s > 0))
        s.lambda_ = lambda_s;
    if (std::isinf(lambda_s) && lambda_s < 0)
        throw ValidationError("lambda_s = -inf is not a valid spin temperature");
    return s;
}

double SpinTemperature::lambda() const
{
    if (!lambda_)
        throw ValidationError("lambda_s is infinite for the polarized spin state");
    return *lambda_;
}

double SpinTemperature::p_up() const
{
    if (!lambda_)
        return 1.0;
    return 1.0 / (1.0 + std::exp(-*lambda_));
}

double SpinTemperature::p_down() const
{
    if (!lambda_)
        return 0.0;
    // e^{-l}/(1+e^{-l}) = 1/(1+e^{l}); avoids 1 - p_up cancellation.
    return 1.0 / (1.0 + std::exp(*lambda_));
}

EngineParams make_params(double eta, int kappa, double nbar0, SpinTemperature spin, double tail_eps)
{
    EngineParams p;
    p.eta = eta;
    p.kappa = kappa;
    p.nbar0 = nbar0;
    p.spin = spin;
    p.cutoff = choose_cutoff(nbar0, kappa, tail_eps);
    return p;
}

double JointPopulations::total() const
{
    double acc = 0.0;
    for (std::size_t m = 0; m < p_up.size(); ++m)
        acc += p_up[m] + p_down[m];
    return acc;
}

std::vector<double> JointPopulations::phonon_marginal() const
{
    std::vector<double> out(p_up.size());
    for (std::size_t m = 0; m < p_up.size(); ++m)
        out[m] = p_up[m] + p_down[m];
    return out;
}

namespace {

void validate(const EngineParams& params)
{
    if (params.kappa < 0)
        throw ValidationError("kappa must be >= 0");
    if (!(params.omega > 0.0))
        throw ValidationError("omega must be > 0");
    if (params.kappa > 0 && params.cutoff.n_max < params.kappa + 1)
        throw ValidationError("cutoff n_max must be >= kappa + 1");
}

double xlogx(double p)
{
    return p > 0.0 ? p * std::log(p) : 0.0;
}

} // namespace

RamanModel::RamanModel(const EngineParams& params)
    : RamanModel(params, coupling_table(params.eta, params.kappa, params.cutoff))
{
}

RamanModel::RamanModel(const EngineParams& params, CouplingTable table)
    : params_(params), table_(std::move(table))
{
    validate(params_);
    if (table_.eta != params_.eta || table_.kappa != params_.kappa ||
        table_.cutoff.n_max != params_.cutoff.n_max)
        throw ValidationError("coupling table does not match engine params");

    thermal_ = thermal_distribution(params_.nbar0, params_.cutoff);
    const double pu = params_.spin.p_up();
    const double pd = params_.spin.p_down();
    const auto& P = thermal_.probs;
    const std::size_t levels = P.size();
    const auto k = static_cast<std::size_t>(params_.kappa);

    double s = 0.0;
    for (double p : P)
        s -= xlogx(pu * p) + xlogx(pd * p);
    branch_entropy_ = s;
    nbar_initial_ = thermal_.mean();

    transfer_weight_.assign(levels, 0.0);
    for (std::size_t m = k; m < levels; ++m)
        transfer_weight_[m] = pu * P[m] - pd * P[m - k];
}

JointPopulations RamanModel::evolve(double t) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ValidationError("evolve: time must be finite and >= 0, got " + std::to_string(t));

    const double pu = params_.spin.p_up();
    const double pd = params_.spin.p_down();
    const auto& P = thermal_.probs;
    const auto& W = table_.omega_m;
    const std::size_t levels = P.size();
    const auto k = static_cast<std::size_t>(params_.kappa);

    JointPopulations state;
    state.t = t;
    state.p_up.assign(levels, 0.0);
    state.p_down.assign(levels, 0.0);
    state.branch_entropy = branch_entropy_;

    for (std::size_t m = 0; m < levels; ++m) {
        state.p_up[m] += pu * P[m];
        state.p_down[m] += pd * P[m];
    }
    if (k == 0)
        return state; // carrier: populations never move

    // Block {|up,m>, |down,m-k>} for m >= k.
    for (std::size_t m = k; m < levels; ++m) {
        const double phase = W[m] * t;
        const double c = std::cos(phase);
        const double s = std::sin(phase);
        const double c2 = c * c;
        const double s2 = s * s;
        const double up_branch = pu * P[m];
        const double down_branch = pd * P[m - k];
        state.p_up[m] = up_branch * c2 + down_branch * s2;
        state.p_down[m - k] = down_branch * c2 + up_branch * s2;
    }
    return state;
}

double RamanModel::mean_phonon_at(double t) const
{
    if (params_.kappa == 0)
        return nbar_initial_;
    // Each up->down transfer in block m removes kappa quanta.
    double transferred = 0.0;
    const auto& W = table_.omega_m;
    for (std::size_t m = static_cast<std::size_t>(params_.kappa); m < W.size(); ++m) {
        const double s = std::sin(W[m] * t);
        transferred += transfer_weight_[m] * s * s;
    }
    return nbar_initial_ - params_.kappa * transferred;
}

JointPopulations evolve(const EngineParams& params, double t)
{
    return RamanModel(params).evolve(t);
}

double mean_phonon(const JointPopulations& state)
{
    double acc = 0.0;
    for (std::size_t m = 0; m < state.p_up.size(); ++m)
        acc += static_cast<double>(m) * (state.p_up[m] + state.p_down[m]);
    return acc;
}

std::pair<double, double> spin_populations(const JointPopulations& state)
{
    double up = 0.0;
    double down = 0.0;
    for (std::size_t m = 0; m < state.p_up.size(); ++m) {
        up += state.p_up[m];
        down += state.p_down[m];
    }
    return {up, down};
}

double spin_z(const JointPopulations& state)
{
    const auto [up, down] = spin_populations(state);
    return 0.5 * (up - down);
}

WorkLedger ledger(const JointPopulations& initial, const JointPopulations& final_state,
                  const EngineParams& params)
{
    if (params.kappa == 0)
        throw ValidationError("ledger: unitless work is undefined for kappa = 0");
    if (initial.levels() != final_state.levels())
        throw ValidationError("ledger: states have different cutoffs");

    const double nbar_i = mean_phonon(initial);
    const double nbar_f = mean_phonon(final_state);
    const double down_i = spin_populations(initial).second;
    const double down_f = spin_populations(final_state).second;

    WorkLedger out;
    out.work = -(nbar_f - nbar_i);
    out.heat = out.work;
    out.spinlabour = spin_z(final_state) - spin_z(initial);
    out.spintherm = -out.spinlabour;
    out.w_tilde_v = (nbar_f - nbar_i) / params.kappa;
    out.w_tilde_s = down_i - down_f;
    return out;
}

} // namespace she
