#pragma once

#include "she/fock.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace she {

/// Inverse spin temperature lambda_s of the initial spin state. The fully
/// polarized state (lambda_s = infinity) is a distinguished value that maps
/// to p_up = 1 exactly.
class SpinTemperature {
public:
    static SpinTemperature polarized() { return SpinTemperature{}; }
    static SpinTemperature inverse(double lambda_s);

    [[nodiscard]] bool is_polarized() const { return !lambda_.has_value(); }
    /// Finite lambda_s; throws for the polarized state.
    [[nodiscard]] double lambda() const;
    [[nodiscard]] double p_up() const;
    [[nodiscard]] double p_down() const;

private:
    SpinTemperature() = default;
    std::optional<double> lambda_;
};

/// Physical knobs of one extraction run. Times are measured in units of
/// 1/omega, so omega only enters reports.
struct EngineParams {
    double omega = 1.0;
    double eta = 0.1;
    int kappa = 1;
    double nbar0 = 5.0;
    SpinTemperature spin = SpinTemperature::polarized();
    FockCutoff cutoff;
};

/// Builds params with the cutoff chosen from (nbar0, kappa, tail_eps).
[[nodiscard]] EngineParams make_params(double eta, int kappa, double nbar0,
                                       SpinTemperature spin = SpinTemperature::polarized(),
                                       double tail_eps = 1e-12);

/// Diagonal joint state {P_up(m), P_down(m)} of spin (x) phonons.
///
/// States produced by unitary extraction carry the (time-invariant) entropy
/// of their branch mixture in branch_entropy: their joint density matrix has
/// in-block coherences and the diagonal alone does not determine S(rho).
struct JointPopulations {
    double t = 0.0;
    std::vector<double> p_up;
    std::vector<double> p_down;
    std::optional<double> branch_entropy;

    [[nodiscard]] std::size_t levels() const { return p_up.size(); }
    [[nodiscard]] double total() const;
    [[nodiscard]] std::vector<double> phonon_marginal() const;
};

/// Extracted optical work and spinlabour of a stage, with their bath
/// counterparts. Energies in units of hbar*nu, angular momenta in hbar.
///
/// w_tilde_s = P_down(initial) - P_down(final)   ( = delta <J_z>/hbar )
/// w_tilde_v = (nbar_final - nbar_initial)/kappa ( = delta E/(hbar nu kappa) )
/// The two unitless works coincide for every initial spin temperature.
struct WorkLedger {
    double work = 0.0;
    double spinlabour = 0.0;
    double heat = 0.0;
    double spintherm = 0.0;
    double w_tilde_v = 0.0;
    double w_tilde_s = 0.0;
};

/// Closed-form extraction dynamics for fixed params.
///
/// A diagonal initial state decomposes into branches |s,m>, each evolving
/// inside its two-level block {|up,m>, |down,m-kappa>} with Rabi frequency
/// omega_m. Blocks whose partner level lies beyond the cutoff are frozen,
/// which matches the truncated Hamiltonian exactly.
class RamanModel {
public:
    explicit RamanModel(const EngineParams& params);
    RamanModel(const EngineParams& params, CouplingTable table);

    [[nodiscard]] const EngineParams& params() const { return params_; }
    [[nodiscard]] const ThermalDistribution& thermal() const { return thermal_; }
    [[nodiscard]] const CouplingTable& couplings() const { return table_; }

    [[nodiscard]] JointPopulations initial_state() const { return evolve(0.0); }
    [[nodiscard]] JointPopulations evolve(double t) const;

    /// nbar(t) without materializing the joint state.
    [[nodiscard]] double mean_phonon_at(double t) const;
    /// Entropy of the initial product state; conserved along the unitary stage.
    [[nodiscard]] double branch_entropy() const { return branch_entropy_; }

private:
    EngineParams params_;
    ThermalDistribution thermal_;
    CouplingTable table_;
    double branch_entropy_ = 0.0;
    double nbar_initial_ = 0.0;
    // Net up->down transfer weight per block m: p_up P(m) - p_down P(m-kappa).
    std::vector<double> transfer_weight_;
};

[[nodiscard]] JointPopulations evolve(const EngineParams& params, double t);

[[nodiscard]] double mean_phonon(const JointPopulations& state);
/// (P_up, P_down) spin marginals.
[[nodiscard]] std::pair<double, double> spin_populations(const JointPopulations& state);
/// <J_z>/hbar = (P_up - P_down)/2.
[[nodiscard]] double spin_z(const JointPopulations& state);

[[nodiscard]] WorkLedger ledger(const JointPopulations& initial, const JointPopulations& final_state,
                                const EngineParams& params);

} // namespace she
