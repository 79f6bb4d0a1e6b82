#pragma once

#include "she/raman.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace she {

/// Spin reset against a perfectly polarized spin bath.
/// duration is physical time; the decay factor is exp(-gamma_s * duration).
struct ResetParams {
    double gamma_s = 1.0;
    double duration = 10.0;
};

/// Motional re-thermalization against a bath with mean occupancy nbar_bath.
struct ThermParams {
    double gamma_h = 1.0;
    double nbar_bath = 5.0;
    double duration = 20.0;
};

/// Integrator bookkeeping returned alongside a re-thermalized distribution.
struct ThermDiagnostics {
    long steps = 0;
    double step = 0.0;
    int halvings = 0;
    double halving_error = 0.0; // max |P_h - P_{h/2}| of the accepted run
    double edge_mass = 0.0;     // population on the reflecting top level
};

[[nodiscard]] JointPopulations spin_reset(const JointPopulations& state, const ResetParams& params);

/// Integrates the diagonal (birth-death) reduction of the thermal master
/// equation with reflecting truncation at the last level.
[[nodiscard]] std::vector<double> rethermalize(std::span<const double> probs, const ThermParams& params,
                                               ThermDiagnostics* diagnostics = nullptr);

/// Applies the same stage to each spin sector of a joint state; the spin
/// marginal is untouched.
[[nodiscard]] JointPopulations rethermalize(const JointPopulations& state, const ThermParams& params,
                                            ThermDiagnostics* diagnostics = nullptr);

/// Default step size of the birth-death integrator:
/// min(0.01/gamma_h, 0.1/(gamma_h (nbar_bath+1) n_max)).
[[nodiscard]] double rethermalize_step(const ThermParams& params, int n_max);

/// Right-hand side of the birth-death equation, exposed for tests.
void birth_death_rhs(std::span<const double> probs, double gamma_h, double nbar_bath, std::span<double> out);

/// D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L)/2.
[[nodiscard]] Eigen::MatrixXcd lindblad_dissipator_apply(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op);

} // namespace she
