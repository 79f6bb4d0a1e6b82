#pragma once

#include "she/raman.hpp"

#include <span>
#include <vector>

namespace she {

/// Entropies along one extraction run, in nats. lhs_subadd is
/// dS_spin + dS_vib relative to the first sample.
struct EntropySample {
    double t = 0.0;
    double s_spin = 0.0;
    double s_vib = 0.0;
    double lhs_subadd = 0.0;
};

[[nodiscard]] double binary_entropy(double p);
[[nodiscard]] double distribution_entropy(std::span<const double> probs);
/// Entropy of a thermal phonon state with mean nbar:
/// (nbar+1) ln(nbar+1) - nbar ln(nbar).
[[nodiscard]] double thermal_entropy(double nbar);

/// Spin entropy of the marginal, vibrational entropy of the phonon marginal.
[[nodiscard]] double spin_entropy(const JointPopulations& state);
[[nodiscard]] double vib_entropy(const JointPopulations& state);
/// S(rho) of the joint state: the branch entropy for states coming out of
/// unitary extraction, the diagonal entropy otherwise.
[[nodiscard]] double joint_entropy(const JointPopulations& state);

/// Left-hand side of the sub-additivity bound when the final phonon state is
/// assumed thermal with mean nbar0 - kappa * p_down.
[[nodiscard]] double subadd_lhs_thermal(double p_down, double nbar0, int kappa);

/// Largest P_down allowed by the thermal-final-state entropy bound.
[[nodiscard]] double max_pdown_bound(double nbar0, int kappa);

[[nodiscard]] std::vector<EntropySample> entropy_trace(std::span<const JointPopulations> states);

} // namespace she
