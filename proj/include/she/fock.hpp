#pragma once

#include <cstddef>
#include <vector>

namespace she {

/// Truncation of the motional Hilbert space to |0> .. |n_max>.
struct FockCutoff {
    int n_max = 0;
    double tail_eps = 1e-12;

    [[nodiscard]] std::size_t levels() const { return static_cast<std::size_t>(n_max) + 1; }
};

/// Geometric (thermal) phonon distribution on a truncated Fock space.
/// The stored probabilities are not renormalized after truncation, so
/// the missing tail mass stays visible (and is below cutoff.tail_eps).
struct ThermalDistribution {
    double nbar0 = 0.0;
    double beta_hnu = 0.0; // +inf for nbar0 == 0
    FockCutoff cutoff;
    std::vector<double> probs;

    [[nodiscard]] double total() const;
    [[nodiscard]] double mean() const;
};

/// Precomputed diagonal couplings of the kappa-th sideband.
///
/// f_diag[n]  = exp(-eta^2/2) n!/(n+kappa)! L_n^kappa(eta^2)
/// omega_m[m] = eta^kappa sqrt(m!/(m-kappa)!) f_diag[m-kappa]   (m >= kappa)
///            = 0                                               (m <  kappa)
///
/// omega_m is the effective Rabi frequency of the pair {|up,m>, |down,m-kappa>}
/// in units of the Raman rate Omega.
struct CouplingTable {
    double eta = 0.0;
    int kappa = 0;
    FockCutoff cutoff;
    std::vector<double> f_diag;
    std::vector<double> omega_m;
};

/// Smallest n_max such that the geometric mass at and above the top
/// retained level, (nbar0/(nbar0+1))^n_max, is below tail_eps, with the
/// floor n_max >= kappa + 1.
[[nodiscard]] FockCutoff choose_cutoff(double nbar0, int kappa, double tail_eps);

[[nodiscard]] ThermalDistribution thermal_distribution(double nbar0, const FockCutoff& cutoff);

/// Generalized Laguerre polynomial L_n^kappa(x) by the three-term recurrence in n.
[[nodiscard]] double laguerre(int n, int kappa, double x);

[[nodiscard]] CouplingTable coupling_table(double eta, int kappa, const FockCutoff& cutoff);

/// m!/(m-k)! as a running product of k factors; 0 when m < k.
[[nodiscard]] double falling_factorial(int m, int k);

} // namespace she
