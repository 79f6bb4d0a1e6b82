#pragma once

#include "she/fock.hpp"
#include "she/raman.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace she::oracle {

/// Dense operator on spin (x) Fock space. Basis index = spin * levels + m,
/// with spin 0 = up and spin 1 = down.
struct DenseOperator {
    int n_max = 0;
    Eigen::MatrixXcd matrix;

    [[nodiscard]] Eigen::Index levels() const { return n_max + 1; }
    [[nodiscard]] Eigen::Index dim() const { return 2 * levels(); }
};

[[nodiscard]] inline Eigen::Index index(int spin, int m, int n_max) { return spin * (n_max + 1) + m; }

[[nodiscard]] Eigen::MatrixXd annihilation(Eigen::Index levels);

/// ||A - A^dag||_max.
[[nodiscard]] double hermiticity_error(const Eigen::MatrixXcd& a);
/// ||U^dag U - I||_max.
[[nodiscard]] double unitarity_error(const Eigen::MatrixXcd& u);

/// f_kappa(n) from its defining power series, summed in extended precision.
[[nodiscard]] long double sideband_f_series(int n, int kappa, long double eta);

/// Sideband lowering operator d = f_kappa(n) (i eta a)^kappa on the truncated space.
[[nodiscard]] Eigen::MatrixXcd sideband_operator(double eta, int kappa, int n_max);

/// H/(hbar Omega) = -(d^dag |up><down| + d |down><up|); time in units 1/Omega.
[[nodiscard]] DenseOperator build_effective_hamiltonian(const EngineParams& params);

/// Initial product density matrix rho_s(lambda_s) (x) thermal(nbar0).
[[nodiscard]] Eigen::MatrixXcd initial_density(const EngineParams& params);

/// Propagator exp(-i H t) through a Hermitian eigendecomposition; reusable over times.
class DensePropagator {
public:
    explicit DensePropagator(const DenseOperator& h);

    [[nodiscard]] Eigen::MatrixXcd unitary(double t) const;
    [[nodiscard]] Eigen::MatrixXcd evolve(const Eigen::MatrixXcd& rho0, double t) const;
    /// Diagonal of U rho0 U^dag for a diagonal rho0, without forming the full product.
    [[nodiscard]] Eigen::VectorXd evolve_diagonal(const Eigen::VectorXd& rho0_diag, double t) const;

private:
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

[[nodiscard]] Eigen::MatrixXcd evolve_dense(const DenseOperator& h, const Eigen::MatrixXcd& rho0, double t);

/// Populations P_up(m), P_down(m) read off a dense density matrix.
[[nodiscard]] JointPopulations populations(const Eigen::MatrixXcd& rho, int n_max, double t);
[[nodiscard]] JointPopulations populations(const Eigen::VectorXd& diag, int n_max, double t);

/// Closed-form evolution operator written with cos/sin of sqrt(d^dag d) and
/// sqrt(d d^dag), both diagonal with entries omega_m^2 from the coupling table.
[[nodiscard]] Eigen::MatrixXcd closed_form_unitary(const EngineParams& params, double t);

/// Parameters of the adiabatically eliminated two-level Raman model.
struct AdiabaticParams {
    double omega1 = 1.0;
    double omega2 = 1.0;
    double delta_big = 1.0;   // one-photon detuning Delta
    double delta_small = 1.0; // two-photon detuning delta
    double nu = 1.0;          // trap frequency
    double eta = 0.1;

    [[nodiscard]] double raman_rate() const { return omega1 * omega2 / delta_big; }
    /// delta' = delta - Omega1^2/Delta + Omega2^2/Delta.
    [[nodiscard]] double shifted_detuning() const
    {
        return delta_small - omega1 * omega1 / delta_big + omega2 * omega2 / delta_big;
    }
};

/// Adiabatic parameters with Omega1 = Omega2 (equal Stark shifts), resonant
/// with the kappa-th red sideband.
[[nodiscard]] AdiabaticParams resonant_adiabatic_params(double raman_rate, double nu, double eta, int kappa,
                                                        double delta_big = 1e3);

/// exp(-i eta (a + a^dag)) on levels, computed on a padded space and cropped.
[[nodiscard]] Eigen::MatrixXcd displacement(double eta, int n_max, int padding = 64);

/// H_adia/hbar in the frame of the lasers (no interaction picture for the trap).
[[nodiscard]] DenseOperator build_adiabatic_hamiltonian(const AdiabaticParams& params, const FockCutoff& cutoff);

/// Evolves the adiabatic model and the sideband-resolved model from the same
/// product state and returns max |P_down^adia(t) - P_down^eff(t)| over the
/// samples (times in the units of nu and Omega_i). Both populations are
/// frame-independent because the frame change is diagonal.
[[nodiscard]] double compare_adiabatic_vs_effective(const AdiabaticParams& adia, const EngineParams& eff,
                                                    const std::vector<double>& t_samples);

struct LindbladTerm {
    Eigen::MatrixXcd op;
    double rate = 1.0;
};

struct LindbladOptions {
    double rtol = 1e-11;
    double atol = 1e-13;
    double initial_step = 1e-3;
    long max_steps = 5'000'000;
};

struct LindbladStats {
    long accepted = 0;
    long rejected = 0;
};

/// Integrates d rho/dt = -i[H, rho] + sum_k rate_k D[L_k] rho with an adaptive
/// Dormand-Prince 5(4) scheme.
[[nodiscard]] Eigen::MatrixXcd evolve_lindblad_dense(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& hamiltonian,
                                                     const std::vector<LindbladTerm>& terms, double t,
                                                     const LindbladOptions& options = {},
                                                     LindbladStats* stats = nullptr);

struct OracleComparison {
    std::string name;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct OracleSuiteOptions {
    /// Added to eta on the dense side only; a nonzero value must make the suite fail.
    double eta_offset = 0.0;
    double tail_eps = 1e-12;
    int time_samples = 50;
};

/// Times used to probe an extraction run: uniform over [0, 2 t_f].
[[nodiscard]] std::vector<double> probe_times(const EngineParams& params, int count);

[[nodiscard]] std::vector<OracleComparison> run_oracle_suite(const OracleSuiteOptions& options = {});

} // namespace she::oracle
