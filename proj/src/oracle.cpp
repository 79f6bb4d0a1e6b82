#include "she/oracle.hpp"

#include "she/errors.hpp"
#include "she/open_system.hpp"
#include "she/sweep.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace she::oracle {

using cd = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd annihilation(Index levels)
{
    MatrixXd a = MatrixXd::Zero(levels, levels);
    for (Index m = 1; m < levels; ++m)
        a(m - 1, m) = std::sqrt(static_cast<double>(m));
    return a;
}

double hermiticity_error(const MatrixXcd& a)
{
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_error(const MatrixXcd& u)
{
    return (u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

long double sideband_f_series(int n, int kappa, long double eta)
{
    const long double x = eta * eta;
    long double term = 1.0L;
    for (int j = 2; j <= kappa; ++j)
        term /= j; // 1/kappa!
    long double sum = term;
    for (int l = 0; l < n; ++l) {
        term *= -x * static_cast<long double>(n - l) / (static_cast<long double>(l + 1) * (kappa + l + 1));
        sum += term;
    }
    return std::exp(-0.5L * x) * sum;
}

MatrixXcd sideband_operator(double eta, int kappa, int n_max)
{
    const Index levels = n_max + 1;
    const MatrixXd a = annihilation(levels);
    MatrixXd a_pow = MatrixXd::Identity(levels, levels);
    for (int k = 0; k < kappa; ++k)
        a_pow = a_pow * a;
    const cd prefactor = std::pow(cd(0.0, eta), kappa);
    MatrixXcd d = MatrixXcd::Zero(levels, levels);
    for (Index m = 0; m < levels; ++m) {
        const double f = static_cast<double>(sideband_f_series(static_cast<int>(m), kappa, eta));
        d.row(m) = f * prefactor * a_pow.row(m).cast<cd>();
    }
    return d;
}

namespace {

void set_block(MatrixXcd& target, int row_spin, int col_spin, Index levels, const MatrixXcd& block)
{
    target.block(row_spin * levels, col_spin * levels, levels, levels) = block;
}

} // namespace

DenseOperator build_effective_hamiltonian(const EngineParams& params)
{
    DenseOperator h;
    h.n_max = params.cutoff.n_max;
    const Index levels = h.levels();
    const MatrixXcd d = sideband_operator(params.eta, params.kappa, h.n_max);
    h.matrix = MatrixXcd::Zero(h.dim(), h.dim());
    set_block(h.matrix, 0, 1, levels, -d.adjoint());
    set_block(h.matrix, 1, 0, levels, -d);
    return h;
}

MatrixXcd initial_density(const EngineParams& params)
{
    const auto thermal = thermal_distribution(params.nbar0, params.cutoff);
    const Index levels = params.cutoff.n_max + 1;
    MatrixXcd rho = MatrixXcd::Zero(2 * levels, 2 * levels);
    for (Index m = 0; m < levels; ++m) {
        rho(m, m) = params.spin.p_up() * thermal.probs[static_cast<std::size_t>(m)];
        rho(levels + m, levels + m) = params.spin.p_down() * thermal.probs[static_cast<std::size_t>(m)];
    }
    return rho;
}

DensePropagator::DensePropagator(const DenseOperator& h)
{
    const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
    if (hermiticity_error(h.matrix) > 1e-12 * scale)
        throw ValidationError("DensePropagator: Hamiltonian is not Hermitian");
    const Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(h.matrix);
    if (solver.info() != Eigen::Success)
        throw ComputationError("DensePropagator: eigendecomposition failed");
    evals_ = solver.eigenvalues();
    evecs_ = solver.eigenvectors();
}

MatrixXcd DensePropagator::unitary(double t) const
{
    Eigen::VectorXcd phases(evals_.size());
    for (Index i = 0; i < evals_.size(); ++i)
        phases(i) = std::polar(1.0, -evals_(i) * t);
    return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

MatrixXcd DensePropagator::evolve(const MatrixXcd& rho0, double t) const
{
    if (rho0.rows() != evecs_.rows() || rho0.cols() != evecs_.cols())
        throw ValidationError("DensePropagator::evolve: dimension mismatch");
    const MatrixXcd u = unitary(t);
    return u * rho0 * u.adjoint();
}

VectorXd DensePropagator::evolve_diagonal(const VectorXd& rho0_diag, double t) const
{
    if (rho0_diag.size() != evecs_.rows())
        throw ValidationError("DensePropagator::evolve_diagonal: dimension mismatch");
    const MatrixXcd u = unitary(t);
    return u.cwiseAbs2() * rho0_diag;
}

MatrixXcd evolve_dense(const DenseOperator& h, const MatrixXcd& rho0, double t)
{
    return DensePropagator(h).evolve(rho0, t);
}

JointPopulations populations(const VectorXd& diag, int n_max, double t)
{
    const Index levels = n_max + 1;
    if (diag.size() != 2 * levels)
        throw ValidationError("populations: dimension mismatch");
    JointPopulations out;
    out.t = t;
    out.p_up.resize(static_cast<std::size_t>(levels));
    out.p_down.resize(static_cast<std::size_t>(levels));
    for (Index m = 0; m < levels; ++m) {
        out.p_up[static_cast<std::size_t>(m)] = diag(m);
        out.p_down[static_cast<std::size_t>(m)] = diag(levels + m);
    }
    return out;
}

JointPopulations populations(const MatrixXcd& rho, int n_max, double t)
{
    return populations(VectorXd(rho.diagonal().real()), n_max, t);
}

MatrixXcd closed_form_unitary(const EngineParams& params, double t)
{
    const auto table = coupling_table(params.eta, params.kappa, params.cutoff);
    const int n_max = params.cutoff.n_max;
    const int k = params.kappa;
    const Index dim = 2 * (n_max + 1);
    MatrixXcd u = MatrixXcd::Zero(dim, dim);
    const cd i_unit(0.0, 1.0);
    const cd up_phase = i_unit * std::pow(cd(0.0, -1.0), k); // i (-i)^kappa
    const cd down_phase = i_unit * std::pow(i_unit, k);      // i i^kappa
    for (int m = 0; m <= n_max; ++m) {
        const double w_up = table.omega_m[static_cast<std::size_t>(m)];
        const double w_down = m + k <= n_max ? table.omega_m[static_cast<std::size_t>(m + k)] : 0.0;
        u(index(0, m, n_max), index(0, m, n_max)) = std::cos(w_up * t);
        u(index(1, m, n_max), index(1, m, n_max)) = std::cos(w_down * t);
        if (m + k <= n_max) {
            u(index(0, m + k, n_max), index(1, m, n_max)) = up_phase * std::sin(w_down * t);
            u(index(1, m, n_max), index(0, m + k, n_max)) = down_phase * std::sin(w_down * t);
        }
    }
    return u;
}

AdiabaticParams resonant_adiabatic_params(double raman_rate, double nu, double eta, int kappa, double delta_big)
{
    AdiabaticParams p;
    p.delta_big = delta_big;
    p.omega1 = std::sqrt(raman_rate * delta_big);
    p.omega2 = p.omega1;
    p.nu = nu;
    p.eta = eta;
    p.delta_small = kappa * nu; // equal Stark shifts cancel in delta'
    return p;
}

MatrixXcd displacement(double eta, int n_max, int padding)
{
    const Index padded = n_max + 1 + padding;
    const MatrixXd a = annihilation(padded);
    const MatrixXd x = a + a.transpose();
    const Eigen::SelfAdjointEigenSolver<MatrixXd> solver(x);
    Eigen::VectorXcd phases(padded);
    for (Index i = 0; i < padded; ++i)
        phases(i) = std::polar(1.0, -eta * solver.eigenvalues()(i));
    const MatrixXcd v = solver.eigenvectors().cast<cd>();
    const MatrixXcd full = v * phases.asDiagonal() * v.adjoint();
    return full.topLeftCorner(n_max + 1, n_max + 1);
}

DenseOperator build_adiabatic_hamiltonian(const AdiabaticParams& params, const FockCutoff& cutoff)
{
    DenseOperator h;
    h.n_max = cutoff.n_max;
    const Index levels = h.levels();
    h.matrix = MatrixXcd::Zero(h.dim(), h.dim());
    const double stark_down = params.omega1 * params.omega1 / params.delta_big;
    const double stark_up = params.omega2 * params.omega2 / params.delta_big;
    for (Index m = 0; m < levels; ++m) {
        const double trap = params.nu * static_cast<double>(m);
        h.matrix(m, m) = trap - stark_up - params.delta_small;
        h.matrix(levels + m, levels + m) = trap - stark_down;
    }
    const MatrixXcd disp = displacement(params.eta, h.n_max);
    const double rate = params.raman_rate();
    set_block(h.matrix, 0, 1, levels, -rate * disp);
    set_block(h.matrix, 1, 0, levels, -rate * disp.adjoint());
    return h;
}

namespace {

double adiabatic_deviation(const AdiabaticParams& adia, const EngineParams& eff, const std::vector<double>& t_samples)
{
    const DensePropagator adia_prop(build_adiabatic_hamiltonian(adia, eff.cutoff));
    const DensePropagator eff_prop(build_effective_hamiltonian(eff));
    const VectorXd rho0 = initial_density(eff).diagonal().real();
    const Index levels = eff.cutoff.n_max + 1;

    double worst = 0.0;
    for (double t : t_samples) {
        const VectorXd pa = adia_prop.evolve_diagonal(rho0, t);
        const VectorXd pe = eff_prop.evolve_diagonal(rho0, eff.omega * t);
        worst = std::max(worst, std::abs(pa.tail(levels).sum() - pe.tail(levels).sum()));
    }
    return worst;
}

} // namespace

double compare_adiabatic_vs_effective(const AdiabaticParams& adia, const EngineParams& eff,
                                      const std::vector<double>& t_samples)
{
    const double rate = adia.raman_rate();
    if (std::abs(rate - eff.omega) > 1e-12 * std::max(1.0, eff.omega))
        throw ValidationError("compare_adiabatic_vs_effective: Omega1*Omega2/Delta does not match omega");
    if (std::abs(adia.shifted_detuning() - eff.kappa * adia.nu) > 1e-9 * std::max(1.0, adia.nu))
        throw ValidationError("compare_adiabatic_vs_effective: delta' is not kappa*nu");
    if (adia.eta != eff.eta)
        throw ValidationError("compare_adiabatic_vs_effective: eta mismatch");
    return adiabatic_deviation(adia, eff, t_samples);
}

namespace {

class LindbladRhs {
public:
    LindbladRhs(const MatrixXcd& h, const std::vector<LindbladTerm>& terms) : h_(h)
    {
        for (const auto& term : terms) {
            if (term.op.rows() != h.rows() || term.op.cols() != h.cols())
                throw ValidationError("evolve_lindblad_dense: operator dimension mismatch");
            ops_.push_back(term.op);
            ops_dag_.push_back(term.op.adjoint());
            numbers_.push_back(term.op.adjoint() * term.op);
            rates_.push_back(term.rate);
        }
    }

    MatrixXcd operator()(const MatrixXcd& rho) const
    {
        const cd minus_i(0.0, -1.0);
        MatrixXcd out = minus_i * (h_ * rho - rho * h_);
        for (std::size_t k = 0; k < ops_.size(); ++k)
            out += rates_[k] * (ops_[k] * rho * ops_dag_[k] - 0.5 * (numbers_[k] * rho + rho * numbers_[k]));
        return out;
    }

private:
    MatrixXcd h_;
    std::vector<MatrixXcd> ops_, ops_dag_, numbers_;
    std::vector<double> rates_;
};

} // namespace

MatrixXcd evolve_lindblad_dense(const MatrixXcd& rho0, const MatrixXcd& hamiltonian,
                                const std::vector<LindbladTerm>& terms, double t, const LindbladOptions& options,
                                LindbladStats* stats)
{
    if (rho0.rows() != rho0.cols() || hamiltonian.rows() != rho0.rows() || hamiltonian.cols() != rho0.cols())
        throw ValidationError("evolve_lindblad_dense: dimension mismatch");
    if (!(t >= 0.0))
        throw ValidationError("evolve_lindblad_dense: negative time");
    const LindbladRhs rhs(hamiltonian, terms);

    // Dormand-Prince 5(4) tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                     e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;

    MatrixXcd y = rho0;
    double now = 0.0;
    double h = std::min(options.initial_step, t);
    LindbladStats local;
    MatrixXcd k1 = rhs(y);
    while (now < t) {
        if (local.accepted + local.rejected > options.max_steps) {
            std::ostringstream msg;
            msg << "evolve_lindblad_dense: step budget exhausted at t=" << now << " of " << t;
            throw ComputationError(msg.str());
        }
        h = std::min(h, t - now);
        const MatrixXcd k2 = rhs(y + h * (a21 * k1));
        const MatrixXcd k3 = rhs(y + h * (a31 * k1 + a32 * k2));
        const MatrixXcd k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const MatrixXcd k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const MatrixXcd k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const MatrixXcd y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const MatrixXcd k7 = rhs(y_new);
        const MatrixXcd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale_ref = std::max(y.cwiseAbs().maxCoeff(), y_new.cwiseAbs().maxCoeff());
        const double err_norm = err.cwiseAbs().maxCoeff() / (options.atol + options.rtol * scale_ref);
        if (err_norm <= 1.0) {
            now += h;
            y = y_new;
            k1 = k7;
            ++local.accepted;
        } else {
            ++local.rejected;
        }
        const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(1.0, t))
            throw ComputationError("evolve_lindblad_dense: step size underflow");
    }
    if (stats)
        *stats = local;
    return y;
}

std::vector<double> probe_times(const EngineParams& params, int count)
{
    const double t_f = find_tf(params).t_f;
    std::vector<double> times(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        times[static_cast<std::size_t>(i)] = 2.0 * t_f * i / std::max(1, count - 1);
    return times;
}

namespace {

double max_population_error(const JointPopulations& a, const JointPopulations& b)
{
    double worst = 0.0;
    for (std::size_t m = 0; m < a.levels(); ++m) {
        worst = std::max(worst, std::abs(a.p_up[m] - b.p_up[m]));
        worst = std::max(worst, std::abs(a.p_down[m] - b.p_down[m]));
    }
    return worst;
}

OracleComparison make(std::string name, double deviation, double tolerance)
{
    return {std::move(name), deviation, tolerance, deviation < tolerance};
}

std::string describe(const EngineParams& p)
{
    std::ostringstream s;
    s << "eta=" << p.eta << ",kappa=" << p.kappa << ",nbar0=" << p.nbar0;
    if (!p.spin.is_polarized())
        s << ",lambda_s=" << p.spin.lambda();
    return s.str();
}

OracleComparison extraction_vs_dense(const EngineParams& params, double eta_offset, int samples)
{
    const RamanModel model(params);
    EngineParams dense_params = params;
    dense_params.eta += eta_offset;
    const DensePropagator prop(build_effective_hamiltonian(dense_params));
    const VectorXd rho0 = initial_density(params).diagonal().real();
    double worst = 0.0;
    for (double t : probe_times(params, samples)) {
        const auto dense = populations(prop.evolve_diagonal(rho0, t), params.cutoff.n_max, t);
        worst = std::max(worst, max_population_error(model.evolve(t), dense));
    }
    return make("extraction-vs-dense[" + describe(params) + "]", worst, 1e-9);
}

} // namespace

std::vector<OracleComparison> run_oracle_suite(const OracleSuiteOptions& options)
{
    std::vector<OracleComparison> out;
    const double offset = options.eta_offset;

    for (double eta : {0.05, 0.4})
        for (int kappa : {1, 5})
            for (double nbar0 : {1.0, 5.0})
                out.push_back(extraction_vs_dense(make_params(eta, kappa, nbar0, SpinTemperature::polarized(),
                                                              options.tail_eps),
                                                  offset, options.time_samples));
    out.push_back(extraction_vs_dense(
        make_params(0.4, 1, 1.0, SpinTemperature::inverse(0.5), options.tail_eps), offset, options.time_samples));

    {
        EngineParams p = make_params(0.4, 2, 1.0);
        p.cutoff.n_max = 40;
        EngineParams dense_p = p;
        dense_p.eta += offset;
        const DensePropagator prop(build_effective_hamiltonian(dense_p));
        double worst = 0.0;
        for (double t : {0.0, 0.7, 3.1, 12.5, 40.0})
            worst = std::max(worst, (closed_form_unitary(p, t) - prop.unitary(t)).cwiseAbs().maxCoeff());
        out.push_back(make("closed-form-unitary[n_max=40]", worst, 1e-10));
    }

    {
        // Spin reset of a two-level state diag(P_up, P_down) = (0.2, 0.8) for gamma_s t = ln 2.
        const double gamma_s = 1.3;
        const double t = std::log(2.0) / gamma_s;
        MatrixXcd rho = MatrixXcd::Zero(2, 2);
        rho(0, 0) = 0.2;
        rho(1, 1) = 0.8;
        MatrixXcd lower = MatrixXcd::Zero(2, 2);
        lower(0, 1) = 1.0; // |up><down|
        const MatrixXcd dense = evolve_lindblad_dense(rho, MatrixXcd::Zero(2, 2), {{lower, gamma_s}}, t);
        JointPopulations st;
        st.p_up = {0.2};
        st.p_down = {0.8};
        const auto closed = spin_reset(st, {gamma_s, t});
        const double dev = std::max(std::abs(dense(0, 0).real() - closed.p_up[0]),
                                    std::abs(dense(1, 1).real() - closed.p_down[0]));
        out.push_back(make("spin-reset-vs-lindblad", dev, 1e-8));
    }

    {
        const int n_max = 40;
        const double nbar_bath = 2.0;
        const double gamma_h = 1.0;
        const double t = 3.0;
        const Index levels = n_max + 1;
        std::vector<double> start(static_cast<std::size_t>(levels), 0.0);
        start[0] = 0.3;
        start[1] = 0.5;
        start[4] = 0.2;
        MatrixXcd rho = MatrixXcd::Zero(levels, levels);
        for (Index m = 0; m < levels; ++m)
            rho(m, m) = start[static_cast<std::size_t>(m)];
        const MatrixXcd a = annihilation(levels).cast<cd>();
        const MatrixXcd dense = evolve_lindblad_dense(
            rho, MatrixXcd::Zero(levels, levels),
            {{a, gamma_h * (nbar_bath + 1.0)}, {MatrixXcd(a.adjoint()), gamma_h * nbar_bath}}, t);
        const auto closed = rethermalize(start, ThermParams{gamma_h, nbar_bath, t});
        double diag_dev = 0.0;
        double off_diag = 0.0;
        for (Index i = 0; i < levels; ++i)
            for (Index j = 0; j < levels; ++j) {
                if (i == j)
                    diag_dev = std::max(diag_dev, std::abs(dense(i, i).real() - closed[static_cast<std::size_t>(i)]));
                else
                    off_diag = std::max(off_diag, std::abs(dense(i, j)));
            }
        out.push_back(make("rethermalize-vs-lindblad", diag_dev, 1e-7));
        out.push_back(make("rethermalize-offdiagonal", off_diag, 1e-12));
    }

    {
        const double nu = 1.0;
        const double ratio = 0.01;
        EngineParams eff = make_params(0.1, 1, 1.0, SpinTemperature::polarized(), options.tail_eps);
        eff.omega = ratio * nu;
        auto adia = resonant_adiabatic_params(eff.omega, nu, eff.eta + offset, eff.kappa);
        const double t_f = find_tf(eff).t_f / eff.omega;
        std::vector<double> times;
        for (int i = 0; i <= 40; ++i)
            times.push_back(t_f * i / 40.0);
        // The eta offset perturbs the adiabatic side only.
        const double dev = offset == 0.0 ? compare_adiabatic_vs_effective(adia, eff, times)
                                         : adiabatic_deviation(adia, eff, times);
        out.push_back(make("adiabatic-vs-effective[omega/nu=0.01]", dev, 5e-3));
    }
    return out;
}

} // namespace she::oracle
