#include "she/open_system.hpp"

#include "she/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace she {

JointPopulations spin_reset(const JointPopulations& state, const ResetParams& params)
{
    if (!(params.gamma_s > 0.0))
        throw ValidationError("spin_reset: gamma_s must be > 0");
    if (!(params.duration >= 0.0))
        throw ValidationError("spin_reset: duration must be >= 0");

    const double keep = std::exp(-params.gamma_s * params.duration);
    JointPopulations out = state;
    out.t = state.t + params.duration;
    out.branch_entropy.reset();
    if (params.duration == 0.0) {
        out.branch_entropy = state.branch_entropy;
        return out;
    }
    for (std::size_t m = 0; m < state.levels(); ++m) {
        const double down = state.p_down[m];
        const double remaining = keep * down;
        out.p_down[m] = remaining;
        // up + (1-keep)*down, written so that up + down is preserved exactly
        // whenever the sum is representable.
        out.p_up[m] = state.p_up[m] + (down - remaining);
    }
    return out;
}

void birth_death_rhs(std::span<const double> probs, double gamma_h, double nbar_bath, std::span<double> out)
{
    const std::size_t n = probs.size();
    const double down_rate = gamma_h * (nbar_bath + 1.0);
    const double up_rate = gamma_h * nbar_bath;
    const std::size_t top = n - 1;
    for (std::size_t m = 0; m < n; ++m) {
        const double dm = static_cast<double>(m);
        double flow = 0.0;
        // m+1 -> m (emission) and m -> m-1
        if (m < top)
            flow += down_rate * (dm + 1.0) * probs[m + 1];
        flow -= down_rate * dm * probs[m];
        // m-1 -> m (absorption) and m -> m+1; the top level does not absorb
        if (m > 0)
            flow += up_rate * dm * probs[m - 1];
        if (m < top)
            flow -= up_rate * (dm + 1.0) * probs[m];
        out[m] = flow;
    }
}

double rethermalize_step(const ThermParams& params, int n_max)
{
    const double n = std::max(1, n_max);
    return std::min(0.01 / params.gamma_h, 0.1 / (params.gamma_h * (params.nbar_bath + 1.0) * n));
}

namespace {

std::vector<double> rk4(std::span<const double> start, double gamma_h, double nbar_bath, double duration,
                        long steps)
{
    const std::size_t n = start.size();
    std::vector<double> p(start.begin(), start.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double h = duration / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
        birth_death_rhs(p, gamma_h, nbar_bath, k1);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + 0.5 * h * k1[i];
        birth_death_rhs(tmp, gamma_h, nbar_bath, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + 0.5 * h * k2[i];
        birth_death_rhs(tmp, gamma_h, nbar_bath, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = p[i] + h * k3[i];
        birth_death_rhs(tmp, gamma_h, nbar_bath, k4);
        for (std::size_t i = 0; i < n; ++i)
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return p;
}

constexpr double kHalvingTol = 1e-10;
constexpr int kMaxHalvings = 6;

} // namespace

std::vector<double> rethermalize(std::span<const double> probs, const ThermParams& params,
                                 ThermDiagnostics* diagnostics)
{
    if (!(params.gamma_h > 0.0))
        throw ValidationError("rethermalize: gamma_h must be > 0");
    if (!(params.nbar_bath >= 0.0))
        throw ValidationError("rethermalize: nbar_bath must be >= 0");
    if (!(params.duration >= 0.0))
        throw ValidationError("rethermalize: duration must be >= 0");
    if (probs.empty())
        throw ValidationError("rethermalize: empty distribution");
    for (double p : probs)
        if (!(p >= -1e-12))
            throw ValidationError("rethermalize: negative population");

    std::vector<double> start(probs.begin(), probs.end());
    if (params.duration == 0.0) {
        if (diagnostics)
            *diagnostics = ThermDiagnostics{0, 0.0, 0, 0.0, start.back()};
        return start;
    }

    const int n_max = static_cast<int>(probs.size()) - 1;
    const double h0 = rethermalize_step(params, n_max);
    long steps = std::max(1L, static_cast<long>(std::ceil(params.duration / h0)));

    auto coarse = rk4(start, params.gamma_h, params.nbar_bath, params.duration, steps);
    double err = 0.0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
        auto fine = rk4(start, params.gamma_h, params.nbar_bath, params.duration, 2 * steps);
        err = 0.0;
        for (std::size_t i = 0; i < fine.size(); ++i)
            err = std::max(err, std::abs(fine[i] - coarse[i]));
        if (err < kHalvingTol) {
            if (diagnostics)
                *diagnostics = ThermDiagnostics{2 * steps, params.duration / (2.0 * steps), halving, err,
                                                fine.back()};
            return fine;
        }
        coarse = std::move(fine);
        steps *= 2;
    }
    std::ostringstream msg;
    msg << "rethermalize: step-halving check failed after " << kMaxHalvings << " halvings (max deviation "
        << err << ", steps " << steps << ", n_max " << n_max << ", gamma_h " << params.gamma_h << ")";
    throw ComputationError(msg.str());
}

JointPopulations rethermalize(const JointPopulations& state, const ThermParams& params,
                              ThermDiagnostics* diagnostics)
{
    JointPopulations out;
    out.t = state.t + params.duration;
    ThermDiagnostics up_diag;
    out.p_up = rethermalize(state.p_up, params, &up_diag);
    out.p_down = rethermalize(state.p_down, params, diagnostics);
    if (diagnostics) {
        diagnostics->halving_error = std::max(diagnostics->halving_error, up_diag.halving_error);
        diagnostics->edge_mass += up_diag.edge_mass;
    }
    return out;
}

Eigen::MatrixXcd lindblad_dissipator_apply(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op)
{
    if (rho.rows() != rho.cols() || op.rows() != op.cols() || rho.rows() != op.rows())
        throw ValidationError("lindblad_dissipator_apply: dimension mismatch");
    const Eigen::MatrixXcd op_dag = op.adjoint();
    const Eigen::MatrixXcd number = op_dag * op;
    return op * rho * op_dag - 0.5 * (number * rho + rho * number);
}

} // namespace she
