#include "she/fock.hpp"

#include "she/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace she {

double ThermalDistribution::total() const
{
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double ThermalDistribution::mean() const
{
    double acc = 0.0;
    for (std::size_t m = 0; m < probs.size(); ++m)
        acc += static_cast<double>(m) * probs[m];
    return acc;
}

FockCutoff choose_cutoff(double nbar0, int kappa, double tail_eps)
{
    if (!(tail_eps > 0.0 && tail_eps < 1.0))
        throw ValidationError("choose_cutoff: tail_eps must lie in (0, 1), got " + std::to_string(tail_eps));
    if (!(nbar0 >= 0.0) || !std::isfinite(nbar0))
        throw ValidationError("choose_cutoff: nbar0 must be finite and >= 0");
    if (kappa < 0)
        throw ValidationError("choose_cutoff: kappa must be >= 0");

    const int floor_levels = kappa + 1;
    if (nbar0 == 0.0)
        return {floor_levels, tail_eps};

    // q^n < eps with q = nbar0/(nbar0+1); log1p keeps q close to 1 accurate.
    const double log_q = -std::log1p(1.0 / nbar0);
    double guess = std::ceil(std::log(tail_eps) / log_q);
    if (guess > static_cast<double>(std::numeric_limits<int>::max() / 2))
        throw ValidationError("choose_cutoff: cutoff too large for nbar0=" + std::to_string(nbar0));
    int n = std::max(1, static_cast<int>(guess));
    // Nudge across rounding at the boundary.
    while (n > 1 && std::exp((n - 1) * log_q) < tail_eps)
        --n;
    while (!(std::exp(n * log_q) < tail_eps))
        ++n;
    return {std::max(n, floor_levels), tail_eps};
}

ThermalDistribution thermal_distribution(double nbar0, const FockCutoff& cutoff)
{
    if (!(nbar0 >= 0.0) || !std::isfinite(nbar0))
        throw ValidationError("thermal_distribution: nbar0 must be finite and >= 0");
    if (cutoff.n_max < 0)
        throw ValidationError("thermal_distribution: negative cutoff");

    ThermalDistribution dist;
    dist.nbar0 = nbar0;
    dist.cutoff = cutoff;
    dist.probs.assign(cutoff.levels(), 0.0);
    if (nbar0 == 0.0) {
        dist.beta_hnu = std::numeric_limits<double>::infinity();
        dist.probs[0] = 1.0;
        return dist;
    }
    dist.beta_hnu = std::log1p(1.0 / nbar0);
    const double ground = 1.0 / (nbar0 + 1.0);
    for (std::size_t m = 0; m < dist.probs.size(); ++m)
        dist.probs[m] = ground * std::exp(-static_cast<double>(m) * dist.beta_hnu);
    return dist;
}

double laguerre(int n, int kappa, double x)
{
    if (n < 0 || kappa < 0)
        throw ValidationError("laguerre: degree and order must be >= 0");
    if (n == 0)
        return 1.0;
    const double a = static_cast<double>(kappa);
    double prev = 1.0;
    double curr = 1.0 + a - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + a - x) * curr - (k + a) * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

double falling_factorial(int m, int k)
{
    if (m < k)
        return 0.0;
    double prod = 1.0;
    for (int j = 0; j < k; ++j)
        prod *= static_cast<double>(m - j);
    return prod;
}

CouplingTable coupling_table(double eta, int kappa, const FockCutoff& cutoff)
{
    if (!(eta >= 0.0) || !std::isfinite(eta))
        throw ValidationError("coupling_table: eta must be finite and >= 0");
    if (kappa < 0)
        throw ValidationError("coupling_table: kappa must be >= 0");

    CouplingTable table;
    table.eta = eta;
    table.kappa = kappa;
    table.cutoff = cutoff;
    table.f_diag.resize(cutoff.levels());
    table.omega_m.assign(cutoff.levels(), 0.0);

    const double x = eta * eta;
    const double damping = std::exp(-0.5 * x);
    const double eta_k = std::pow(eta, kappa);

    // Run the Laguerre recurrence once across all degrees.
    double prev = 1.0;
    double curr = 1.0 + kappa - x;
    for (int n = 0; n <= cutoff.n_max; ++n) {
        double lag = 0.0;
        if (n == 0) {
            lag = 1.0;
        } else if (n == 1) {
            lag = curr;
        } else {
            const int k = n - 1;
            const double next = ((2.0 * k + 1.0 + kappa - x) * curr - (k + kappa) * prev) / (k + 1.0);
            prev = curr;
            curr = next;
            lag = curr;
        }
        // n!/(n+kappa)! = 1 / prod_{j=1..kappa} (n+j)
        const double rising = falling_factorial(n + kappa, kappa);
        table.f_diag[static_cast<std::size_t>(n)] = damping * lag / rising;
        const int m = n + kappa;
        if (m <= cutoff.n_max) {
            // eta^kappa sqrt(m!/(m-kappa)!) * f(n) = eta^kappa e^{-x/2} L / sqrt(m!/(m-kappa)!)
            table.omega_m[static_cast<std::size_t>(m)] = eta_k * damping * lag / std::sqrt(rising);
        }
    }
    return table;
}

} // namespace she
