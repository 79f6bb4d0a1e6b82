#include "she/entropy.hpp"

#include "she/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace she {

namespace {

constexpr double kProbSlack = 1e-12;

double neg_xlogx(double p)
{
    return p > 0.0 ? -p * std::log(p) : 0.0;
}

} // namespace

double binary_entropy(double p)
{
    if (!(p >= -kProbSlack && p <= 1.0 + kProbSlack))
        throw ValidationError("binary_entropy: probability outside [0,1]: " + std::to_string(p));
    p = std::clamp(p, 0.0, 1.0);
    return neg_xlogx(p) + neg_xlogx(1.0 - p);
}

double distribution_entropy(std::span<const double> probs)
{
    double s = 0.0;
    for (double p : probs) {
        if (p < 0.0)
            throw ValidationError("distribution_entropy: negative probability " + std::to_string(p));
        s += neg_xlogx(p);
    }
    return s;
}

double thermal_entropy(double nbar)
{
    if (!(nbar >= 0.0))
        throw ValidationError("thermal_entropy: nbar must be >= 0");
    if (nbar == 0.0)
        return 0.0;
    return (nbar + 1.0) * std::log1p(nbar) - nbar * std::log(nbar);
}

double spin_entropy(const JointPopulations& state)
{
    const auto [up, down] = spin_populations(state);
    const double norm = up + down;
    return binary_entropy(norm > 0.0 ? down / norm : 0.0);
}

double vib_entropy(const JointPopulations& state)
{
    const auto marginal = state.phonon_marginal();
    return distribution_entropy(marginal);
}

double joint_entropy(const JointPopulations& state)
{
    if (state.branch_entropy)
        return *state.branch_entropy;
    double s = 0.0;
    for (std::size_t m = 0; m < state.levels(); ++m)
        s += neg_xlogx(state.p_up[m]) + neg_xlogx(state.p_down[m]);
    return s;
}

double subadd_lhs_thermal(double p_down, double nbar0, int kappa)
{
    if (kappa < 1)
        throw ValidationError("subadd_lhs_thermal: kappa must be >= 1");
    if (!(nbar0 >= 0.0))
        throw ValidationError("subadd_lhs_thermal: nbar0 must be >= 0");
    const double upper = std::min(1.0, nbar0 / kappa);
    if (!(p_down >= 0.0 && p_down <= upper))
        throw ValidationError("subadd_lhs_thermal: p_down outside [0, min(1, nbar0/kappa)]");
    if (p_down == 0.0)
        return 0.0;
    const double nbar_f = std::max(0.0, nbar0 - kappa * p_down);
    return binary_entropy(p_down) + thermal_entropy(nbar_f) - thermal_entropy(nbar0);
}

double max_pdown_bound(double nbar0, int kappa)
{
    if (kappa < 1)
        throw ValidationError("max_pdown_bound: kappa must be >= 1");
    if (!(nbar0 >= 0.0))
        throw ValidationError("max_pdown_bound: nbar0 must be >= 0");
    if (nbar0 == 0.0)
        return 0.0;

    const double upper = std::min(1.0, nbar0 / kappa);
    auto lhs = [&](double p) { return subadd_lhs_thermal(p, nbar0, kappa); };

    // Scan for the outermost sign change, then bisect.
    constexpr int kScan = 1024;
    if (lhs(upper) >= 0.0)
        return upper;
    double lo = 0.0;
    double hi = upper;
    for (int i = kScan - 1; i >= 1; --i) {
        const double p = upper * static_cast<double>(i) / kScan;
        if (lhs(p) >= 0.0) {
            lo = p;
            hi = upper * static_cast<double>(i + 1) / kScan;
            break;
        }
    }
    if (lo == 0.0) {
        // Negative on every interior scan point; the root sits below the first one.
        hi = upper / kScan;
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (lhs(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<EntropySample> entropy_trace(std::span<const JointPopulations> states)
{
    std::vector<EntropySample> out;
    out.reserve(states.size());
    if (states.empty())
        return out;
    const double s_spin0 = spin_entropy(states.front());
    const double s_vib0 = vib_entropy(states.front());
    for (const auto& st : states) {
        EntropySample e;
        e.t = st.t;
        e.s_spin = spin_entropy(st);
        e.s_vib = vib_entropy(st);
        e.lhs_subadd = (e.s_spin - s_spin0) + (e.s_vib - s_vib0);
        out.push_back(e);
    }
    return out;
}

} // namespace she
