#include "she/sweep.hpp"

#include "she/entropy.hpp"
#include "she/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace she {

namespace {

constexpr double kWeightFloor = 1e-6;
constexpr long kMaxScanSamples = 20'000'000;
constexpr double kTieTol = 1e-12;

struct FrequencyRange {
    double slowest = 0.0;
    double fastest = 0.0;
};

FrequencyRange weighted_frequencies(const RamanModel& model)
{
    const auto& P = model.thermal().probs;
    const auto& W = model.couplings().omega_m;
    const double pu = model.params().spin.p_up();
    const double pd = model.params().spin.p_down();
    const auto k = static_cast<std::size_t>(model.params().kappa);
    FrequencyRange r;
    for (std::size_t m = k; m < W.size(); ++m) {
        const double weight = pu * P[m] + pd * P[m - k];
        const double w = std::abs(W[m]);
        if (weight <= kWeightFloor || w == 0.0)
            continue;
        r.slowest = r.slowest == 0.0 ? w : std::min(r.slowest, w);
        r.fastest = std::max(r.fastest, w);
    }
    return r;
}

} // namespace

double auto_scan_window(const RamanModel& model)
{
    const auto r = weighted_frequencies(model);
    if (r.slowest == 0.0)
        return 0.0;
    return 4.0 * std::numbers::pi / r.slowest;
}

TfResult find_tf(const EngineParams& params, const TimeScan& scan)
{
    return find_tf(RamanModel(params), scan);
}

TfResult find_tf(const RamanModel& model, const TimeScan& scan)
{
    if (model.params().kappa < 1)
        throw ComputationError("find_tf: kappa = 0 keeps nbar constant; no minimum exists");
    if (scan.count < 3)
        throw ValidationError("find_tf: scan count must be >= 3");
    if (!(scan.ripple >= 0.0))
        throw ValidationError("find_tf: ripple must be >= 0");

    const auto freqs = weighted_frequencies(model);
    const double window = scan.omega_t_max > 0.0 ? scan.omega_t_max : auto_scan_window(model);
    if (!(window > 0.0) || freqs.fastest == 0.0) {
        std::ostringstream msg;
        msg << "find_tf: no coupled level carries thermal weight (eta=" << model.params().eta
            << ", kappa=" << model.params().kappa << ", nbar0=" << model.params().nbar0 << ")";
        throw ComputationError(msg.str());
    }
    double step = window / scan.count;
    step = std::min(step, std::numbers::pi / (16.0 * freqs.fastest));
    const double samples_needed = std::ceil(window / step);
    const long samples = static_cast<long>(std::min(samples_needed, static_cast<double>(kMaxScanSamples)));

    auto nbar = [&](double t) { return model.mean_phonon_at(t); };

    // A grid minimum only counts once nbar climbs more than scan.ripple above it
    // before dipping below it again; the look-ahead may run past the window.
    double prev = nbar(0.0);
    double curr = nbar(step);
    long found = -1;
    long i = 1;
    while (i < samples) {
        const double next = nbar(static_cast<double>(i + 1) * step);
        if (!(curr < prev && curr <= next)) {
            prev = curr;
            curr = next;
            ++i;
            continue;
        }
        long j = i + 1;
        double value = next;
        while (value >= curr && value <= curr + scan.ripple && j < kMaxScanSamples)
            value = nbar(static_cast<double>(++j) * step);
        if (value > curr + scan.ripple) {
            found = i;
            break;
        }
        prev = nbar(static_cast<double>(j - 1) * step);
        curr = value;
        i = j;
    }
    if (found < 0) {
        std::ostringstream msg;
        if (samples_needed > static_cast<double>(kMaxScanSamples))
            msg << "find_tf: no nbar minimum within the first " << kMaxScanSamples << " scan samples (window "
                << window << ", step " << step << ")";
        else
            msg << "find_tf: no nbar minimum inside the scan window [0, " << window << "] (units 1/Omega)";
        throw ComputationError(msg.str());
    }

    // Golden-section search on the bracketing interval.
    double a = static_cast<double>(found - 1) * step;
    double b = static_cast<double>(found + 1) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = nbar(c);
    double fd = nbar(d);
    const double tol = scan.refine_tol * std::max(1.0, b);
    for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = nbar(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = nbar(d);
        }
    }
    double t_f = 0.5 * (a + b);
    double best = nbar(t_f);
    // Never return something worse than the grid minimum.
    const double grid_t = static_cast<double>(found) * step;
    if (curr < best) {
        t_f = grid_t;
        best = curr;
    }
    return {t_f, best, window, step};
}

double EtaGrid::at(int i) const
{
    if (count == 1)
        return min;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

void validate(const SweepSpec& spec)
{
    if (spec.kappa_values.empty())
        throw ValidationError("sweep: kappa list is empty");
    if (spec.nbar0_values.empty())
        throw ValidationError("sweep: nbar0 list is empty");
    for (int k : spec.kappa_values)
        if (k < 1)
            throw ValidationError("sweep: kappa values must be >= 1");
    for (double n : spec.nbar0_values)
        if (!(n > 0.0) || !std::isfinite(n))
            throw ValidationError("sweep: nbar0 values must be finite and > 0");
    if (!std::is_sorted(spec.kappa_values.begin(), spec.kappa_values.end()) ||
        !std::is_sorted(spec.nbar0_values.begin(), spec.nbar0_values.end()))
        throw ValidationError("sweep: grids must be in increasing order");
    if (spec.eta_grid.count < 1 || !(spec.eta_grid.min > 0.0) || spec.eta_grid.max < spec.eta_grid.min)
        throw ValidationError("sweep: eta grid must be positive, ordered and nonempty");
    if (spec.eta_grid.count > 1 && spec.eta_grid.max == spec.eta_grid.min)
        throw ValidationError("sweep: eta grid has zero width");
    if (spec.t_scan.count < 3)
        throw ValidationError("sweep: time scan count must be >= 3");
    if (!(spec.t_scan.refine_tol > 0.0))
        throw ValidationError("sweep: refine_tol must be > 0");
    if (!(spec.t_scan.ripple >= 0.0))
        throw ValidationError("sweep: ripple must be >= 0");
    if (!(spec.tail_eps > 0.0 && spec.tail_eps < 1.0))
        throw ValidationError("sweep: tail_eps must lie in (0, 1)");
    if (spec.workers < 1)
        throw ValidationError("sweep: workers must be >= 1");
}

EtaPoint evaluate_eta(double eta, int kappa, double nbar0, const SweepSpec& spec)
{
    EtaPoint pt;
    pt.eta = eta;
    const RamanModel model(make_params(eta, kappa, nbar0, SpinTemperature::polarized(), spec.tail_eps));
    try {
        const auto tf = find_tf(model, spec.t_scan);
        pt.t_f = tf.t_f;
        pt.work = model.mean_phonon_at(0.0) - tf.nbar_tf;
        pt.found = true;
    } catch (const ComputationError&) {
        pt.found = false;
    }
    return pt;
}

EtaCurve sweep_eta(int kappa, double nbar0, const SweepSpec& spec)
{
    EtaCurve curve;
    curve.kappa = kappa;
    curve.nbar0 = nbar0;
    curve.points.reserve(static_cast<std::size_t>(spec.eta_grid.count));
    for (int i = 0; i < spec.eta_grid.count; ++i)
        curve.points.push_back(evaluate_eta(spec.eta_grid.at(i), kappa, nbar0, spec));

    // Argmax; the smaller eta wins ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].work > curve.points[best].work + kTieTol)
            best = i;
    curve.eta_opt = curve.points[best].eta;
    curve.w_opt = curve.points[best].work;
    curve.t_f_opt = curve.points[best].t_f;

    if (best == 0 || best + 1 >= curve.points.size() || !curve.points[best].found)
        return curve;

    // Parabolic vertex through the three best neighbouring samples, re-evaluated.
    const auto& l = curve.points[best - 1];
    const auto& c = curve.points[best];
    const auto& r = curve.points[best + 1];
    const double denom = (l.eta - c.eta) * (l.eta - r.eta) * (c.eta - r.eta);
    if (denom == 0.0)
        return curve;
    const double A = (r.eta * (c.work - l.work) + c.eta * (l.work - r.work) + l.eta * (r.work - c.work)) / denom;
    const double B = (r.eta * r.eta * (l.work - c.work) + c.eta * c.eta * (r.work - l.work) +
                      l.eta * l.eta * (c.work - r.work)) /
                     denom;
    if (!(A < 0.0))
        return curve;
    const double vertex = -B / (2.0 * A);
    if (!(vertex > l.eta && vertex < r.eta))
        return curve;
    const auto refined = evaluate_eta(vertex, kappa, nbar0, spec);
    if (refined.found && refined.work > curve.w_opt + kTieTol) {
        curve.eta_opt = refined.eta;
        curve.w_opt = refined.work;
        curve.t_f_opt = refined.t_f;
        curve.refined = true;
    }
    return curve;
}

SweepResult sweep_nbar(const SweepSpec& spec)
{
    validate(spec);
    struct Task {
        int kappa;
        double nbar0;
    };
    std::vector<Task> tasks;
    for (int k : spec.kappa_values)
        for (double n : spec.nbar0_values)
            tasks.push_back({k, n});

    SweepResult result;
    result.rows.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&]() {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                SweepRow row;
                row.kappa = tasks[i].kappa;
                row.nbar0 = tasks[i].nbar0;
                row.curve = sweep_eta(row.kappa, row.nbar0, spec);
                row.eta_opt = row.curve.eta_opt;
                row.w_opt = row.curve.w_opt;
                row.t_f_opt = row.curve.t_f_opt;
                row.bound_w_max = row.kappa * max_pdown_bound(row.nbar0, row.kappa);
                row.bound_violated = row.w_opt > row.bound_w_max;
                result.rows[i] = std::move(row);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(spec.workers, static_cast<int>(tasks.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
    }
    for (const auto& err : errors)
        if (err)
            std::rethrow_exception(err);
    return result;
}

} // namespace she
