#include "she/errors.hpp"
#include "she/oracle.hpp"
#include "she/raman.hpp"
#include "she/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace she;

TEST_CASE("ladder operator")
{
    const auto a = oracle::annihilation(6);
    for (int n = 1; n < 6; ++n)
        CHECK(a(n - 1, n) == doctest::Approx(std::sqrt(static_cast<double>(n))));
    CHECK(a(0, 0) == 0.0);
    CHECK(a.diagonal().norm() == 0.0);
}

TEST_CASE("effective Hamiltonian and its propagator")
{
    const auto p = make_params(0.35, 2, 1.0);
    const auto h = oracle::build_effective_hamiltonian(p);
    CHECK(h.dim() == 2 * (p.cutoff.n_max + 1));
    CHECK(oracle::hermiticity_error(h.matrix) < 1e-15);
    const oracle::DensePropagator prop(h);
    const auto u = prop.unitary(7.3);
    CHECK(oracle::unitarity_error(u) < 1e-12);
    CHECK((u - oracle::closed_form_unitary(p, 7.3)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXcd bad = h.matrix;
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(oracle::DensePropagator(oracle::DenseOperator{h.n_max, bad}), ValidationError);
}

TEST_CASE("diagonal shortcut equals the full conjugation")
{
    const auto p = make_params(0.2, 1, 1.0, SpinTemperature::inverse(0.6));
    const auto h = oracle::build_effective_hamiltonian(p);
    const oracle::DensePropagator prop(h);
    const auto rho0 = oracle::initial_density(p);
    CHECK(std::abs(rho0.trace() - std::complex<double>(RamanModel(p).initial_state().total())) < 1e-15);
    const auto full = oracle::populations(prop.evolve(rho0, 11.0), p.cutoff.n_max, 11.0);
    const auto fast = oracle::populations(prop.evolve_diagonal(rho0.diagonal().real(), 11.0), p.cutoff.n_max, 11.0);
    for (std::size_t m = 0; m < full.levels(); ++m) {
        CHECK(full.p_up[m] == doctest::Approx(fast.p_up[m]).scale(1e-14));
        CHECK(full.p_down[m] == doctest::Approx(fast.p_down[m]).scale(1e-14));
    }
}

TEST_CASE("sideband operator is diagonal-shifted by kappa")
{
    const auto d = oracle::sideband_operator(0.3, 2, 10);
    for (int r = 0; r <= 10; ++r)
        for (int c = 0; c <= 10; ++c)
            if (c - r != 2)
                CHECK(std::abs(d(r, c)) == 0.0);
    const auto table = coupling_table(0.3, 2, FockCutoff{10, 1e-12});
    for (int m = 2; m <= 10; ++m)
        CHECK(std::abs(d(m - 2, m)) == doctest::Approx(table.omega_m[m]).epsilon(1e-12));
}

TEST_CASE("displacement")
{
    const auto dmat = oracle::displacement(0.2, 20);
    CHECK(std::abs(dmat(0, 0)) == doctest::Approx(std::exp(-0.02)).epsilon(1e-12));
    CHECK(std::abs(dmat(1, 0)) == doctest::Approx(0.2 * std::exp(-0.02)).epsilon(1e-12));
    // Low columns keep unit norm after cropping; the tail beyond level 20 is negligible.
    CHECK(dmat.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dmat.col(5).norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lindblad integrator without dissipation is unitary evolution")
{
    const auto p = make_params(0.3, 1, 0.5);
    const auto h = oracle::build_effective_hamiltonian(p);
    const auto rho0 = oracle::initial_density(p);
    oracle::LindbladStats stats;
    const auto rho = oracle::evolve_lindblad_dense(rho0, h.matrix, {}, 4.0, {}, &stats);
    CHECK((rho - oracle::evolve_dense(h, rho0, 4.0)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(stats.accepted > 0);
    CHECK_THROWS_AS((void)oracle::evolve_lindblad_dense(rho0, h.matrix, {}, -1.0), ValidationError);
}

TEST_CASE("pure decay of a two-level system")
{
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
    rho(1, 1) = 1.0;
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(2, 2);
    lower(0, 1) = 1.0;
    const auto out = oracle::evolve_lindblad_dense(rho, Eigen::MatrixXcd::Zero(2, 2), {{lower, 0.8}}, 2.5);
    CHECK(out(1, 1).real() == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("adiabatic parameters")
{
    const auto a = oracle::resonant_adiabatic_params(0.01, 1.0, 0.1, 1);
    CHECK(a.raman_rate() == doctest::Approx(0.01));
    CHECK(a.shifted_detuning() == doctest::Approx(1.0));
    CHECK(a.omega1 == a.omega2);
    EngineParams eff = make_params(0.1, 1, 1.0);
    eff.omega = 0.02;
    CHECK_THROWS_AS((void)oracle::compare_adiabatic_vs_effective(a, eff, {0.0}), ValidationError);
}

TEST_CASE("probe times span two extraction periods")
{
    const auto p = make_params(0.4, 1, 1.0);
    const auto times = oracle::probe_times(p, 11);
    REQUIRE(times.size() == 11);
    CHECK(times.front() == 0.0);
    CHECK(times.back() == doctest::Approx(2.0 * find_tf(p).t_f));
}

TEST_CASE("oracle suite passes and catches a mismatch")
{
    oracle::OracleSuiteOptions opts;
    opts.time_samples = 12;
    for (const auto& c : oracle::run_oracle_suite(opts)) {
        INFO(c.name);
        CHECK(c.passed);
        CHECK(c.max_deviation < c.tolerance);
    }
    opts.eta_offset = 1e-3;
    bool any_failed = false;
    for (const auto& c : oracle::run_oracle_suite(opts))
        any_failed = any_failed || !c.passed;
    CHECK(any_failed);
}
