#include "she/errors.hpp"
#include "she/fock.hpp"
#include "she/oracle.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace she;
using testing::laguerre_sum;

namespace {

// Mass at and above level n, summed term by term far into the tail.
double tail_mass(double nbar0, int n)
{
    const double q = nbar0 / (nbar0 + 1.0);
    double s = 0.0;
    double term = std::pow(q, n) / (nbar0 + 1.0);
    for (int m = n; m < n + 20000 && term > 0.0; ++m, term *= q)
        s += term;
    return s;
}

} // namespace

TEST_CASE("cutoff is the smallest level with tail below eps")
{
    for (double nbar0 : {0.5, 1.0, 5.0, 20.0}) {
        const auto c = choose_cutoff(nbar0, 1, 1e-12);
        CHECK(tail_mass(nbar0, c.n_max) < 1e-12);
        CHECK(tail_mass(nbar0, c.n_max - 1) >= 1e-12 * (1 - 1e-9));
    }
    CHECK(choose_cutoff(5.0, 1, 1e-12).n_max == 152);
}

TEST_CASE("cutoff floor")
{
    CHECK(choose_cutoff(0.0, 3, 1e-12).n_max == 4);
    CHECK(choose_cutoff(0.01, 10, 1e-3).n_max == 11);
}

TEST_CASE("cutoff validation")
{
    CHECK_THROWS_AS((void)choose_cutoff(-1.0, 1, 1e-12), ValidationError);
    CHECK_THROWS_AS((void)choose_cutoff(1.0, -1, 1e-12), ValidationError);
    CHECK_THROWS_AS((void)choose_cutoff(1.0, 1, 0.0), ValidationError);
    CHECK_THROWS_AS((void)choose_cutoff(1.0, 1, 1.0), ValidationError);
    CHECK_THROWS_AS((void)choose_cutoff(std::nan(""), 1, 1e-6), ValidationError);
}

TEST_CASE("thermal distribution")
{
    const auto c = choose_cutoff(5.0, 1, 1e-12);
    const auto d = thermal_distribution(5.0, c);
    REQUIRE(d.probs.size() == c.levels());
    CHECK(d.total() <= 1.0);
    CHECK(d.total() > 1.0 - 1e-12);
    CHECK(d.mean() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(d.probs[0] == doctest::Approx(1.0 / 6.0));
    for (std::size_t m = 1; m < d.probs.size(); ++m)
        CHECK(d.probs[m] / d.probs[m - 1] == doctest::Approx(5.0 / 6.0).epsilon(1e-13));
    CHECK(d.beta_hnu == doctest::Approx(std::log(6.0 / 5.0)));

    const auto ground = thermal_distribution(0.0, choose_cutoff(0.0, 1, 1e-12));
    CHECK(ground.probs[0] == 1.0);
    CHECK(ground.probs[1] == 0.0);
    CHECK(std::isinf(ground.beta_hnu));
}

TEST_CASE("laguerre matches the explicit sum")
{
    CHECK(laguerre(20, 1, 0.16) == doctest::Approx(static_cast<double>(laguerre_sum(20, 1, 0.16L))).epsilon(1e-13));
    for (int k : {0, 1, 5, 10})
        for (int n : {0, 1, 2, 7, 30})
            for (double x : {0.0025, 0.16, 1.0}) {
                const double exact = static_cast<double>(laguerre_sum(n, k, x));
                CHECK(laguerre(n, k, x) == doctest::Approx(exact).epsilon(1e-11).scale(1.0));
            }
    CHECK(laguerre(0, 3, 2.0) == 1.0);
    CHECK(laguerre(1, 3, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)laguerre(-1, 0, 1.0), ValidationError);
}

TEST_CASE("falling factorial")
{
    CHECK(falling_factorial(5, 2) == 20.0);
    CHECK(falling_factorial(5, 0) == 1.0);
    CHECK(falling_factorial(2, 3) == 0.0);
    CHECK(falling_factorial(10, 10) == doctest::Approx(3628800.0));
}

TEST_CASE("block Rabi frequencies match the explicit formula")
{
    for (int kappa : {1, 2, 5})
        for (double eta : {0.05, 0.4, 1.0}) {
            const FockCutoff c{60, 1e-12};
            const auto table = coupling_table(eta, kappa, c);
            REQUIRE(table.omega_m.size() == c.levels());
            for (int m = 0; m <= c.n_max; ++m) {
                if (m < kappa) {
                    CHECK(table.omega_m[m] == 0.0);
                    continue;
                }
                const double exact = testing::block_rabi(eta, kappa, m);
                CHECK(table.omega_m[m] == doctest::Approx(exact).epsilon(1e-10).scale(1e-12));
            }
        }
}

TEST_CASE("diagonal couplings agree with the power series")
{
    const FockCutoff c{40, 1e-12};
    for (int kappa : {0, 1, 3}) {
        const auto table = coupling_table(0.3, kappa, c);
        for (int n = 0; n <= 40; n += 7)
            CHECK(table.f_diag[n] ==
                  doctest::Approx(static_cast<double>(oracle::sideband_f_series(n, kappa, 0.3L))).epsilon(1e-11));
    }
}

TEST_CASE("kappa zero couples a level to itself")
{
    const auto table = coupling_table(0.2, 0, FockCutoff{10, 1e-12});
    CHECK(table.omega_m[0] == doctest::Approx(std::exp(-0.02)));
    CHECK_THROWS_AS((void)coupling_table(-0.1, 1, FockCutoff{10, 1e-12}), ValidationError);
}
