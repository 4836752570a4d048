#include <doctest.h>

#include <cmath>
#include <random>

#include "optoent/error.hpp"
#include "optoent/model.hpp"

using namespace optoent;

namespace {

SystemParams random_params(std::mt19937_64& rng, bool resonant) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SystemParams p;
    p.omega_m = std::pow(10.0, 3.0 + 4.0 * u(rng));
    p.kappa = p.omega_m * std::pow(10.0, -1.0 + 3.0 * u(rng));
    p.gamma_m = p.omega_m * std::pow(10.0, -8.0 + 6.0 * u(rng));
    p.g = p.omega_m * std::pow(10.0, -4.0 + 3.5 * u(rng));
    p.n_th = std::pow(10.0, 5.0 * u(rng));
    p.delta = resonant ? 0.0 : p.kappa * (2.0 * u(rng) - 1.0);
    return p;
}

} // namespace

TEST_CASE("derived rates at the lab baseline") {
    const auto p = params_from_lab_units(1e6, 10.0, 1e8, 1e4, 15.8e3, 0.0, 1.0);
    const auto r = derive_rates(p);
    CHECK(r.c_q == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(r.c_cl / r.c_q == doctest::Approx(p.n_th + 1.0).epsilon(1e-14));
    CHECK(r.gamma_ro == 4.0 * p.g * p.g / p.kappa);
    CHECK(r.q_factor == doctest::Approx(1e8).epsilon(1e-14));
}

TEST_CASE("derived rates in trivial limits") {
    auto p = baseline_params();
    auto r = derive_rates(p);
    CHECK(r.gamma_ro == 0.0);
    CHECK(r.c_q == 0.0);

    p.g = 0.01 * p.omega_m;
    p.n_th = 0.0;
    r = derive_rates(p);
    CHECK(r.gamma_th == doctest::Approx(0.5 * p.gamma_m).epsilon(1e-15));
    CHECK(r.c_q == doctest::Approx(4.0 * p.g * p.g / (p.kappa * p.gamma_m)).epsilon(1e-14));
}

TEST_CASE("derived rates are scale consistent") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_params(rng, false);
        auto q = p;
        const double s = 3.7;
        q.omega_m *= s, q.kappa *= s, q.gamma_m *= s, q.g *= s, q.delta *= s;
        const auto a = derive_rates(p), b = derive_rates(q);
        CHECK(b.gamma_ro == doctest::Approx(s * a.gamma_ro).epsilon(1e-13));
        CHECK(b.gamma_th == doctest::Approx(s * a.gamma_th).epsilon(1e-13));
        CHECK(b.c_q == doctest::Approx(a.c_q).epsilon(1e-13));
        CHECK(b.c_cl == doctest::Approx(a.c_cl).epsilon(1e-13));
        CHECK(b.q_factor == doctest::Approx(a.q_factor).epsilon(1e-13));
    }
}

TEST_CASE("validate rejects broken invariants") {
    auto p = params_from_lab_units(1e6, 10.0, 1e8, 1e4, 1e3, 0.0, 1.0);
    CHECK_NOTHROW(validate(p));
    auto bad = p;
    bad.omega_m = 0.0;
    CHECK_THROWS_AS(validate(bad), ContractViolation);
    bad = p;
    bad.eta = 1.5;
    CHECK_THROWS_AS(validate(bad), ContractViolation);
    bad = p;
    bad.n_th = -1.0;
    CHECK_THROWS_AS(validate(bad), ContractViolation);
    bad = p;
    bad.g = -1.0;
    CHECK_THROWS_AS(validate(bad), ContractViolation);
}

TEST_CASE("drift matrix entries") {
    auto p = params_from_lab_units(1e6, 10.0, 1e8, 1e4, 15.8e3, -0.2, 1.0);
    const auto a = drift_matrix(p);
    CHECK(a(1, 2) == -2.0 * p.g);
    CHECK(a(3, 0) == -2.0 * p.g);
    CHECK(a.trace() == doctest::Approx(-p.gamma_m - p.kappa).epsilon(1e-15));

    p.g = 0.0;
    p.delta = 0.0;
    const auto d = drift_matrix(p);
    CHECK(d.block<2, 2>(0, 2).isZero(0.0));
    CHECK(d.block<2, 2>(2, 0).isZero(0.0));
    CHECK(d(2, 2) == -0.5 * p.kappa);
    CHECK(d(3, 3) == -0.5 * p.kappa);
}

TEST_CASE("stability of the decoupled system") {
    auto p = baseline_params();
    const auto r = check_stability(p);
    CHECK(r.stable);
    int mech = 0, cav = 0;
    for (double x : r.drift_eigen_real_parts) {
        if (std::abs(x + 0.5 * p.gamma_m) < 1e-6 * p.gamma_m) ++mech;
        if (std::abs(x + 0.5 * p.kappa) < 1e-9 * p.kappa) ++cav;
    }
    CHECK(mech == 2);
    CHECK(cav == 2);
}

TEST_CASE("resonant drive is always stable") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) {
        const auto r = check_stability(random_params(rng, true));
        REQUIRE(r.stable);
        REQUIRE(r.routh_hurwitz_stable);
    }
}

TEST_CASE("strong blue detuning destabilizes") {
    auto p = params_from_lab_units(1e6, 10.0, 1e8, 1e4, 0.0, 0.3, 1.0);
    p.g = 0.5 * p.omega_m;
    const auto r = check_stability(p);
    CHECK_FALSE(r.stable);
    CHECK_FALSE(r.routh_hurwitz_stable);
    CHECK_THROWS_AS(require_stable(p), UnstableSystem);
}

TEST_CASE("eigenvalue and Routh-Hurwitz verdicts agree") {
    std::mt19937_64 rng(5);
    int unstable = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto r = check_stability(random_params(rng, false));
        REQUIRE(r.stable == r.routh_hurwitz_stable);
        unstable += !r.stable;
    }
    CHECK(unstable > 0);
}
