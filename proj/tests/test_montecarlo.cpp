#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "optoent/epr.hpp"
#include "optoent/error.hpp"
#include "optoent/montecarlo.hpp"

using namespace optoent;

namespace {

SystemParams desk(double c_q = 1.0) {
    SystemParams p;
    p.omega_m = 1.0;
    p.kappa = 10.0;
    p.gamma_m = 0.01;
    p.n_th = 5.0;
    p.g = coupling_for_cooperativity(p, c_q);
    return p;
}

EnsembleOptions small(int n, std::uint64_t seed) {
    EnsembleOptions o;
    o.n_traj = n;
    o.seed = seed;
    o.threads = 1;
    return o;
}

// |estimate - expected| in units of the jackknife error.
double pull(const ScalarEstimate& e, double expected) { return std::abs(e.value - expected) / e.standard_error; }

} // namespace

TEST_CASE("stationary covariance solves the Lyapunov equation") {
    for (double c_q : {0.1, 1.0, 10.0}) {
        const auto p = desk(c_q);
        const Matrix4 s = stationary_covariance(p);
        const Matrix4 a = drift_matrix(p);
        const auto b = noise_input_matrix(p);
        const Matrix4 n = noise_intensities(p).asDiagonal();
        const Matrix4 residual = a * s + s * a.transpose() + b * n * b.transpose();
        CHECK(residual.norm() < 1e-10 * (1.0 + s.norm()));
        CHECK((s - s.transpose()).norm() < 1e-12 * s.norm());
        CHECK(s.selfadjointView<Eigen::Lower>().llt().info() == Eigen::Success);
    }
}

TEST_CASE("output record of an uncoupled cavity is white shot noise") {
    auto p = desk();
    p.g = 0.0;
    const double dt = 0.005;
    const auto rec = simulate_record(p, dt, 2000.0, 11);
    double sx = 0.0, sp = 0.0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        sx += rec.x[k] * rec.x[k];
        sp += rec.p[k] * rec.p[k];
    }
    const double n = static_cast<double>(rec.size());
    // Bin averages of white noise with intensity 1/2 have variance 1/(2 dt).
    const double tol = 4.0 * std::sqrt(2.0 / n) * 0.5;
    CHECK(std::abs(sx * dt / n - 0.5) < tol);
    CHECK(std::abs(sp * dt / n - 0.5) < tol);
}

TEST_CASE("uncoupled pulses are vacuum") {
    auto p = desk();
    p.g = 0.0;
    const auto est = estimate_covariance(run_ensemble(p, {2.0, 0.0, 0.0}, small(600, 3)));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            CAPTURE(i);
            CAPTURE(j);
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(est.cov.xi()(i, j) - expected) < 4.0 * est.standard_error(i, j) + 1e-12);
        }
    }
}

TEST_CASE("step size contract") {
    const auto p = desk();
    CHECK_THROWS_AS(simulate_record(p, 0.0, 1.0, 1), ContractViolation);
    CHECK_THROWS_AS(simulate_record(p, -0.001, 1.0, 1), ContractViolation);
    CHECK_THROWS_AS(simulate_record(p, 0.006, 1.0, 1), ContractViolation);
    CHECK_NOTHROW(simulate_record(p, 0.005, 1.0, 1));
    auto bad = p;
    bad.delta = 5.0;
    bad.g = 3.0;
    CHECK_THROWS(simulate_record(bad, 0.001, 1.0, 1));
}

TEST_CASE("ensemble Duan value agrees with the exact evaluation") {
    for (double c_q : {0.1, 1.0}) {
        CAPTURE(c_q);
        const auto p = desk(c_q);
        const PulseParams pulse{1.0, 0.0, 0.0};
        const double exact = epr_evaluate(p, pulse, EprMethod::exact_quadrature).value;
        const auto e = estimate_duan(run_ensemble(p, pulse, small(500, 21)), 0.0);
        CHECK(pull(e, exact) < 3.0);
    }
}

TEST_CASE("Euler-Maruyama and exact transitions agree statistically") {
    const auto p = desk(1.0);
    const PulseParams pulse{1.0, 0.0, 0.0};
    const double exact = epr_evaluate(p, pulse, EprMethod::exact_quadrature).value;
    auto o = small(400, 5);
    o.simulation.integrator = Integrator::euler_maruyama;
    const auto euler = estimate_duan(run_ensemble(p, pulse, o), 0.0);
    CHECK(pull(euler, exact) < 4.0);
    o.dt = 0.0025;
    const auto fine = estimate_duan(run_ensemble(p, pulse, o), 0.0);
    CHECK(pull(fine, exact) < 4.0);
}

TEST_CASE("start from rest with burn-in matches the stationary start") {
    // A resonant drive adds no optical damping, so the mechanics relaxes at
    // gamma_m alone; a larger gamma_m keeps the burn-in affordable.
    auto p = desk();
    p.gamma_m = 0.1;
    p.g = coupling_for_cooperativity(p, 1.0);
    const PulseParams pulse{2.0, 0.0, 0.0};
    const double exact = epr_evaluate(p, pulse, EprMethod::exact_quadrature).value;
    auto o = small(300, 9);
    o.simulation.initial = InitialState::rest;
    o.simulation.burn_in = 60.0;
    const auto ens = run_ensemble(p, pulse, o);
    CHECK(ens.burn_in == doctest::Approx(60.0));
    CHECK(pull(estimate_duan(ens, 0.0), exact) < 4.0);
}

TEST_CASE("pulse statistics do not depend on where the pair sits in the record") {
    const auto p = desk(1.0);
    const PulseParams pulse{2.0, 0.0, 0.0};
    const double span = required_record_length(pulse);
    TrajectoryEnsemble early, late;
    for (int k = 0; k < 300; ++k) {
        const auto rec = simulate_record(p, 0.005, 3.0 * span, 1000 + static_cast<std::uint64_t>(k));
        early.samples.push_back(extract_pulses(rec, pulse, p.omega_m, 0.5 * span));
        late.samples.push_back(extract_pulses(rec, pulse, p.omega_m, 2.5 * span));
    }
    early.n_traj = late.n_traj = 300;
    const auto a = estimate_duan(early, 0.0);
    const auto b = estimate_duan(late, 0.0);
    CHECK(std::abs(a.value - b.value) < 4.0 * std::hypot(a.standard_error, b.standard_error));
}

TEST_CASE("standard error shrinks with ensemble size") {
    const auto p = desk(1.0);
    const PulseParams pulse{2.0, 0.0, 0.0};
    const auto a = estimate_duan(run_ensemble(p, pulse, small(300, 41)), 0.0);
    const auto b = estimate_duan(run_ensemble(p, pulse, small(1200, 41)), 0.0);
    const double ratio = a.standard_error / b.standard_error;
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.6);
}

TEST_CASE("efficiency mixing matches the loss law") {
    auto p = desk(1.0);
    p.eta = 0.5;
    const PulseParams pulse{1.0, 0.0, 0.0};
    const double exact = epr_evaluate(p, pulse, EprMethod::exact_quadrature).value;
    const auto ens = run_ensemble(p, pulse, small(500, 13));
    CHECK(ens.eta == 0.5);
    CHECK(pull(estimate_duan(ens, 0.0), exact) < 3.0);

    const auto rec = simulate_record(p, 0.005, 5.0, 2);
    const auto same = apply_efficiency(rec, 1.0, 99);
    CHECK(same.x == rec.x);
    CHECK(same.p == rec.p);
    CHECK_THROWS_AS(apply_efficiency(rec, 1.5, 1), ContractViolation);
}

TEST_CASE("ensembles are reproducible and independent of thread count") {
    const auto p = desk(1.0);
    const PulseParams pulse{2.0, 0.0, 0.0};
    const auto a = run_ensemble(p, pulse, small(40, 77));
    auto o = small(40, 77);
    o.threads = 3;
    const auto b = run_ensemble(p, pulse, o);
    CHECK(a.samples == b.samples);
    const auto c = run_ensemble(p, pulse, small(40, 78));
    CHECK(a.samples != c.samples);
}

TEST_CASE("ensemble JSON round trip and record CSV") {
    const auto p = desk(1.0);
    const auto ens = run_ensemble(p, {2.0, 0.5, 0.0}, small(20, 4));
    const auto back = ensemble_from_json(ensemble_to_json(ens));
    CHECK(back.samples == ens.samples);
    CHECK(back.n_traj == ens.n_traj);
    CHECK(back.seed == ens.seed);
    CHECK(back.dt == ens.dt);
    CHECK(back.t_total == ens.t_total);
    CHECK_THROWS(ensemble_from_json("{\"schema\": \"other\"}"));
    CHECK_THROWS(estimate_covariance(ens));  // fewer than 100 samples

    const auto rec = simulate_record(p, 0.005, 1.0, 3);
    const std::string path = "test_montecarlo_record.csv";
    write_record_csv(rec, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x_out,p_out");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == rec.size());
    std::remove(path.c_str());
    CHECK_THROWS_AS(write_record_csv(rec, "/nonexistent-dir/x.csv"), IoError);
}
