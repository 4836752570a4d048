// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [--cli PATH]   (PATH: the optoent executable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optoent/config.hpp"
#include "optoent/epr.hpp"
#include "optoent/gaussian.hpp"
#include "optoent/montecarlo.hpp"
#include "optoent/pulses.hpp"
#include "optoent/spectral.hpp"
#include "optoent/sweep.hpp"

using namespace optoent;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SystemParams baseline(double c_q) {
    auto p = baseline_params();
    p.g = coupling_for_cooperativity(p, c_q);
    return p;
}

SystemParams desk(double c_q) {
    SystemParams p;
    p.omega_m = 1.0;
    p.kappa = 10.0;
    p.gamma_m = 0.01;
    p.n_th = 5.0;
    p.g = coupling_for_cooperativity(p, c_q);
    return p;
}

ScalarEstimate desk_ensemble(const SystemParams& p, const PulseParams& pulse, int n, std::uint64_t seed) {
    EnsembleOptions o;
    o.n_traj = n;
    o.seed = seed;
    return estimate_duan(run_ensemble(p, pulse, o), pulse.phi);
}

Outcome main_result() {
    Outcome out{true, ""};
    for (double c_q : {0.1, 0.5, 1.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = minimize_over_gamma(baseline(c_q), EprMethod::exact_quadrature, 0.0, 1.0);
        const double t = seconds_since(t0);
        const double target = 1.0 + 1.0 / (c_q + 1.0);
        const double dev = std::abs(r.value / target - 1.0);
        out.pass = out.pass && dev <= 0.02 && t < 60.0;
        out.detail += fmt("c_q=%g: %.6f vs %.6f (%.2f%%, ", c_q, r.value, target, 100.0 * dev) + fmt("%.2fs) ", t);
    }
    return out;
}

Outcome optimal_bandwidth() {
    Outcome out{true, ""};
    for (double c_q : {0.1, 0.5, 1.0}) {
        const auto p = baseline(c_q);
        const auto rates = derive_rates(p);
        const double predicted = 2.0 * (rates.gamma_ro + rates.gamma_th) + 0.5 * p.gamma_m;
        const auto r = minimize_over_gamma(p, EprMethod::exact_quadrature, 0.0, 1.0);
        const double ratio = r.gamma_used / predicted;
        out.pass = out.pass && std::abs(ratio - 1.0) <= 0.2;
        out.detail += fmt("c_q=%g: Gamma*/Gamma_pred=%.3f ", c_q, ratio);
    }
    return out;
}

Outcome loss_law() {
    double worst = 0.0;
    for (double c_q : {0.1, 1.0, 5.0}) {
        auto p = baseline(c_q);
        for (double scale : {0.3, 1.0, 3.0}) {
            const PulseParams pulse{scale * gamma_opt(p), 0.0, 0.4};
            p.eta = 1.0;
            const double v1 = epr_closed_form(p, pulse).value;
            for (double eta : {0.0, 0.25, 0.5, 0.9}) {
                p.eta = eta;
                const double v = epr_closed_form(p, pulse).value;
                // Relative to the value: roundoff in values of order n_th exceeds 1e-12.
                worst = std::max(worst, std::abs(v - (eta * v1 + 2.0 * (1.0 - eta))) / std::max(1.0, std::abs(v1)));
            }
        }
    }
    auto p = desk(1.0);
    const PulseParams pulse{1.0, 0.0, 0.0};
    const double v1 = epr_exact(p, pulse).value;
    const double predicted = 0.5 * v1 + 1.0;
    p.eta = 0.5;
    const auto mc = desk_ensemble(p, pulse, 2000, EnsembleOptions{}.seed);
    const double pull = std::abs(mc.value - predicted) / mc.standard_error;
    return {worst <= 1e-12 && pull < 3.0,
            fmt("closed form max relative deviation %.2e; MC at eta=0.5: %.4f +- %.4f vs law %.4f", worst, mc.value,
                mc.standard_error, predicted)};
}

Outcome breakdown_and_witness() {
    const auto table = run_preset(figure_preset("fig4"));
    const auto c_q = table.column("c_q");
    const auto exact = table.column("epr_exact");
    const auto witness = table.column("witness");
    bool above = false, below = true, monotone = true, clean = true;
    double worst_exact = 0.0;
    for (std::size_t k = 0; k < c_q.size(); ++k) {
        clean = clean && table.rows[k].error.empty();
        if (c_q[k] >= 10.0 * (1 - 1e-9) && c_q[k] <= 100.0 * (1 + 1e-9) && exact[k] > 2.0) above = true;
        if (c_q[k] >= 10.0 * (1 - 1e-9)) worst_exact = std::max(worst_exact, exact[k]);
        below = below && witness[k] < 2.0;
        if (k > 0) monotone = monotone && witness[k] <= witness[k - 1] + 1e-9;
    }
    return {clean && above && below && monotone,
            fmt("max exact on [10,100] = %.3f; witness %.4f -> %.4f; monotone=%g", worst_exact, witness.front(),
                witness.back(), monotone ? 1.0 : 0.0)};
}

Outcome low_cooperativity() {
    const auto p = baseline(0.1);
    const auto r = minimize_over_gamma(p, EprMethod::exact_quadrature, 0.0, 1.0);
    const auto cov = covariance_from_spectra(p, {r.gamma_used, 0.0, 0.0}).cov;
    const bool ppt = ppt_check(cov) == PptVerdict::entangled;
    return {r.value < 2.0 && ppt,
            fmt("exact minimum %.6f; log-negativity %.4f", r.value, log_negativity(cov)) + (ppt ? ", PPT entangled" : ", PPT separable")};
}

Outcome detuning() {
    const auto preset = figure_preset("fig7");
    const SweepStage* stage = nullptr;
    for (const auto& s : preset.stages)
        if (s.overrides.has("c_q") && s.overrides.number("c_q") == 10.0) stage = &s;
    if (!stage) return {false, "fig7 preset has no c_q = 10 stage"};
    auto spec = stage->spec;
    spec.methods = {SweepMethod::exact};
    const auto table = run_sweep(merge(preset.base, stage->overrides), spec);
    const auto delta = table.column("axis_value");
    const auto v = table.column("epr_exact");
    double at_zero = NAN, at_03 = NAN, worst = -INFINITY;
    bool clean = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
        clean = clean && table.rows[k].error.empty();
        worst = std::max(worst, v[k]);
        if (std::abs(delta[k]) < 1e-12) at_zero = v[k];
        if (std::abs(delta[k] + 0.3) < 1e-9) at_03 = v[k];
    }
    return {clean && at_03 < at_zero && worst <= 2.0 + 1e-8,
            fmt("delta=-0.3 kappa: %.6f, delta=0: %.6f, max over %g points %.6f", at_03, at_zero,
                static_cast<double>(v.size()), worst)};
}

Outcome evaluator_triangle() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        auto p = params_from_lab_units(1e6 * std::pow(10.0, u(rng) - 0.5), 5.0 + 95.0 * u(rng),
                                       std::pow(10.0, 5.0 + 3.0 * u(rng)), std::pow(10.0, 1.0 + 3.0 * u(rng)), 0.0,
                                       0.0, 1.0);
        p.g = coupling_for_cooperativity(p, std::pow(10.0, -2.0 + 3.0 * u(rng)));
        const double go = gamma_opt(p);
        const PulseParams pulse{go * std::pow(10.0, 2.0 * u(rng) - 1.0), u(rng) < 0.5 ? 0.0 : u(rng) / go,
                                2.0 * std::numbers::pi * u(rng)};
        worst = std::max(worst, std::abs(epr_exact(p, pulse).value - epr_matrix_form(p, pulse).value));
    }
    bool mc_ok = true;
    std::string mc_detail;
    std::uint64_t seed = 500;
    for (double c_q : {0.1, 1.0, 10.0}) {
        const auto p = desk(c_q);
        const PulseParams pulse{1.0, 0.0, 0.0};
        const double exact = epr_exact(p, pulse).value;
        const auto mc = desk_ensemble(p, pulse, 1000, ++seed);
        const double pull = std::abs(mc.value - exact) / mc.standard_error;
        mc_ok = mc_ok && pull < 3.0;
        mc_detail += fmt(" c_q=%g: %.3f sigma;", c_q, pull);
    }
    return {worst <= 1e-6 && mc_ok, fmt("max |exact - matrix| = %.2e over 50 sets; MC", worst) + mc_detail};
}

Outcome tmsv_oracles() {
    double worst = 0.0;
    for (double r : {0.1, 0.5, 1.0}) {
        const auto cov = two_mode_squeezed(r);
        const auto s = symplectic_spectrum(cov, true);
        worst = std::max({worst, std::abs(duan_value(cov, 0.0) - 2.0 * std::exp(-2.0 * r)),
                          std::abs(log_negativity(cov) - 2.0 * r), std::abs(s.nu_minus - std::exp(-2.0 * r)),
                          std::abs(s.nu_plus / std::exp(2.0 * r) - 1.0)});
    }
    return {worst <= 1e-10, fmt("max deviation %.2e for r in {0.1, 0.5, 1}", worst)};
}

Outcome shot_noise() {
    const auto vac = vacuum_covariance();
    const auto hi = shot_noise_sensitivity(vac, 1.01);
    const auto lo = shot_noise_sensitivity(vac, 0.99);
    const bool pass = !hi.physical_at_x && !hi.ppt_at_x && lo.physical_at_x && lo.ppt_at_x;
    return {pass, fmt("x=1.01: physical=%g ppt=%g; x=0.99: physical=%g ppt=%g", hi.physical_at_x, hi.ppt_at_x,
                      lo.physical_at_x, lo.ppt_at_x)};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome properties(const std::string& cli) {
    // Mode-function orthonormality.
    double ortho = 0.0;
    const auto p = baseline(1.0);
    for (double scale : {0.1, 1.0, 10.0})
        for (double sep : {0.0, 2.0}) {
            const PulseParams pulse{scale * gamma_opt(p), sep / gamma_opt(p), 0.3};
            for (Mode i : {Mode::early, Mode::late})
                for (Mode j : {Mode::early, Mode::late})
                    ortho = std::max(ortho, std::abs(overlap(i, j, p, pulse) - (i == j ? 1.0 : 0.0)));
        }

    // Reality symmetry and the resonant closed form of the transfer matrix.
    double reality = 0.0, closed = 0.0;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (double delta : {0.0, -3.0}) {
        SystemParams d = desk(1.0);
        d.delta = delta;
        const TransferFunction tf(d);
        for (int k = 0; k < 400; ++k) {
            const double w = u(rng);
            const auto a = tf(w).m, b = tf(-w).m;
            reality = std::max(reality, (a.conjugate() - b).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff()));
            if (delta == 0.0) {
                const auto c = transfer_resonant_closed_form(w, d).m;
                closed = std::max(closed, (a - c).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff());
            }
        }
    }

    // Partial transpose is an involution.
    double involution = 0.0;
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 100; ++k) {
        Matrix4 m;
        for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = gauss(rng);
        const CovarianceMatrix4 cov(m * m.transpose() + Matrix4::Identity());
        involution = std::max(involution, (partial_transpose(partial_transpose(cov)).xi() - cov.xi()).cwiseAbs().maxCoeff());
    }

    // Determinism: library emission, and the command-line tool when given.
    const SweepSpec spec{SweepAxis::c_q, log_points(0.1, 10.0, 4), {SweepMethod::closed_form, SweepMethod::exact}};
    bool deterministic = table_to_csv(run_sweep(default_config(), spec)) == table_to_csv(run_sweep(default_config(), spec));
    std::string cli_note = "library only";
    if (!cli.empty()) {
        const std::string args =
            " --no-timestamp sweep --axis c_q --min 0.1 --max 10 --count 4 --spacing log --methods closed_form,exact";
        const std::string a = "acceptance_cli_a.csv", b = "acceptance_cli_b.csv";
        const int ra = std::system(("\"" + cli + "\" -o " + a + args).c_str());
        const int rb = std::system(("\"" + cli + "\" -o " + b + args).c_str());
        const std::string sa = slurp(a), sb = slurp(b);
        deterministic = deterministic && ra == 0 && rb == 0 && !sa.empty() && sa == sb;
        std::remove(a.c_str());
        std::remove(b.c_str());
        cli_note = "CLI byte-identical";
    }

    const bool pass = ortho <= 1e-8 && reality <= 1e-13 && closed <= 1e-12 && involution == 0.0 && deterministic;
    return {pass, fmt("orthonormality %.1e, reality %.1e, closed form %.1e, involution %.1e; ", ortho, reality,
                      closed, involution) +
                      (deterministic ? cli_note : "outputs differ")};
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"main result 1+1/(c_q+1)", main_result},
        {"optimal bandwidth", optimal_bandwidth},
        {"loss law", loss_law},
        {"high-cooperativity breakdown, witness", breakdown_and_witness},
        {"sub-unity cooperativity entanglement", low_cooperativity},
        {"detuning", detuning},
        {"evaluator triangle", evaluator_triangle},
        {"two-mode squeezed oracles", tmsv_oracles},
        {"shot-noise sensitivity", shot_noise},
        {"property suites", [&] { return properties(cli); }},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
