#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "optoent/optoent.h"

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    optoent_string_free(s);
    return out;
}

optoent_system_params desk() {
    optoent_system_params p{};
    p.omega_m = 1.0;
    p.kappa = 10.0;
    p.gamma_m = 0.01;
    p.g = 0.12;
    p.n_th = 5.0;
    p.eta = 1.0;
    p.brownian = OPTOENT_BROWNIAN_MOMENTUM_ONLY;
    return p;
}

} // namespace

TEST_CASE("status names and version") {
    CHECK(std::strlen(optoent_version()) > 0);
    CHECK(std::string(optoent_status_name(OPTOENT_OK)) == "ok");
    CHECK(std::string(optoent_status_name(OPTOENT_ERR_CONTRACT)) != std::string(optoent_status_name(OPTOENT_ERR_IO)));
    optoent_string_free(nullptr);
    optoent_config_destroy(nullptr);
    optoent_covariance_destroy(nullptr);
    optoent_table_destroy(nullptr);
    optoent_ensemble_destroy(nullptr);
}

TEST_CASE("null arguments are contract errors with a message") {
    CHECK(optoent_baseline(nullptr) == OPTOENT_ERR_CONTRACT);
    CHECK(std::strlen(optoent_last_error()) > 0);
    CHECK(optoent_config_create(1, nullptr) == OPTOENT_ERR_CONTRACT);
    CHECK(optoent_config_parse(nullptr, nullptr) == OPTOENT_ERR_CONTRACT);
    double x = 0.0;
    CHECK(optoent_covariance_duan(nullptr, 0.0, &x) == OPTOENT_ERR_CONTRACT);
    optoent_system_params p{};
    CHECK(optoent_baseline(&p) == OPTOENT_OK);
    CHECK(std::string(optoent_last_error()).empty());
}

TEST_CASE("config handles") {
    optoent_config* defaults = nullptr;
    REQUIRE(optoent_config_create(1, &defaults) == OPTOENT_OK);
    optoent_config* file = nullptr;
    REQUIRE(optoent_config_parse("g_hz = 15800\nn_th = 1e4\n", &file) == OPTOENT_OK);
    optoent_config* merged = nullptr;
    REQUIRE(optoent_config_merge(defaults, file, &merged) == OPTOENT_OK);
    char* s = nullptr;
    CHECK(optoent_config_get(merged, "c_q", &s) == OPTOENT_ERR_CONTRACT);
    REQUIRE(optoent_config_get(merged, "g_hz", &s) == OPTOENT_OK);
    CHECK(take(s) == "15800");

    optoent_system_params p{};
    REQUIRE(optoent_config_system(merged, &p) == OPTOENT_OK);
    optoent_rates r{};
    REQUIRE(optoent_derived_rates(&p, &r) == OPTOENT_OK);
    CHECK(r.c_q == doctest::Approx(1.0).epsilon(0.01));

    CHECK(optoent_config_set(merged, "unknown_key", "1") == OPTOENT_ERR_CONTRACT);
    CHECK(std::string(optoent_last_error()).find("unknown_key") != std::string::npos);
    optoent_config* bad = nullptr;
    CHECK(optoent_config_parse("g_hz = 1\nc_q = 1\n", &bad) == OPTOENT_ERR_CONTRACT);
    CHECK(bad == nullptr);
    CHECK(optoent_config_load_file("/nonexistent/x.cfg", &bad) == OPTOENT_ERR_IO);

    REQUIRE(optoent_config_to_text(merged, &s) == OPTOENT_OK);
    optoent_config* back = nullptr;
    REQUIRE(optoent_config_parse(take(s).c_str(), &back) == OPTOENT_OK);
    optoent_config_destroy(back);
    optoent_config_destroy(merged);
    optoent_config_destroy(file);
    optoent_config_destroy(defaults);
}

TEST_CASE("model and EPR entry points") {
    auto p = desk();
    optoent_stability_report st{};
    REQUIRE(optoent_stability(&p, &st) == OPTOENT_OK);
    CHECK(st.stable == 1);
    CHECK(st.routh_hurwitz_stable == 1);

    optoent_pulse_params pulse{0.25, 0.0, 0.0};
    for (auto m : {OPTOENT_METHOD_EXACT, OPTOENT_METHOD_MATRIX_FORM, OPTOENT_METHOD_COVARIANCE}) {
        optoent_epr_result e{};
        REQUIRE(optoent_epr_evaluate(&p, &pulse, m, &e) == OPTOENT_OK);
        CHECK(e.value == doctest::Approx(1.967599316822).epsilon(1e-10));
        CHECK(e.entangled == 1);
    }
    optoent_epr_result best{};
    REQUIRE(optoent_epr_optimize_phi(&p, &pulse, OPTOENT_METHOD_EXACT, &best) == OPTOENT_OK);
    CHECK(best.value <= 1.967599316822 + 1e-12);

    double re[8], im[8];
    REQUIRE(optoent_transfer(&p, 0.3, re, im) == OPTOENT_OK);

    auto detuned = p;
    detuned.delta = -2.0;
    optoent_epr_result e{};
    CHECK(optoent_epr_evaluate(&detuned, &pulse, OPTOENT_METHOD_CLOSED_FORM, &e) == OPTOENT_ERR_CONTRACT);
    auto blue = p;
    blue.delta = 1.0;
    blue.g = 3.0;
    CHECK(optoent_epr_evaluate(&blue, &pulse, OPTOENT_METHOD_COVARIANCE, &e) == OPTOENT_ERR_UNSTABLE);
    // The exact quadrature is defined on resonance only.
    CHECK(optoent_epr_evaluate(&blue, &pulse, OPTOENT_METHOD_EXACT, &e) == OPTOENT_ERR_CONTRACT);
    auto invalid = p;
    invalid.kappa = -1.0;
    CHECK(optoent_epr_evaluate(&invalid, &pulse, OPTOENT_METHOD_EXACT, &e) == OPTOENT_ERR_CONTRACT);
}

TEST_CASE("covariance handles") {
    optoent_covariance* tmsv = nullptr;
    REQUIRE(optoent_covariance_two_mode_squeezed(0.5, &tmsv) == OPTOENT_OK);
    double v = 0.0;
    REQUIRE(optoent_covariance_duan(tmsv, 0.0, &v) == OPTOENT_OK);
    CHECK(v == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
    REQUIRE(optoent_covariance_log_negativity(tmsv, &v) == OPTOENT_OK);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    int flag = 0;
    REQUIRE(optoent_covariance_ppt(tmsv, &flag) == OPTOENT_OK);
    CHECK(flag == 1);
    double nu[2];
    REQUIRE(optoent_covariance_symplectic(tmsv, 1, nu) == OPTOENT_OK);
    CHECK(nu[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    double entries[16];
    REQUIRE(optoent_covariance_entries(tmsv, entries) == OPTOENT_OK);
    optoent_covariance* copy = nullptr;
    REQUIRE(optoent_covariance_from_entries(entries, &copy) == OPTOENT_OK);
    char* json = nullptr;
    REQUIRE(optoent_covariance_to_json(copy, 0, &json) == OPTOENT_OK);
    CHECK(take(json).find("\"entries\"") != std::string::npos);

    double unphysical[16] = {0.5, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    optoent_covariance* u = nullptr;
    REQUIRE(optoent_covariance_from_entries(unphysical, &u) == OPTOENT_OK);
    REQUIRE(optoent_covariance_physical(u, &flag) == OPTOENT_OK);
    CHECK(flag == 0);
    CHECK(optoent_covariance_ppt(u, &flag) == OPTOENT_ERR_CONTRACT);
    double asym[16] = {1, 0.3, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    optoent_covariance* a = nullptr;
    CHECK(optoent_covariance_from_entries(asym, &a) == OPTOENT_ERR_CONTRACT);
    CHECK(a == nullptr);

    auto p = desk();
    optoent_pulse_params pulse{0.25, 0.0, 0.0};
    optoent_covariance* spec = nullptr;
    REQUIRE(optoent_covariance_from_spectra(&p, &pulse, &spec) == OPTOENT_OK);
    REQUIRE(optoent_covariance_duan(spec, 0.0, &v) == OPTOENT_OK);
    CHECK(v == doctest::Approx(1.967599316822).epsilon(1e-9));

    optoent_covariance_destroy(spec);
    optoent_covariance_destroy(u);
    optoent_covariance_destroy(copy);
    optoent_covariance_destroy(tmsv);
}

TEST_CASE("sweep tables") {
    double pts[4];
    REQUIRE(optoent_grid(0.1, 10.0, 4, 1, pts) == OPTOENT_OK);
    CHECK(pts[3] == doctest::Approx(10.0));
    optoent_config* cfg = nullptr;
    REQUIRE(optoent_config_create(1, &cfg) == OPTOENT_OK);
    optoent_table* t = nullptr;
    REQUIRE(optoent_sweep_run(cfg, "c_q", pts, 4, "closed_form", &t) == OPTOENT_OK);
    size_t rows = 0;
    REQUIRE(optoent_table_rows(t, &rows) == OPTOENT_OK);
    CHECK(rows == 4);
    double v = 0.0;
    REQUIRE(optoent_table_value(t, 1, "epr_closed_form", &v) == OPTOENT_OK);
    CHECK(v < 2.0);
    CHECK(optoent_table_value(t, 9, "epr_closed_form", &v) == OPTOENT_ERR_CONTRACT);
    CHECK(optoent_table_value(t, 0, "nope", &v) == OPTOENT_ERR_CONTRACT);
    char* a = nullptr;
    char* b = nullptr;
    REQUIRE(optoent_table_to_csv(t, nullptr, &a) == OPTOENT_OK);
    optoent_table* t2 = nullptr;
    REQUIRE(optoent_sweep_run(cfg, "c_q", pts, 4, "closed_form", &t2) == OPTOENT_OK);
    REQUIRE(optoent_table_to_csv(t2, "", &b) == OPTOENT_OK);
    CHECK(take(a) == take(b));
    REQUIRE(optoent_table_to_json(t2, "now", &a) == OPTOENT_OK);
    CHECK(take(a).find("\"timestamp\"") != std::string::npos);
    optoent_table_destroy(t2);
    t2 = nullptr;
    CHECK(optoent_sweep_run(cfg, "c_q", pts, 4, "closed_form,bogus", &t2) == OPTOENT_ERR_CONTRACT);
    CHECK(optoent_sweep_run(cfg, "nope", pts, 4, "exact", &t2) == OPTOENT_ERR_CONTRACT);
    CHECK(optoent_figure_run("fig0", nullptr, &t2) == OPTOENT_ERR_CONTRACT);
    optoent_table_destroy(t);
    optoent_config_destroy(cfg);
}

TEST_CASE("ensembles") {
    auto p = desk();
    optoent_pulse_params pulse{2.0, 0.0, 0.0};
    optoent_config* cfg = nullptr;
    REQUIRE(optoent_config_parse("n_traj = 150\nseed = 5\nthreads = 1\n", &cfg) == OPTOENT_OK);
    optoent_ensemble* ens = nullptr;
    REQUIRE(optoent_ensemble_run(&p, &pulse, cfg, &ens) == OPTOENT_OK);
    size_t n = 0;
    REQUIRE(optoent_ensemble_size(ens, &n) == OPTOENT_OK);
    CHECK(n == 150);
    double value = 0.0, se = 0.0;
    REQUIRE(optoent_ensemble_duan(ens, 0.0, &value, &se) == OPTOENT_OK);
    CHECK(se > 0.0);
    double e[16], s[16];
    REQUIRE(optoent_ensemble_covariance(ens, e, s) == OPTOENT_OK);
    char* json = nullptr;
    REQUIRE(optoent_ensemble_to_json(ens, &json) == OPTOENT_OK);
    CHECK(take(json).find("optoent.ensemble/1") != std::string::npos);
    optoent_ensemble_destroy(ens);
    optoent_config_destroy(cfg);

    CHECK(optoent_record_write_csv(&p, 0.005, 1.0, 1, "/nonexistent/r.csv") == OPTOENT_ERR_IO);
    CHECK(optoent_record_write_csv(&p, 1.0, 1.0, 1, "r.csv") == OPTOENT_ERR_CONTRACT);
    REQUIRE(optoent_record_write_csv(&p, 0.005, 1.0, 1, "test_c_api_record.csv") == OPTOENT_OK);
    std::remove("test_c_api_record.csv");
}
