// Command-line front end. Talks to the library only through the C API.
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optoent/optoent.h"

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Failure {
    optoent_status status;
    std::string message;
};

void check(optoent_status s) {
    if (s != OPTOENT_OK) throw Failure{s, optoent_last_error()};
}

int exit_code(optoent_status s) {
    switch (s) {
    case OPTOENT_OK: return 0;
    case OPTOENT_ERR_CONTRACT:
    case OPTOENT_ERR_UNSTABLE: return 2;
    case OPTOENT_ERR_NONCONVERGENCE: return 3;
    default: return 1;
    }
}

std::string take(char* s) {
    std::string out = s ? s : "";
    optoent_string_free(s);
    return out;
}

// Owning wrapper for the C handles.
template <class T, void (*Destroy)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Destroy(p); }
    T** out() {
        Destroy(p);
        p = nullptr;
        return &p;
    }
};
using ConfigHandle = Handle<optoent_config, optoent_config_destroy>;
using CovHandle = Handle<optoent_covariance, optoent_covariance_destroy>;
using TableHandle = Handle<optoent_table, optoent_table_destroy>;
using EnsembleHandle = Handle<optoent_ensemble, optoent_ensemble_destroy>;

const std::vector<std::string> kConfigKeys = {
    "omega_m_hz", "kappa_over_omega_m", "q_factor", "n_th",   "g_hz",   "c_q",  "delta_over_kappa",
    "eta",        "brownian",           "gamma_hz", "t_sep",  "phi",    "method", "seed", "n_traj",
    "dt",         "threads",            "workers"};

struct Settings {
    std::string config_file;
    std::map<std::string, std::string> flags;
    std::string output;
    std::string format = "csv";
    bool no_timestamp = false;
};

// Layers: built-in defaults < config file < command-line flags.
void resolve_config(const Settings& s, ConfigHandle& merged, ConfigHandle& overrides) {
    ConfigHandle defaults, file, flags;
    check(optoent_config_create(1, defaults.out()));
    check(optoent_config_create(0, file.out()));
    if (!s.config_file.empty()) check(optoent_config_load_file(s.config_file.c_str(), file.out()));
    check(optoent_config_create(0, flags.out()));
    for (const auto& [k, v] : s.flags)
        if (!v.empty()) check(optoent_config_set(flags.p, k.c_str(), v.c_str()));
    ConfigHandle lower;
    check(optoent_config_merge(defaults.p, file.p, lower.out()));
    check(optoent_config_merge(lower.p, flags.p, merged.out()));
    check(optoent_config_merge(file.p, flags.p, overrides.out()));
}

std::string get(const ConfigHandle& cfg, const char* key) {
    char* s = nullptr;
    check(optoent_config_get(cfg.p, key, &s));
    return take(s);
}

optoent_method parse_method(const std::string& m) {
    if (m == "exact" || m == "exact_quadrature") return OPTOENT_METHOD_EXACT;
    if (m == "matrix" || m == "matrix_form") return OPTOENT_METHOD_MATRIX_FORM;
    if (m == "closed" || m == "closed_form") return OPTOENT_METHOD_CLOSED_FORM;
    if (m == "covariance" || m == "covariance_assembly") return OPTOENT_METHOD_COVARIANCE;
    throw Failure{OPTOENT_ERR_CONTRACT, "unknown method '" + m + "'"};
}

const char* method_label(int m) {
    switch (m) {
    case OPTOENT_METHOD_EXACT: return "exact_quadrature";
    case OPTOENT_METHOD_MATRIX_FORM: return "matrix_form";
    case OPTOENT_METHOD_CLOSED_FORM: return "closed_form";
    case OPTOENT_METHOD_COVARIANCE: return "covariance_assembly";
    }
    return "?";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit(const Settings& s, const std::string& text) {
    if (s.output.empty() || s.output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(s.output, std::ios::binary);
    if (!out) throw Failure{OPTOENT_ERR_IO, "cannot open '" + s.output + "' for writing"};
    out << text;
    if (!out) throw Failure{OPTOENT_ERR_IO, "write failed for '" + s.output + "'"};
}

json params_json(const optoent_system_params& p) {
    optoent_rates r{};
    check(optoent_derived_rates(&p, &r));
    return {{"omega_m", p.omega_m}, {"kappa", p.kappa}, {"gamma_m", p.gamma_m}, {"g", p.g},
            {"delta", p.delta},     {"n_th", p.n_th},   {"eta", p.eta},         {"c_q", r.c_q},
            {"gamma_ro", r.gamma_ro}, {"gamma_th", r.gamma_th}};
}

json result_json(const optoent_epr_result& r) {
    return {{"value", r.value},
            {"gamma", r.gamma_used},
            {"gamma_hz", r.gamma_used / kTwoPi},
            {"phi", r.phi_used},
            {"method", method_label(r.method)},
            {"entangled", r.entangled != 0},
            {"margin", r.margin},
            {"error", r.error},
            {"domain_warning", r.domain_warning != 0},
            {"phi_degenerate", r.phi_degenerate != 0}};
}

json matrix_json(const double* m) {
    json rows = json::array();
    for (int i = 0; i < 4; ++i) rows.push_back({m[4 * i], m[4 * i + 1], m[4 * i + 2], m[4 * i + 3]});
    return rows;
}

void run_epr(const Settings& s) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    optoent_system_params p{};
    check(optoent_config_system(cfg.p, &p));
    const optoent_method method = parse_method(get(cfg, "method"));
    const bool phi_opt = get(cfg, "phi") == "opt";
    optoent_epr_result r{};
    if (get(cfg, "gamma_hz") == "opt") {
        const double phi = phi_opt ? 0.0 : std::stod(get(cfg, "phi"));
        check(optoent_epr_minimize(&p, method, std::stod(get(cfg, "t_sep")), phi_opt, phi, &r));
    } else {
        optoent_pulse_params pulse{};
        check(optoent_config_pulse(cfg.p, &p, &pulse));
        if (phi_opt)
            check(optoent_epr_optimize_phi(&p, &pulse, method, &r));
        else
            check(optoent_epr_evaluate(&p, &pulse, method, &r));
    }
    json j{{"params", params_json(p)}, {"result", result_json(r)}};
    emit(s, j.dump(2) + "\n");
}

void emit_table(const Settings& s, const TableHandle& t) {
    const std::string stamp = s.no_timestamp ? "" : utc_timestamp();
    char* text = nullptr;
    if (s.format == "json")
        check(optoent_table_to_json(t.p, stamp.c_str(), &text));
    else
        check(optoent_table_to_csv(t.p, stamp.c_str(), &text));
    emit(s, take(text));
}

struct SweepArgs {
    std::string axis = "c_q";
    std::vector<double> points;
    double min = 0.0, max = 0.0;
    int count = 0;
    std::string spacing = "log";
    std::string methods = "closed_form,exact,witness";
};

void run_sweep(const Settings& s, const SweepArgs& a) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    std::vector<double> points = a.points;
    if (points.empty()) {
        if (a.count < 1) throw Failure{OPTOENT_ERR_CONTRACT, "give --points or --min/--max/--count"};
        points.resize(a.count);
        check(optoent_grid(a.min, a.max, a.count, a.spacing == "log", points.data()));
    }
    TableHandle t;
    check(optoent_sweep_run(cfg.p, a.axis.c_str(), points.data(), points.size(), a.methods.c_str(), t.out()));
    emit_table(s, t);
}

void run_figure(const Settings& s, const std::string& name) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    TableHandle t;
    check(optoent_figure_run(name.c_str(), overrides.p, t.out()));
    emit_table(s, t);
}

struct McArgs {
    std::string record;
    std::string ensemble_json;
    bool compare = false;
};

void run_montecarlo(const Settings& s, const McArgs& a) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    optoent_system_params p{};
    check(optoent_config_system(cfg.p, &p));
    optoent_pulse_params pulse{};
    check(optoent_config_pulse(cfg.p, &p, &pulse));

    CovHandle cov;
    check(optoent_covariance_from_spectra(&p, &pulse, cov.out()));
    double phi = 0.0;
    if (get(cfg, "phi") == "opt")
        check(optoent_covariance_optimal_phi(cov.p, &phi));
    else
        phi = std::stod(get(cfg, "phi"));

    EnsembleHandle ens;
    check(optoent_ensemble_run(&p, &pulse, cfg.p, ens.out()));
    double value = 0.0, se = 0.0;
    check(optoent_ensemble_duan(ens.p, phi, &value, &se));
    double xi[16], xi_se[16];
    check(optoent_ensemble_covariance(ens.p, xi, xi_se));
    size_t n = 0;
    check(optoent_ensemble_size(ens.p, &n));

    json j{{"params", params_json(p)},
           {"pulse", {{"gamma", pulse.gamma}, {"gamma_hz", pulse.gamma / kTwoPi}, {"t_sep", pulse.t_sep}, {"phi", phi}}},
           {"n_traj", n},
           {"duan", value},
           {"duan_stderr", se},
           {"covariance", matrix_json(xi)},
           {"covariance_stderr", matrix_json(xi_se)}};
    if (a.compare) {
        double ref = 0.0;
        check(optoent_covariance_duan(cov.p, phi, &ref));
        j["spectral_duan"] = ref;
        j["deviation_sigma"] = se > 0.0 ? (value - ref) / se : 0.0;
    }
    if (!a.ensemble_json.empty()) {
        char* text = nullptr;
        check(optoent_ensemble_to_json(ens.p, &text));
        std::ofstream out(a.ensemble_json);
        out << take(text);
        if (!out) throw Failure{OPTOENT_ERR_IO, "cannot write '" + a.ensemble_json + "'"};
    }
    if (!a.record.empty()) {
        const double dt = std::stod(get(cfg, "dt"));
        const double step = dt > 0.0 ? dt : 0.05 * std::min(1.0 / p.kappa, 1.0 / p.omega_m);
        const double length = pulse.t_sep + 20.0 / pulse.gamma;
        check(optoent_record_write_csv(&p, step, length, std::stoull(get(cfg, "seed")), a.record.c_str()));
    }
    emit(s, j.dump(2) + "\n");
}

void run_stability(const Settings& s) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    optoent_system_params p{};
    check(optoent_config_system(cfg.p, &p));
    optoent_stability_report r{};
    check(optoent_stability(&p, &r));
    json j{{"params", params_json(p)},
           {"drift_eigen_real_parts", {r.real_parts[0], r.real_parts[1], r.real_parts[2], r.real_parts[3]}},
           {"stable", r.stable != 0},
           {"margin", r.margin},
           {"routh_hurwitz_stable", r.routh_hurwitz_stable != 0}};
    emit(s, j.dump(2) + "\n");
}

struct TransferArgs {
    double min = -3.0, max = 3.0;  // units of omega_m
    int count = 601;
};

void run_dump_transfer(const Settings& s, const TransferArgs& a) {
    ConfigHandle cfg, overrides;
    resolve_config(s, cfg, overrides);
    optoent_system_params p{};
    check(optoent_config_system(cfg.p, &p));
    std::vector<double> grid(a.count);
    check(optoent_grid(a.min, a.max, a.count, 0, grid.data()));
    std::ostringstream out;
    out.precision(17);
    out << "omega";
    const char* rows[2] = {"x", "p"};
    const char* cols[4] = {"x_in", "p_in", "xi", "xi_x"};
    for (auto r : rows)
        for (auto c : cols) out << ",re_" << r << "_" << c << ",im_" << r << "_" << c;
    out << "\n";
    for (double u : grid) {
        double re[8], im[8];
        check(optoent_transfer(&p, u * p.omega_m, re, im));
        out << u * p.omega_m;
        for (int k = 0; k < 8; ++k) out << "," << re[k] << "," << im[k];
        out << "\n";
    }
    emit(s, out.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement between temporal modes of optomechanical output light"};
    app.require_subcommand(1);
    Settings s;
    app.add_option("--config", s.config_file, "key = value configuration file");
    for (const auto& key : kConfigKeys) app.add_option("--" + key, s.flags[key], "overrides config key " + key);
    app.add_option("-o,--output", s.output, "output file (default stdout)");
    app.add_option("--format", s.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--no-timestamp", s.no_timestamp, "omit the timestamp metadata line");
    app.fallthrough();

    auto* epr = app.add_subcommand("epr", "EPR variance; gamma_hz = opt minimizes over the bandwidth");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "parameter sweep");
    sweep->add_option("--axis", sweep_args.axis)->check(CLI::IsMember({"g", "c_q", "gamma", "n_th", "delta", "eta", "t_sep"}));
    sweep->add_option("--points", sweep_args.points, "explicit axis values")->delimiter(',');
    sweep->add_option("--min", sweep_args.min);
    sweep->add_option("--max", sweep_args.max);
    sweep->add_option("--count", sweep_args.count);
    sweep->add_option("--spacing", sweep_args.spacing)->check(CLI::IsMember({"linear", "log"}));
    sweep->add_option("--methods", sweep_args.methods, "comma-separated subset of closed_form,exact,matrix_form,witness,montecarlo");

    std::string figure_name;
    auto* figure = app.add_subcommand("figure", "run a figure preset");
    figure->add_option("name", figure_name)->required()->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig7"}));

    McArgs mc_args;
    auto* mc = app.add_subcommand("montecarlo", "time-domain Monte Carlo estimate of the Duan value");
    mc->add_option("--record", mc_args.record, "write one homodyne record as CSV");
    mc->add_option("--ensemble-json", mc_args.ensemble_json, "write the pulse samples as JSON");
    mc->add_flag("--compare", mc_args.compare, "also report the spectral value");

    auto* stability = app.add_subcommand("stability", "drift-matrix stability report");

    TransferArgs tr_args;
    auto* transfer = app.add_subcommand("dump-transfer", "transfer matrix on a frequency grid (CSV)");
    transfer->add_option("--min", tr_args.min, "lowest frequency in units of omega_m");
    transfer->add_option("--max", tr_args.max, "highest frequency in units of omega_m");
    transfer->add_option("--count", tr_args.count);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*epr) run_epr(s);
        if (*sweep) run_sweep(s, sweep_args);
        if (*figure) run_figure(s, figure_name);
        if (*mc) run_montecarlo(s, mc_args);
        if (*stability) run_stability(s);
        if (*transfer) run_dump_transfer(s, tr_args);
    } catch (const Failure& f) {
        std::cerr << "error (" << optoent_status_name(f.status) << "): " << f.message << "\n";
        return exit_code(f.status);
    } catch (const std::exception& e) {
        // Malformed numbers in config values reach std::stod here.
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
