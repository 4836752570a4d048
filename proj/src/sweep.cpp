#include "optoent/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "optoent/error.hpp"
#include "optoent/gaussian.hpp"

namespace optoent {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format17(double v) {
    if (std::isnan(v)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_cell(const std::string& s) {
    if (s.empty()) return kNaN;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ContractViolation("sweep table: not a number: '" + s + "'");
    return v;
}

std::size_t column_index(const std::string& name) {
    const auto& cols = sweep_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == name) return i;
    throw ContractViolation("unknown sweep column '" + name + "'");
}

void put(SweepRow& row, const std::string& column, double v) { row.values[column_index(column)] = v; }

Config with_axis(const Config& base, SweepAxis axis, double x) {
    Config upper;
    const std::string v = format17(x);
    switch (axis) {
    case SweepAxis::g: upper.set("g_hz", v); break;
    case SweepAxis::c_q: upper.set("c_q", v); break;
    case SweepAxis::gamma: upper.set("gamma_hz", v); break;
    case SweepAxis::n_th: upper.set("n_th", v); break;
    case SweepAxis::delta: upper.set("delta_over_kappa", v); break;
    case SweepAxis::eta: upper.set("eta", v); break;
    case SweepAxis::t_sep: upper.set("t_sep", v); break;
    }
    return merge(base, upper);
}

EprMethod evaluator_for(SweepMethod m, const SystemParams& p) {
    const bool resonant = p.delta == 0.0 && p.brownian == BrownianModel::momentum_only;
    switch (m) {
    case SweepMethod::closed_form: return EprMethod::closed_form;
    case SweepMethod::exact: return resonant ? EprMethod::exact_quadrature : EprMethod::covariance_assembly;
    case SweepMethod::matrix_form: return resonant ? EprMethod::matrix_form : EprMethod::covariance_assembly;
    default: throw ContractViolation("not an EPR evaluator");
    }
}

void epr_columns(SweepRow& row, SweepMethod m, const Config& c, const SystemParams& params) {
    const std::string tag = sweep_method_name(m);
    const EprMethod method = evaluator_for(m, params);
    const auto phi = fixed_phi(c);
    double value = 0.0, gamma = 0.0, phi_used = 0.0;
    if (!c.is_opt("gamma_hz")) {
        const PulseParams pulse = pulse_params(c, params);
        const auto d = epr_components(params, pulse, method);
        phi_used = phi ? *phi : optimize_phi(d.cross).phi;
        value = d.at(phi_used);
        gamma = pulse.gamma;
    } else {
        GammaSearch search;
        search.optimize_phi = !phi;
        search.phi = phi.value_or(0.0);
        const auto r = minimize_over_gamma(params, method, c.number("t_sep"), params.eta, search);
        value = r.value;
        gamma = r.gamma_used;
        phi_used = r.phi_used;
    }
    put(row, "epr_" + tag, value);
    put(row, "gamma_" + tag + "_hz", gamma / kTwoPi);
    put(row, "phi_" + tag, phi_used);
    put(row, "entangled_" + tag, value < 2.0 ? 1.0 : 0.0);
}

void witness_columns(SweepRow& row, const Config& c, const SystemParams& params) {
    CovarianceMatrix4 cov;
    double gamma = 0.0;
    WitnessResult w;
    if (!c.is_opt("gamma_hz")) {
        const PulseParams pulse = pulse_params(c, params);
        cov = covariance_from_spectra(params, pulse).cov;
        w = optimal_witness(cov);
        gamma = pulse.gamma;
    } else {
        const auto scan = minimize_witness_over_gamma(params, c.number("t_sep"));
        cov = scan.cov;
        w = scan.witness;
        gamma = scan.gamma;
    }
    put(row, "witness", w.value);
    put(row, "gamma_witness_hz", gamma / kTwoPi);
    put(row, "log_negativity", log_negativity(cov));
    put(row, "ppt_entangled", ppt_check(cov) == PptVerdict::entangled ? 1.0 : 0.0);
}

void montecarlo_columns(SweepRow& row, const Config& c, const SystemParams& params) {
    PulseParams pulse = pulse_params(c, params);
    const auto phi = fixed_phi(c);
    const double phi_used = phi ? *phi : optimize_phi(covariance_from_spectra(params, pulse).cov).phi;
    const auto ens = run_ensemble(params, pulse, ensemble_options(c));
    const auto est = estimate_duan(ens, phi_used);
    put(row, "mc_duan", est.value);
    put(row, "mc_stderr", est.standard_error);
    put(row, "gamma_mc_hz", pulse.gamma / kTwoPi);
    put(row, "phi_mc", phi_used);
}

SweepRow evaluate_point(const Config& base, const SweepSpec& spec, double x) {
    SweepRow row;
    row.axis = axis_name(spec.axis);
    row.values.assign(sweep_columns().size(), kNaN);
    put(row, "axis_value", x);
    std::string errors;
    auto note = [&](const std::string& what, const std::exception& e) {
        if (!errors.empty()) errors += "; ";
        errors += what + ": " + e.what();
    };
    Config c;
    SystemParams params;
    try {
        c = with_axis(base, spec.axis, x);
        params = system_params(c);
        put(row, "c_q", derive_rates(params).c_q);
    } catch (const std::exception& e) {
        note("params", e);
        row.error = errors;
        return row;
    }
    for (SweepMethod m : spec.methods) {
        try {
            switch (m) {
            case SweepMethod::witness: witness_columns(row, c, params); break;
            case SweepMethod::montecarlo: montecarlo_columns(row, c, params); break;
            default: epr_columns(row, m, c, params); break;
            }
        } catch (const std::exception& e) {
            note(sweep_method_name(m), e);
        }
    }
    row.error = errors;
    return row;
}

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

} // namespace

const char* axis_name(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::g: return "g";
    case SweepAxis::c_q: return "c_q";
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::n_th: return "n_th";
    case SweepAxis::delta: return "delta";
    case SweepAxis::eta: return "eta";
    case SweepAxis::t_sep: return "t_sep";
    }
    return "?";
}

SweepAxis parse_axis(const std::string& name) {
    for (SweepAxis a : {SweepAxis::g, SweepAxis::c_q, SweepAxis::gamma, SweepAxis::n_th, SweepAxis::delta,
                        SweepAxis::eta, SweepAxis::t_sep})
        if (name == axis_name(a)) return a;
    throw ContractViolation("unknown sweep axis '" + name + "'");
}

const char* sweep_method_name(SweepMethod method) {
    switch (method) {
    case SweepMethod::closed_form: return "closed_form";
    case SweepMethod::exact: return "exact";
    case SweepMethod::matrix_form: return "matrix_form";
    case SweepMethod::witness: return "witness";
    case SweepMethod::montecarlo: return "montecarlo";
    }
    return "?";
}

SweepMethod parse_sweep_method(const std::string& name) {
    for (SweepMethod m : {SweepMethod::closed_form, SweepMethod::exact, SweepMethod::matrix_form, SweepMethod::witness,
                          SweepMethod::montecarlo})
        if (name == sweep_method_name(m)) return m;
    throw ContractViolation("unknown sweep method '" + name + "'");
}

std::vector<double> linear_points(double min, double max, int count) {
    if (count < 1) throw ContractViolation("point count must be positive");
    if (count == 1) return {min};
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = min + (max - min) * i / (count - 1);
    v.back() = max;
    return v;
}

std::vector<double> log_points(double min, double max, int count) {
    if (!(min > 0.0 && max > 0.0)) throw ContractViolation("log spacing needs positive end points");
    auto v = linear_points(std::log10(min), std::log10(max), count);
    for (double& x : v) x = std::pow(10.0, x);
    v.front() = min;
    v.back() = max;
    return v;
}

void validate(const SweepSpec& spec) {
    if (spec.points.empty()) throw ContractViolation("sweep has no points");
    if (spec.methods.empty()) throw ContractViolation("sweep has no methods");
    for (double x : spec.points) {
        if (!std::isfinite(x)) throw ContractViolation("sweep point is not finite");
        bool ok = true;
        switch (spec.axis) {
        case SweepAxis::gamma: ok = x > 0.0; break;
        case SweepAxis::eta: ok = x >= 0.0 && x <= 1.0; break;
        case SweepAxis::delta: ok = true; break;
        default: ok = x >= 0.0; break;
        }
        if (!ok) throw ContractViolation(std::string("sweep point ") + format17(x) + " violates the range of axis " +
                                         axis_name(spec.axis));
    }
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"axis_value", "c_q"};
        for (const char* m : {"closed_form", "exact", "matrix_form"}) {
            const std::string t = m;
            c.insert(c.end(), {"epr_" + t, "gamma_" + t + "_hz", "phi_" + t, "entangled_" + t});
        }
        c.insert(c.end(), {"witness", "gamma_witness_hz", "log_negativity", "ppt_entangled"});
        c.insert(c.end(), {"mc_duan", "mc_stderr", "gamma_mc_hz", "phi_mc"});
        return c;
    }();
    return cols;
}

double SweepTable::at(std::size_t row, const std::string& column) const {
    return rows.at(row).values.at(column_index(column));
}

std::vector<double> SweepTable::column(const std::string& name) const {
    const std::size_t k = column_index(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.values.at(k));
    return v;
}

SweepTable run_sweep(const Config& config, const SweepSpec& spec) {
    validate(spec);
    const Config base = merge(default_config(), config);
    const unsigned workers = std::min<unsigned>(sweep_workers(base), static_cast<unsigned>(spec.points.size()));
    SweepTable table;
    table.rows.resize(spec.points.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < spec.points.size(); i = next++)
            table.rows[i] = evaluate_point(base, spec, spec.points[i]);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return table;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig4", "fig5", "fig6", "fig7"};
    return names;
}

Preset figure_preset(const std::string& name) {
    Preset p;
    p.name = name;
    p.base = default_config();  // already the 1 MHz / kappa = 10 omega_m / Q = 1e8 / n_th = 1e4 baseline
    const std::vector<SweepMethod> epr_and_witness{SweepMethod::closed_form, SweepMethod::exact, SweepMethod::witness};
    auto stage_cq = [](double cq) {
        Config c;
        c.set("c_q", format17(cq));
        return c;
    };
    if (name == "fig4") {
        p.stages.push_back({Config{}, {SweepAxis::c_q, log_points(1e-2, 1e2, 17), epr_and_witness}});
    } else if (name == "fig5") {
        // Gamma from 10 gamma_m to kappa / 100, in Hz.
        const double gamma_m_hz = 1e6 / 1e8;
        const double kappa_hz = 1e7;
        for (double cq : {0.1, 1.0, 10.0})
            p.stages.push_back({stage_cq(cq), {SweepAxis::gamma, log_points(10.0 * gamma_m_hz, 1e-2 * kappa_hz, 200),
                                               epr_and_witness}});
    } else if (name == "fig6") {
        Config c;
        c.set("g_hz", "15.8e3");
        p.stages.push_back({c, {SweepAxis::n_th, log_points(1e2, 1e6, 17), epr_and_witness}});
    } else if (name == "fig7") {
        for (double cq : {0.1, 1.0, 10.0})
            p.stages.push_back(
                {stage_cq(cq), {SweepAxis::delta, linear_points(-1.0, 0.0, 21), {SweepMethod::exact, SweepMethod::witness}}});
    } else {
        throw ContractViolation("unknown figure preset '" + name + "' (expected fig4, fig5, fig6 or fig7)");
    }
    return p;
}

SweepTable run_preset(const Preset& preset, const Config& overrides) {
    SweepTable out;
    for (const auto& stage : preset.stages) {
        const Config c = merge(merge(preset.base, stage.overrides), overrides);
        auto t = run_sweep(c, stage.spec);
        out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
    }
    return out;
}

std::string table_to_csv(const SweepTable& table, const std::string& timestamp) {
    std::string s;
    if (!timestamp.empty()) s += "# timestamp=" + timestamp + "\n";
    s += "axis";
    for (const auto& c : sweep_columns()) s += "," + c;
    s += ",error\n";
    for (const auto& r : table.rows) {
        s += r.axis;
        for (double v : r.values) s += "," + format17(v);
        s += "," + quote_csv(r.error) + "\n";
    }
    return s;
}

SweepTable table_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool header = false;
    const std::size_t n = sweep_columns().size();
    SweepTable table;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv(line);
        if (fields.size() != n + 2) throw ContractViolation("sweep csv: wrong field count");
        if (!header) {
            for (std::size_t i = 0; i < n; ++i)
                if (fields[i + 1] != sweep_columns()[i]) throw ContractViolation("sweep csv: unexpected header");
            header = true;
            continue;
        }
        SweepRow r;
        r.axis = fields[0];
        for (std::size_t i = 0; i < n; ++i) r.values.push_back(parse_cell(fields[i + 1]));
        r.error = fields.back();
        table.rows.push_back(std::move(r));
    }
    if (!header) throw ContractViolation("sweep csv: missing header");
    return table;
}

std::string table_to_json(const SweepTable& table, const std::string& timestamp) {
    nlohmann::json j;
    j["schema"] = kSweepSchema;
    if (!timestamp.empty()) j["timestamp"] = timestamp;
    j["columns"] = sweep_columns();
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        auto vals = nlohmann::json::array();
        for (double v : r.values) vals.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
        rows.push_back({{"axis", r.axis}, {"values", vals}, {"error", r.error}});
    }
    j["rows"] = rows;
    return j.dump(1) + "\n";
}

SweepTable table_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("schema") != kSweepSchema) throw ContractViolation("sweep json: unsupported schema");
        if (j.at("columns").get<std::vector<std::string>>() != sweep_columns())
            throw ContractViolation("sweep json: unexpected columns");
        SweepTable table;
        for (const auto& jr : j.at("rows")) {
            SweepRow r;
            r.axis = jr.at("axis").get<std::string>();
            for (const auto& v : jr.at("values")) r.values.push_back(v.is_null() ? kNaN : v.get<double>());
            if (r.values.size() != sweep_columns().size()) throw ContractViolation("sweep json: wrong row width");
            r.error = jr.at("error").get<std::string>();
            table.rows.push_back(std::move(r));
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation(std::string("sweep json: ") + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace optoent
