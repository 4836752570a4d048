#include "optoent/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "optoent/error.hpp"

namespace optoent {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ContractViolation("config key '" + key + "': not a number: '" + text + "'");
    return v;
}

} // namespace

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = {
        "omega_m_hz", "kappa_over_omega_m", "q_factor", "n_th",   "g_hz",   "c_q", "delta_over_kappa",
        "eta",        "brownian",           "gamma_hz", "t_sep",  "phi",    "method", "seed", "n_traj",
        "dt",         "threads",            "workers"};
    return keys;
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ContractViolation("unknown config key '" + key + "'");
    values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::erase(const std::string& key) { values_.erase(key); }

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ContractViolation("config key '" + key + "' is not set");
    return it->second;
}

double Config::number(const std::string& key) const { return parse_double(key, get(key)); }

long long Config::integer(const std::string& key) const {
    const std::string& text = get(key);
    long long v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ContractViolation("config key '" + key + "': not an integer: '" + text + "'");
    return v;
}

bool Config::is_opt(const std::string& key) const { return has(key) && get(key) == "opt"; }

Config default_config() {
    Config c;
    c.set("omega_m_hz", "1e6");
    c.set("kappa_over_omega_m", "10");
    c.set("q_factor", "1e8");
    c.set("n_th", "1e4");
    c.set("c_q", "1");
    c.set("delta_over_kappa", "0");
    c.set("eta", "1");
    c.set("brownian", "momentum_only");
    c.set("gamma_hz", "opt");
    c.set("t_sep", "0");
    c.set("phi", "opt");
    c.set("method", "exact");
    c.set("seed", "1");
    c.set("n_traj", "2000");
    c.set("dt", "0");
    c.set("threads", "0");
    c.set("workers", "1");
    return c;
}

Config parse_config(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(number);
        if (eq == std::string::npos) throw ContractViolation(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ContractViolation(where + ": empty value for '" + key + "'");
        if (c.has(key)) throw ContractViolation(where + ": duplicate key '" + key + "'");
        try {
            c.set(key, value);
        } catch (const ContractViolation& e) {
            throw ContractViolation(where + ": " + e.what());
        }
    }
    if (c.has("g_hz") && c.has("c_q")) throw ContractViolation(origin + ": set either g_hz or c_q, not both");
    return c;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

Config merge(const Config& lower, const Config& upper) {
    Config out = lower;
    if (upper.has("g_hz")) out.erase("c_q");
    if (upper.has("c_q")) out.erase("g_hz");
    for (const auto& [k, v] : upper.entries()) out.set(k, v);
    return out;
}

std::string to_text(const Config& config) {
    std::string s;
    for (const auto& [k, v] : config.entries()) s += k + " = " + v + "\n";
    return s;
}

SystemParams system_params(const Config& c) {
    const double q = c.number("q_factor");
    if (!(q > 0.0) || !std::isfinite(q)) throw ContractViolation("q_factor must be positive and finite");
    SystemParams p = params_from_lab_units(c.number("omega_m_hz"), c.number("kappa_over_omega_m"), q,
                                           c.number("n_th"), 0.0, c.number("delta_over_kappa"), c.number("eta"));
    const std::string& b = c.get("brownian");
    if (b == "momentum_only")
        p.brownian = BrownianModel::momentum_only;
    else if (b == "symmetric")
        p.brownian = BrownianModel::symmetric;
    else
        throw ContractViolation("brownian must be momentum_only or symmetric, got '" + b + "'");
    if (c.has("g_hz")) {
        p.g = kTwoPi * c.number("g_hz");
    } else if (c.has("c_q")) {
        p.g = coupling_for_cooperativity(p, c.number("c_q"));
    }
    validate(p);
    return p;
}

PulseParams pulse_params(const Config& c, const SystemParams& params) {
    PulseParams pulse;
    pulse.gamma = c.is_opt("gamma_hz") ? gamma_opt(params) : kTwoPi * c.number("gamma_hz");
    pulse.t_sep = c.number("t_sep");
    pulse.phi = c.is_opt("phi") ? 0.0 : c.number("phi");
    validate(pulse);
    return pulse;
}

std::optional<double> fixed_phi(const Config& c) {
    if (c.is_opt("phi")) return std::nullopt;
    return c.number("phi");
}

EprMethod config_method(const Config& c) { return parse_method(c.get("method")); }

EnsembleOptions ensemble_options(const Config& c) {
    EnsembleOptions o;
    const long long n = c.integer("n_traj");
    if (n < 1) throw ContractViolation("n_traj must be positive");
    o.n_traj = static_cast<int>(n);
    o.dt = c.number("dt");
    if (o.dt < 0.0) throw ContractViolation("dt must be non-negative");
    const long long seed = c.integer("seed");
    if (seed < 0) throw ContractViolation("seed must be non-negative");
    o.seed = static_cast<std::uint64_t>(seed);
    const long long threads = c.integer("threads");
    if (threads < 0) throw ContractViolation("threads must be non-negative");
    o.threads = static_cast<unsigned>(threads);
    return o;
}

unsigned sweep_workers(const Config& c) {
    const long long w = c.integer("workers");
    if (w < 1 || w > 256) throw ContractViolation("workers must lie in [1, 256]");
    return static_cast<unsigned>(w);
}

} // namespace optoent
