#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optoent/epr.hpp"
#include "optoent/model.hpp"
#include "optoent/montecarlo.hpp"
#include "optoent/pulses.hpp"

namespace optoent {

// Flat key = value settings. Lines starting with '#' are comments. Physical
// inputs use lab units (Hz for frequencies, seconds for t_sep). The special
// value "opt" for gamma_hz and phi selects the optimizer.
//
// Recognized keys:
//   omega_m_hz kappa_over_omega_m q_factor n_th g_hz c_q delta_over_kappa eta
//   brownian gamma_hz t_sep phi method seed n_traj dt threads workers
class Config {
public:
    static const std::vector<std::string>& known_keys();

    // Throws ContractViolation for unknown keys.
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    void erase(const std::string& key);
    const std::string& get(const std::string& key) const;

    double number(const std::string& key) const;
    long long integer(const std::string& key) const;
    // True when the key holds the literal "opt".
    bool is_opt(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

Config default_config();

// `origin` labels error messages (usually the file path).
Config parse_config(const std::string& text, const std::string& origin = "<config>");
Config load_config_file(const std::string& path);

// Entries of `upper` win. g_hz and c_q are alternatives: whichever one the
// upper layer sets removes the other from the lower one.
Config merge(const Config& lower, const Config& upper);

std::string to_text(const Config& config);

SystemParams system_params(const Config& config);
// gamma = "opt" resolves to gamma_opt(params); phi = "opt" is reported as nullopt.
PulseParams pulse_params(const Config& config, const SystemParams& params);
std::optional<double> fixed_phi(const Config& config);
EprMethod config_method(const Config& config);
EnsembleOptions ensemble_options(const Config& config);
unsigned sweep_workers(const Config& config);

} // namespace optoent
