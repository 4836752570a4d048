#pragma once

#include <string>
#include <vector>

#include "optoent/config.hpp"

namespace optoent {

// Axis units: g and gamma in Hz (g/2pi, Gamma/2pi), delta as delta/kappa,
// t_sep in seconds, the rest dimensionless.
enum class SweepAxis { g, c_q, gamma, n_th, delta, eta, t_sep };
enum class SweepMethod { closed_form, exact, matrix_form, witness, montecarlo };

const char* axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);
const char* sweep_method_name(SweepMethod method);
SweepMethod parse_sweep_method(const std::string& name);

std::vector<double> linear_points(double min, double max, int count);
std::vector<double> log_points(double min, double max, int count);

struct SweepSpec {
    SweepAxis axis = SweepAxis::c_q;
    std::vector<double> points;
    std::vector<SweepMethod> methods;
};

// Throws ContractViolation for an empty grid, an empty method list or
// axis values outside the parameter invariants.
void validate(const SweepSpec& spec);

struct SweepRow {
    std::string axis;
    std::vector<double> values;  // aligned with sweep_columns(); NaN where not computed
    std::string error;           // empty when every requested method succeeded
};

struct SweepTable {
    std::vector<SweepRow> rows;

    // Column lookup by name; throws ContractViolation for unknown names.
    double at(std::size_t row, const std::string& column) const;
    std::vector<double> column(const std::string& name) const;
};

// Fixed numeric column order, shared by every table:
// axis_value c_q, then epr/gamma/phi/entangled for closed_form, exact and
// matrix_form, witness gamma_witness_hz log_negativity ppt_entangled,
// mc_duan mc_stderr gamma_mc_hz phi_mc. Bandwidths are Gamma/2pi in Hz and
// flags are 0/1.
const std::vector<std::string>& sweep_columns();

// EPR columns minimize over Gamma (and phi) unless the config fixes them or
// the axis is gamma. Off resonance the exact and matrix_form columns come
// from the covariance assembly. Rows are computed by `sweep_workers(config)`
// threads and returned in grid order. Per-point failures land in the error
// column instead of aborting.
SweepTable run_sweep(const Config& config, const SweepSpec& spec);

struct SweepStage {
    Config overrides;
    SweepSpec spec;
};

struct Preset {
    std::string name;
    Config base;
    std::vector<SweepStage> stages;
};

const std::vector<std::string>& preset_names();
Preset figure_preset(const std::string& name);
// Runs every stage of a preset and concatenates the rows. `overrides` is
// merged on top of the preset base (e.g. worker count).
SweepTable run_preset(const Preset& preset, const Config& overrides = {});

// Emission. Values are written with 17 significant digits; NaN becomes an
// empty CSV cell or JSON null. `timestamp` adds one leading metadata line
// (CSV) or field (JSON); pass an empty string to omit it.
std::string table_to_csv(const SweepTable& table, const std::string& timestamp = {});
std::string table_to_json(const SweepTable& table, const std::string& timestamp = {});
SweepTable table_from_csv(const std::string& text);
SweepTable table_from_json(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);

inline constexpr const char* kSweepSchema = "optoent.sweep/1";

} // namespace optoent
