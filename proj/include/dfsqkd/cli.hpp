#pragma once

// Batch front-end: run configuration, sweeps and reports.

#include "dfsqkd/channel.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dfsqkd::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { fig1_sweep, pns_limit, attack_verify, bounds_table, optimize };

std::string_view to_string(Mode m);

enum ExitStatus : int { kExitOk = 0, kExitConfigError = 1, kExitVerificationFailed = 2 };

struct RunConfig {
    Mode mode = Mode::fig1_sweep;
    double lambda = 0.1;
    double lambda_prime = 0.01;
    double k_db_per_km = 0.2;
    double dark_count = 1e-6;
    double q = 0.5;
    double f_ec = 1.2;
    double l_start = 0.0;
    double l_end = 60.0;
    double l_step = 1.0;
    std::string out;  ///< empty: standard output
    DarkCountTerm eq20_variant = kDefaultDarkCountTerm;
    bool diagnostics = false;
    double attack_tolerance = 1e-10;
    double attack_success = 0.30;
    double tail_bound = 1e-12;
    std::vector<double> grid_lambda{0.05, 0.1, 0.2};
    std::vector<double> grid_lambda_prime{0.01};

    std::vector<double> lengths() const;
};

using Setting = std::pair<std::string, std::string>;

/// Flat `key=value` lines; `#` starts a comment. Unknown keys, malformed
/// values and duplicate keys are ConfigErrors.
std::vector<Setting> parse_settings(std::string_view text);

/// Applies one setting on top of `config`.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Throws ConfigError on violated constraints.
void validate(const RunConfig& config);

/// Defaults, then the file text, then overrides (later wins); validated.
RunConfig parse_config(std::string_view text, const std::vector<Setting>& overrides = {});

inline constexpr std::string_view kFig1Header =
    "L_km,Q_signal,E_signal,S1_lower_nodecoy,e1_upper_nodecoy,R_nodecoy,S1_lower_3int,e1_upper_3int,R_3int";

/// 12 significant digits, scientific.
std::string format_number(double v);

std::string run_fig1_sweep(const RunConfig& config);
std::string run_bounds_table(const RunConfig& config);
std::string run_optimize(const RunConfig& config);

struct Report {
    std::string text;
    bool pass = true;
};

Report run_attack_verify(const RunConfig& config);
Report run_pns_limit(const RunConfig& config);

/// Dispatches on config.mode. CSV modes always pass.
Report run(const RunConfig& config);

/// Writes to config.out, or returns false when output goes to stdout.
bool write_output(const RunConfig& config, const std::string& text);

}  // namespace dfsqkd::cli
