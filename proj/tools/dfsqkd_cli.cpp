// Command-line front-end for the DFS decoy-state analysis.

#include "dfsqkd/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace cli = dfsqkd::cli;

int main(int argc, char** argv) {
    CLI::App app{"Decoy-state key-rate analysis for DFS-encoded photon pairs"};
    app.option_defaults()->always_capture_default(false);

    std::string config_path;
    app.add_option("--config", config_path, "flat key=value configuration file");

    // flag name -> config key; values are parsed by the config layer so file
    // and command line share one validation path
    const std::vector<std::pair<std::string, std::string>> value_flags{
        {"--mode", "mode"},
        {"--out", "out"},
        {"--lambda", "lambda"},
        {"--lambda-prime", "lambda_prime"},
        {"--k-db-per-km", "k_db_per_km"},
        {"--dark-count", "dark_count"},
        {"--f-ec", "f_ec"},
        {"--l-start", "l_start"},
        {"--l-end", "l_end"},
        {"--l-step", "l_step"},
        {"--eq20-variant", "eq20_variant"},
    };
    std::vector<std::string> values(value_flags.size());
    std::vector<CLI::Option*> options;
    for (std::size_t i = 0; i < value_flags.size(); ++i) {
        options.push_back(app.add_option(value_flags[i].first, values[i]));
    }
    bool diagnostics = false;
    auto* diag = app.add_flag("--diagnostics", diagnostics, "add pre-clamp columns to the sweep CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfigError;
    }

    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw cli::ConfigError("cannot read config file '" + config_path + "'");
            std::ostringstream buf;
            buf << f.rdbuf();
            text = buf.str();
        }
        std::vector<cli::Setting> overrides;
        for (std::size_t i = 0; i < value_flags.size(); ++i) {
            if (options[i]->count() > 0) overrides.emplace_back(value_flags[i].second, values[i]);
        }
        if (diag->count() > 0) overrides.emplace_back("diagnostics", diagnostics ? "true" : "false");

        const auto config = cli::parse_config(text, overrides);
        const auto report = cli::run(config);
        if (!cli::write_output(config, report.text)) std::cout << report.text;
        return report.pass ? cli::kExitOk : cli::kExitVerificationFailed;
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitConfigError;
    }
}
