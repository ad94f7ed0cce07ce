// Command-line front end over the C API.

#include "CLI11.hpp"
#include "zinb/zinb.h"

#include <cstdio>
#include <map>
#include <string>

namespace {

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;
};

std::string dashed(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

void add_command(CLI::App& app, Subcommand& sub, const char* name, const char* description) {
    sub.app = app.add_subcommand(name, description);
    sub.app->add_option("--config", sub.config_file, "flat key = value file; flags override it");
    const size_t n = zinb_config_key_count(name);
    for (size_t i = 0; i < n; ++i) {
        const std::string key = zinb_config_key_name(name, i);
        std::string help = zinb_config_key_help(name, i);
        const std::string def = zinb_config_key_default(name, i);
        if (zinb_config_key_is_switch(name, i)) {
            sub.app->add_flag("--" + dashed(key), sub.switches[key], help);
        } else {
            if (!def.empty()) help += " [" + def + "]";
            sub.app->add_option("--" + dashed(key), sub.values[key], help);
        }
    }
}

int run(const char* name, Subcommand& sub) {
    zinb_config* config = nullptr;
    if (zinb_config_create(name, &config) != ZINB_OK) {
        std::fprintf(stderr, "zinb: %s\n", zinb_last_error());
        return ZINB_E_USAGE;
    }
    int status = ZINB_OK;
    if (!sub.config_file.empty()) status = zinb_config_load_file(config, sub.config_file.c_str());
    for (auto& [key, value] : sub.values) {
        if (status != ZINB_OK) break;
        if (sub.app->count("--" + dashed(key)) > 0) status = zinb_config_set(config, key.c_str(), value.c_str());
    }
    for (auto& [key, on] : sub.switches) {
        if (status != ZINB_OK) break;
        if (sub.app->count("--" + dashed(key)) > 0) status = zinb_config_set(config, key.c_str(), on ? "true" : "false");
    }
    if (status == ZINB_OK) status = zinb_run(config);
    if (status == ZINB_W_CONVERGENCE) {
        std::fprintf(stderr, "zinb: warning: %s\n", zinb_last_error());
    } else if (status != ZINB_OK) {
        std::fprintf(stderr, "zinb: %s\n", zinb_last_error());
        if (status == ZINB_E_USAGE) std::fprintf(stderr, "run 'zinb %s --help' for the available settings\n", name);
    }
    zinb_config_destroy(config);
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-inflated negative binomial differential abundance with covariate selection"};
    app.set_version_flag("--version", zinb_version());
    app.require_subcommand(1);

    Subcommand fit, simulate, evaluate, study;
    add_command(app, fit, "fit", "fit the model to count, covariate and group tables");
    add_command(app, simulate, "simulate", "write a synthetic dataset with its truth table");
    add_command(app, evaluate, "evaluate", "score a fit directory against a truth table");
    add_command(app, study, "sim-study", "repeat simulate, fit and evaluate over seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ZINB_E_USAGE;
    }

    if (fit.app->parsed()) return run("fit", fit);
    if (simulate.app->parsed()) return run("simulate", simulate);
    if (evaluate.app->parsed()) return run("evaluate", evaluate);
    return run("sim-study", study);
}
