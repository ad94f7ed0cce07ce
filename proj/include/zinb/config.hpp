#ifndef ZINB_CONFIG_HPP
#define ZINB_CONFIG_HPP

#include "zinb/data_model.hpp"
#include "zinb/normalization.hpp"
#include "zinb/simgen.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace zinb {

enum class Command { Fit, Simulate, Evaluate, SimStudy };

Command parse_command(const std::string& name);
const char* command_name(Command command);

struct KeySpec {
    const char* key;
    const char* default_value;
    unsigned commands;  // bit (1 << Command)
    bool is_switch;     // boolean given without a value on the command line
    const char* help;
};

/// Every recognized key, in the order used by run_config.resolved.
const std::vector<KeySpec>& key_specs();
std::vector<const KeySpec*> keys_for(Command command);

enum class Source { Default, File, Flag };
const char* source_name(Source source);

/**
 * Key/value settings for one command. Later layers win: defaults, then a flat
 * `key = value` file, then flags.
 */
class ConfigLayers {
public:
    explicit ConfigLayers(Command command);

    Command command() const noexcept { return command_; }
    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin);
    void set(const std::string& key, const std::string& value, Source source = Source::Flag);

    const std::string& value(const std::string& key) const;
    Source source(const std::string& key) const;
    bool is_set(const std::string& key) const { return source(key) != Source::Default; }

    /// `key = value  # source` lines for every key of the command.
    std::string resolved_text() const;

private:
    struct Entry {
        std::string value;
        Source source = Source::Default;
    };
    Command command_;
    std::map<std::string, Entry> entries_;
    std::vector<std::string> order_;
};

struct RunConfig {
    Command command = Command::Fit;
    std::string output = "zinb_out";
    std::uint64_t seed = 1;
    unsigned threads = 0;

    std::string counts_path, covariates_path, groups_path;
    NormOptions norm;
    int reference_group = 1;
    int min_count = 2;
    int min_groups = 0;  // 0: all groups
    Hyperparameters hp;
    ProposalScales scales;
    int chains = 4;
    int iterations = 20000;
    int burn_in = -1;
    int thin = 1;
    std::vector<std::uint64_t> chain_seeds;  // empty: derived from seed
    double fdr = 0.05;
    double concordance_floor = 0.95;
    bool prior_only = false;
    bool adapt = false;
    bool trace = false;

    SimConfig sim;
    std::string pool_covariates_path, pool_groups_path;

    std::string fit_dir, truth_path;
    int reps = 10;

    std::string resolved_text;

    /// Seeds of the chains for a run whose base seed is `base`.
    std::vector<std::uint64_t> seeds_for(std::uint64_t base) const;
};

/// Typed view; throws InvalidValue naming the key, MissingInput for absent paths.
RunConfig resolve(const ConfigLayers& layers);

}  // namespace zinb

#endif
