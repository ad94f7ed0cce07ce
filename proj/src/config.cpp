#include "zinb/config.hpp"

#include "zinb/error.hpp"
#include "zinb/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace zinb {

namespace {

constexpr unsigned kFit = 1u << static_cast<unsigned>(Command::Fit);
constexpr unsigned kSim = 1u << static_cast<unsigned>(Command::Simulate);
constexpr unsigned kEval = 1u << static_cast<unsigned>(Command::Evaluate);
constexpr unsigned kStudy = 1u << static_cast<unsigned>(Command::SimStudy);
constexpr unsigned kAll = kFit | kSim | kEval | kStudy;
constexpr unsigned kModel = kFit | kStudy;
constexpr unsigned kGen = kSim | kStudy;

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw Error(ErrorCode::InvalidValue, key + " = \"" + value + "\": " + why);
}

long long as_int(const std::string& key, const std::string& v, long long lo, long long hi) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "expected an integer");
    if (out < lo || out > hi) bad(key, v, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return out;
}

std::uint64_t as_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "expected a non-negative integer");
    return out;
}

double as_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
        bad(key, v, "expected a finite number");
    }
    return out;
}

double as_positive(const std::string& key, const std::string& v) {
    const double out = as_double(key, v);
    if (!(out > 0.0)) bad(key, v, "must be > 0");
    return out;
}

bool as_bool(const std::string& key, const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    bad(key, v, "expected true or false");
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "fit") return Command::Fit;
    if (name == "simulate") return Command::Simulate;
    if (name == "evaluate") return Command::Evaluate;
    if (name == "sim-study" || name == "sim_study") return Command::SimStudy;
    throw Error(ErrorCode::UnknownFlag, "unknown command " + name);
}

const char* command_name(Command command) {
    switch (command) {
        case Command::Fit: return "fit";
        case Command::Simulate: return "simulate";
        case Command::Evaluate: return "evaluate";
        case Command::SimStudy: return "sim-study";
    }
    return "?";
}

const char* source_name(Source source) {
    switch (source) {
        case Source::Default: return "default";
        case Source::File: return "file";
        case Source::Flag: return "flag";
    }
    return "?";
}

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"output", "zinb_out", kAll, false, "output directory"},
        {"seed", "1", kFit | kGen, false, "base random seed"},
        {"threads", "0", kModel, false, "worker threads (0: ZINB_THREADS or all cores)"},
        {"counts", "", kFit, false, "count table: sample_id then one integer column per feature"},
        {"covariates", "", kFit, false, "covariate table: sample_id then numeric columns"},
        {"groups", "", kFit, false, "group table: sample_id, integer label 1..K"},
        {"reference_group", "1", kFit, false, "group without a shift"},
        {"norm", "css", kModel, false, "size factors: css, gmpr, q75, tmm, rle"},
        {"l_css", "50", kModel, false, "CSS percentile"},
        {"min_count", "2", kModel, false, "filter: nonzero samples required per group"},
        {"min_groups", "all", kModel, false, "filter: groups that must meet min_count"},
        {"chains", "4", kModel, false, "independent chains"},
        {"iterations", "20000", kModel, false, "sweeps per chain"},
        {"burn_in", "auto", kModel, false, "discarded sweeps (auto: half)"},
        {"thin", "1", kModel, false, "keep every thin-th draw"},
        {"chain_seeds", "", kFit, false, "comma-separated chain seeds (default: derived from seed)"},
        {"fdr", "0.05", kModel, false, "Bayesian FDR target"},
        {"concordance_floor", "0.95", kModel, false, "minimum pairwise PPI correlation"},
        {"prior_only", "false", kFit, true, "drop the likelihood"},
        {"adapt", "false", kModel, true, "tune proposal scales during burn-in"},
        {"trace", "false", kFit, true, "write per-sweep diagnostics per chain"},
        {"a_pi", "1", kModel, false, "extra-zero Beta shape a"},
        {"b_pi", "1", kModel, false, "extra-zero Beta shape b"},
        {"a_omega", "0.2", kModel, false, "discriminator Beta shape a"},
        {"b_omega", "1.8", kModel, false, "discriminator Beta shape b"},
        {"a_p", "0.4", kModel, false, "association Beta shape a"},
        {"b_p", "0.6", kModel, false, "association Beta shape b"},
        {"a_phi", "1", kModel, false, "dispersion Gamma shape"},
        {"b_phi", "0.01", kModel, false, "dispersion Gamma rate"},
        {"sigma0_sq", "100", kModel, false, "baseline prior variance"},
        {"a_t", "2", kModel, false, "slab inverse-gamma shape"},
        {"b_t", "10", kModel, false, "slab inverse-gamma scale"},
        {"tau_mu0", "0.5", kModel, false, "baseline proposal sd"},
        {"tau_mu", "1", kModel, false, "group shift proposal sd"},
        {"tau_beta", "1", kModel, false, "covariate effect proposal sd"},
        {"tau_phi", "1", kModel, false, "dispersion proposal sd"},
        {"n", "60", kGen, false, "samples (even)"},
        {"p", "100", kGen, false, "features"},
        {"n_disc", "20", kGen, false, "true discriminators"},
        {"sigma_e", "1", kGen, false, "log-scale noise sd"},
        {"pi0", "0.4", kGen, false, "structural zero fraction"},
        {"n_cov", "7", kGen, false, "covariates"},
        {"m_active", "4", kGen, false, "active covariates per feature"},
        {"total_min", "20000000", kGen, false, "smallest library size"},
        {"total_max", "60000000", kGen, false, "largest library size"},
        {"pool_covariates", "", kGen, false, "covariate pool to resample (default: standard normal)"},
        {"pool_groups", "", kGen, false, "group labels of the pool rows"},
        {"fit_dir", "", kEval, false, "directory written by fit"},
        {"truth", "", kEval, false, "truth table written by simulate"},
        {"reps", "10", kStudy, false, "replicates"},
    };
    return specs;
}

std::vector<const KeySpec*> keys_for(Command command) {
    const unsigned bit = 1u << static_cast<unsigned>(command);
    std::vector<const KeySpec*> out;
    for (const auto& s : key_specs()) {
        if (s.commands & bit) out.push_back(&s);
    }
    return out;
}

ConfigLayers::ConfigLayers(Command command) : command_(command) {
    for (const auto* s : keys_for(command)) {
        entries_[s->key] = Entry{s->default_value, Source::Default};
        order_.push_back(s->key);
    }
}

void ConfigLayers::set(const std::string& raw_key, const std::string& value, Source source) {
    const auto key = normalize_key(raw_key);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw Error(ErrorCode::UnknownFlag, key + " is not a setting of " + command_name(command_));
    }
    it->second = Entry{value, source};
}

void ConfigLayers::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (line[c] == '#' && (c == 0 || line[c - 1] == ' ' || line[c - 1] == '\t')) {
                line.erase(c);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidValue, origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = normalize_key(trim(line.substr(0, eq)));
        try {
            set(key, trim(line.substr(eq + 1)), Source::File);
        } catch (const Error& e) {
            throw Error(e.code(), origin + ":" + std::to_string(line_no) + ": " + key + " is not a setting of " +
                                      command_name(command_));
        }
    }
}

void ConfigLayers::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingInput, "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path);
}

const std::string& ConfigLayers::value(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorCode::UnknownFlag, key);
    return it->second.value;
}

Source ConfigLayers::source(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorCode::UnknownFlag, key);
    return it->second.source;
}

std::string ConfigLayers::resolved_text() const {
    std::string out = "# command = ";
    out += command_name(command_);
    out += '\n';
    for (const auto& key : order_) {
        const auto& e = entries_.at(key);
        out += key + " = " + e.value + "  # " + source_name(e.source) + "\n";
    }
    return out;
}

std::vector<std::uint64_t> RunConfig::seeds_for(std::uint64_t base) const {
    std::vector<std::uint64_t> out;
    for (int c = 0; c < chains; ++c) out.push_back(derive_seed(base, 1000 + static_cast<std::uint64_t>(c)));
    return out;
}

RunConfig resolve(const ConfigLayers& layers) {
    RunConfig rc;
    rc.command = layers.command();
    rc.resolved_text = layers.resolved_text();
    const unsigned bit = 1u << static_cast<unsigned>(rc.command);
    auto has = [&](const char* key) {
        for (const auto& s : key_specs()) {
            if (std::string(s.key) == key) return (s.commands & bit) != 0;
        }
        return false;
    };
    auto v = [&](const char* key) { return layers.value(key); };
    auto path = [&](const char* key) {
        const auto& p = layers.value(key);
        if (p.empty()) throw Error(ErrorCode::MissingInput, std::string("--") + key + " is required");
        return p;
    };
    constexpr long long kIntMax = std::numeric_limits<int>::max();

    rc.output = v("output");
    if (rc.output.empty()) bad("output", rc.output, "must not be empty");
    if (has("seed")) rc.seed = as_u64("seed", v("seed"));
    if (has("threads")) rc.threads = static_cast<unsigned>(as_int("threads", v("threads"), 0, 1024));

    if (rc.command == Command::Fit) {
        std::vector<std::string> missing;
        for (const char* key : {"counts", "covariates", "groups"}) {
            if (layers.value(key).empty()) missing.push_back(std::string("--") + key);
        }
        if (!missing.empty()) {
            std::string msg = "fit requires";
            for (const auto& m : missing) msg += " " + m;
            throw Error(ErrorCode::MissingInput, msg);
        }
        rc.counts_path = v("counts");
        rc.covariates_path = v("covariates");
        rc.groups_path = v("groups");
        rc.reference_group = static_cast<int>(as_int("reference_group", v("reference_group"), 1, 1000000));
        rc.prior_only = as_bool("prior_only", v("prior_only"));
        rc.trace = as_bool("trace", v("trace"));
        const auto seeds = v("chain_seeds");
        if (!seeds.empty()) {
            std::stringstream ss(seeds);
            std::string item;
            while (std::getline(ss, item, ',')) rc.chain_seeds.push_back(as_u64("chain_seeds", trim(item)));
        }
    }

    if (has("norm")) {
        try {
            rc.norm.method = parse_norm_method(v("norm"));
        } catch (const Error&) {
            bad("norm", v("norm"), "expected css, gmpr, q75, tmm or rle");
        }
        rc.norm.l_css = static_cast<int>(as_int("l_css", v("l_css"), 1, 100));
        rc.min_count = static_cast<int>(as_int("min_count", v("min_count"), 1, kIntMax));
        rc.min_groups = v("min_groups") == "all" ? 0 : static_cast<int>(as_int("min_groups", v("min_groups"), 1, kIntMax));
        rc.chains = static_cast<int>(as_int("chains", v("chains"), 1, 1024));
        rc.iterations = static_cast<int>(as_int("iterations", v("iterations"), 1, kIntMax));
        rc.burn_in = v("burn_in") == "auto" ? -1 : static_cast<int>(as_int("burn_in", v("burn_in"), 0, kIntMax));
        if (rc.burn_in >= rc.iterations) bad("burn_in", v("burn_in"), "must be smaller than iterations");
        rc.thin = static_cast<int>(as_int("thin", v("thin"), 1, kIntMax));
        rc.fdr = as_double("fdr", v("fdr"));
        if (!(rc.fdr > 0.0 && rc.fdr < 1.0)) bad("fdr", v("fdr"), "must lie in (0, 1)");
        rc.concordance_floor = as_double("concordance_floor", v("concordance_floor"));
        if (!(rc.concordance_floor >= -1.0 && rc.concordance_floor <= 1.0)) {
            bad("concordance_floor", v("concordance_floor"), "must lie in [-1, 1]");
        }
        rc.adapt = as_bool("adapt", v("adapt"));
        auto& hp = rc.hp;
        hp.a_pi = as_positive("a_pi", v("a_pi"));
        hp.b_pi = as_positive("b_pi", v("b_pi"));
        hp.a_omega = as_positive("a_omega", v("a_omega"));
        hp.b_omega = as_positive("b_omega", v("b_omega"));
        hp.a_p = as_positive("a_p", v("a_p"));
        hp.b_p = as_positive("b_p", v("b_p"));
        hp.a_phi = as_positive("a_phi", v("a_phi"));
        hp.b_phi = as_positive("b_phi", v("b_phi"));
        hp.sigma0_sq = as_positive("sigma0_sq", v("sigma0_sq"));
        hp.a_t = as_positive("a_t", v("a_t"));
        hp.b_t = as_positive("b_t", v("b_t"));
        auto& sc = rc.scales;
        sc.tau_mu0 = as_positive("tau_mu0", v("tau_mu0"));
        sc.tau_mu = as_positive("tau_mu", v("tau_mu"));
        sc.tau_beta = as_positive("tau_beta", v("tau_beta"));
        sc.tau_phi = as_positive("tau_phi", v("tau_phi"));
    }
    if (!rc.chain_seeds.empty()) {
        if (static_cast<int>(rc.chain_seeds.size()) != rc.chains) {
            bad("chain_seeds", v("chain_seeds"), "needs one seed per chain (" + std::to_string(rc.chains) + ")");
        }
        std::set<std::uint64_t> distinct(rc.chain_seeds.begin(), rc.chain_seeds.end());
        if (distinct.size() != rc.chain_seeds.size()) bad("chain_seeds", v("chain_seeds"), "seeds must be distinct");
    }

    if (has("n")) {
        auto& s = rc.sim;
        s.n = static_cast<int>(as_int("n", v("n"), 4, kIntMax));
        if (s.n % 2) bad("n", v("n"), "must be even");
        s.p = static_cast<int>(as_int("p", v("p"), 1, kIntMax));
        s.n_disc = static_cast<int>(as_int("n_disc", v("n_disc"), 0, s.p));
        s.sigma_e = as_double("sigma_e", v("sigma_e"));
        if (s.sigma_e < 0.0) bad("sigma_e", v("sigma_e"), "must be >= 0");
        s.pi0 = as_double("pi0", v("pi0"));
        if (!(s.pi0 >= 0.0 && s.pi0 < 1.0)) bad("pi0", v("pi0"), "must lie in [0, 1)");
        s.n_cov = static_cast<int>(as_int("n_cov", v("n_cov"), 1, 100000));
        s.m_active = static_cast<int>(as_int("m_active", v("m_active"), 0, s.n_cov));
        s.total_min = as_int("total_min", v("total_min"), 1, std::numeric_limits<std::int64_t>::max() / 2);
        s.total_max = as_int("total_max", v("total_max"), s.total_min, std::numeric_limits<std::int64_t>::max() / 2);
        s.seed = rc.seed;
        rc.pool_covariates_path = v("pool_covariates");
        rc.pool_groups_path = v("pool_groups");
        if (rc.pool_covariates_path.empty() != rc.pool_groups_path.empty()) {
            throw Error(ErrorCode::MissingInput, "pool_covariates and pool_groups must be given together");
        }
    }

    if (rc.command == Command::Evaluate) {
        rc.fit_dir = path("fit_dir");
        rc.truth_path = path("truth");
    }
    if (rc.command == Command::SimStudy) rc.reps = static_cast<int>(as_int("reps", v("reps"), 1, 1000000));
    return rc;
}

}  // namespace zinb
