#include "zinb/zinb.h"

#include "zinb/commands.hpp"
#include "zinb/config.hpp"
#include "zinb/error.hpp"
#include "zinb/evaluation.hpp"
#include "zinb/inference.hpp"
#include "zinb/io.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

struct zinb_config {
    zinb::ConfigLayers layers;
};

struct zinb_dataset {
    zinb::CountMatrix counts;
    zinb::CovariateMatrix covariates;
    std::vector<int> labels;
};

struct zinb_fit {
    zinb::FitResult result;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_kind;

void clear_error() {
    last_error.clear();
    last_kind.clear();
}

zinb_status fail(zinb_status status, const char* kind, const std::string& message) {
    last_kind = kind;
    last_error = message;
    return status;
}

zinb_status null_arg(const char* name) {
    return fail(ZINB_E_USAGE, "InvalidArgument", std::string("null argument: ") + name);
}

/// Runs fn, mapping exceptions to status codes.
template <typename Fn>
zinb_status guarded(Fn&& fn) {
    clear_error();
    try {
        return fn();
    } catch (const zinb::Error& e) {
        return fail(static_cast<zinb_status>(zinb::exit_code_for(e.code())), zinb::error_code_name(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(ZINB_E_NUMERICAL, "OutOfMemory", "out of memory");
    } catch (const std::exception& e) {
        return fail(ZINB_E_NUMERICAL, "Internal", e.what());
    }
}

std::optional<zinb::Command> command_of(const char* name) {
    if (!name) return std::nullopt;
    try {
        return zinb::parse_command(name);
    } catch (const zinb::Error&) {
        return std::nullopt;
    }
}

const zinb::KeySpec* key_at(const char* command, size_t index) {
    auto c = command_of(command);
    if (!c) return nullptr;
    auto keys = zinb::keys_for(*c);
    return index < keys.size() ? keys[index] : nullptr;
}

std::vector<std::string> default_ids(const char* prefix, size_t count, const char* const* given) {
    std::vector<std::string> out;
    for (size_t i = 0; i < count; ++i) out.push_back(given && given[i] ? given[i] : prefix + std::to_string(i + 1));
    return out;
}

zinb_status check_len(size_t have, size_t need) {
    if (have < need) {
        return fail(ZINB_E_USAGE, "InvalidArgument",
                    "buffer holds " + std::to_string(have) + " values, need " + std::to_string(need));
    }
    return ZINB_OK;
}

}  // namespace

extern "C" {

const char* zinb_version(void) { return "1.0.0"; }

const char* zinb_last_error(void) { return last_error.c_str(); }

const char* zinb_last_error_kind(void) { return last_kind.c_str(); }

zinb_status zinb_config_create(const char* command, zinb_config** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        if (!command) return null_arg("command");
        auto c = zinb::parse_command(command);
        *out = new zinb_config{zinb::ConfigLayers(c)};
        return ZINB_OK;
    });
}

void zinb_config_destroy(zinb_config* config) { delete config; }

zinb_status zinb_config_load_file(zinb_config* config, const char* path) {
    if (!config) return null_arg("config");
    if (!path) return null_arg("path");
    return guarded([&] {
        config->layers.load_file(path);
        return ZINB_OK;
    });
}

zinb_status zinb_config_set(zinb_config* config, const char* key, const char* value) {
    if (!config) return null_arg("config");
    if (!key) return null_arg("key");
    if (!value) return null_arg("value");
    return guarded([&] {
        config->layers.set(key, value, zinb::Source::Flag);
        return ZINB_OK;
    });
}

zinb_status zinb_config_get(const zinb_config* config, const char* key, char* buf, size_t buf_len, size_t* needed) {
    if (!config) return null_arg("config");
    if (!key) return null_arg("key");
    return guarded([&] {
        std::string k = key;
        for (auto& ch : k) {
            if (ch == '-') ch = '_';
        }
        const auto& v = config->layers.value(k);
        if (needed) *needed = v.size();
        if (buf && buf_len > 0) {
            const size_t n = std::min(buf_len - 1, v.size());
            std::memcpy(buf, v.data(), n);
            buf[n] = '\0';
        }
        return ZINB_OK;
    });
}

size_t zinb_config_key_count(const char* command) {
    auto c = command_of(command);
    return c ? zinb::keys_for(*c).size() : 0;
}

const char* zinb_config_key_name(const char* command, size_t index) {
    auto k = key_at(command, index);
    return k ? k->key : nullptr;
}

const char* zinb_config_key_default(const char* command, size_t index) {
    auto k = key_at(command, index);
    return k ? k->default_value : nullptr;
}

const char* zinb_config_key_help(const char* command, size_t index) {
    auto k = key_at(command, index);
    return k ? k->help : nullptr;
}

int zinb_config_key_is_switch(const char* command, size_t index) {
    auto k = key_at(command, index);
    return k && k->is_switch ? 1 : 0;
}

zinb_status zinb_run(const zinb_config* config) {
    if (!config) return null_arg("config");
    return guarded([&] {
        const auto rc = zinb::resolve(config->layers);
        const int code = zinb::run_command(rc);
        if (code == ZINB_W_CONVERGENCE) {
            fail(ZINB_W_CONVERGENCE, "ConvergenceWarning",
                 "pairwise PPI correlation below the floor; see convergence.csv");
        }
        return static_cast<zinb_status>(code);
    });
}

zinb_status zinb_dataset_create(size_t n, size_t p, size_t r, const int64_t* counts, const double* covariates,
                                const int* labels, const char* const* sample_ids, const char* const* feature_ids,
                                const char* const* covariate_ids, zinb_dataset** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    if (!counts) return null_arg("counts");
    if (!covariates) return null_arg("covariates");
    if (!labels) return null_arg("labels");
    return guarded([&] {
        zinb::Matrix<std::int64_t> y(n, p);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < p; ++j) y(i, j) = counts[i * p + j];
        }
        zinb::Matrix<double> x(n, r);
        for (size_t i = 0; i < n; ++i) {
            for (size_t c = 0; c < r; ++c) x(i, c) = covariates[i * r + c];
        }
        auto ds = std::make_unique<zinb_dataset>(zinb_dataset{
            zinb::CountMatrix(std::move(y), default_ids("S", n, sample_ids), default_ids("F", p, feature_ids)),
            zinb::CovariateMatrix(std::move(x), default_ids("X", r, covariate_ids)), std::vector<int>(labels, labels + n)});
        *out = ds.release();
        return ZINB_OK;
    });
}

zinb_status zinb_dataset_load(const char* counts_path, const char* covariates_path, const char* groups_path,
                              zinb_dataset** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    if (!counts_path || !covariates_path || !groups_path) return null_arg("path");
    return guarded([&] {
        auto aligned = zinb::align_by_sample(zinb::read_counts(counts_path), zinb::read_covariates(covariates_path),
                                             zinb::read_groups(groups_path));
        *out = new zinb_dataset{std::move(aligned.counts), std::move(aligned.covariates), std::move(aligned.labels)};
        return ZINB_OK;
    });
}

void zinb_dataset_destroy(zinb_dataset* dataset) { delete dataset; }

size_t zinb_dataset_samples(const zinb_dataset* dataset) { return dataset ? dataset->counts.n() : 0; }
size_t zinb_dataset_features(const zinb_dataset* dataset) { return dataset ? dataset->counts.p() : 0; }
size_t zinb_dataset_covariates(const zinb_dataset* dataset) { return dataset ? dataset->covariates.r() : 0; }

zinb_status zinb_fit_run(const zinb_dataset* dataset, const zinb_config* config, zinb_fit** out) {
    if (!out) return null_arg("out");
    *out = nullptr;
    if (!dataset) return null_arg("dataset");
    if (!config) return null_arg("config");
    return guarded([&] {
        if (config->layers.command() != zinb::Command::Fit) {
            return fail(ZINB_E_USAGE, "InvalidArgument", "zinb_fit_run needs a fit config");
        }
        zinb::ConfigLayers layers = config->layers;
        for (const char* key : {"counts", "covariates", "groups"}) {
            if (!layers.is_set(key)) layers.set(key, "-", zinb::Source::Default);
        }
        const auto rc = zinb::resolve(layers);
        const auto seeds = rc.chain_seeds.empty() ? rc.seeds_for(rc.seed) : rc.chain_seeds;
        auto result = zinb::fit_dataset(dataset->counts, dataset->covariates, dataset->labels, rc, seeds, rc.threads);
        const bool converged = !result.concordance || result.concordance->converged;
        *out = new zinb_fit{std::move(result)};
        if (!converged) return fail(ZINB_W_CONVERGENCE, "ConvergenceWarning", "pairwise PPI correlation below the floor");
        return ZINB_OK;
    });
}

void zinb_fit_destroy(zinb_fit* fit) { delete fit; }

size_t zinb_fit_features(const zinb_fit* fit) { return fit ? fit->result.summary.p : 0; }
size_t zinb_fit_covariates(const zinb_fit* fit) { return fit ? fit->result.summary.n_cov : 0; }

zinb_status zinb_fit_feature_index(const zinb_fit* fit, size_t* out, size_t len) {
    if (!fit) return null_arg("fit");
    if (!out) return null_arg("out");
    clear_error();
    const auto& idx = fit->result.retained;
    if (auto s = check_len(len, idx.size())) return s;
    std::copy(idx.begin(), idx.end(), out);
    return ZINB_OK;
}

zinb_status zinb_fit_ppi_gamma(const zinb_fit* fit, double* out, size_t len) {
    if (!fit) return null_arg("fit");
    if (!out) return null_arg("out");
    clear_error();
    const auto& v = fit->result.summary.ppi_gamma;
    if (auto s = check_len(len, v.size())) return s;
    std::copy(v.begin(), v.end(), out);
    return ZINB_OK;
}

zinb_status zinb_fit_selected_gamma(const zinb_fit* fit, uint8_t* out, size_t len) {
    if (!fit) return null_arg("fit");
    if (!out) return null_arg("out");
    clear_error();
    const auto& v = fit->result.summary.selected_gamma;
    if (auto s = check_len(len, v.size())) return s;
    std::copy(v.begin(), v.end(), out);
    return ZINB_OK;
}

zinb_status zinb_fit_ppi_delta(const zinb_fit* fit, double* out, size_t len) {
    if (!fit) return null_arg("fit");
    if (!out) return null_arg("out");
    clear_error();
    const auto& m = fit->result.summary.ppi_delta;
    if (auto s = check_len(len, m.rows() * m.cols())) return s;
    for (size_t r = 0; r < m.rows(); ++r) {
        for (size_t j = 0; j < m.cols(); ++j) out[r * m.cols() + j] = m(r, j);
    }
    return ZINB_OK;
}

zinb_status zinb_fit_selected_delta(const zinb_fit* fit, uint8_t* out, size_t len) {
    if (!fit) return null_arg("fit");
    if (!out) return null_arg("out");
    clear_error();
    const auto& m = fit->result.summary.selected_delta;
    if (auto s = check_len(len, m.rows() * m.cols())) return s;
    for (size_t r = 0; r < m.rows(); ++r) {
        for (size_t j = 0; j < m.cols(); ++j) out[r * m.cols() + j] = m(r, j);
    }
    return ZINB_OK;
}

zinb_status zinb_fit_thresholds(const zinb_fit* fit, double* gamma, double* delta) {
    if (!fit) return null_arg("fit");
    clear_error();
    if (gamma) *gamma = fit->result.summary.threshold_gamma;
    if (delta) *delta = fit->result.summary.threshold_delta;
    return ZINB_OK;
}

int zinb_fit_converged(const zinb_fit* fit) {
    if (!fit) return 0;
    return !fit->result.concordance || fit->result.concordance->converged ? 1 : 0;
}

zinb_status zinb_fit_write(const zinb_fit* fit, const zinb_config* config, const char* directory) {
    if (!fit) return null_arg("fit");
    if (!config) return null_arg("config");
    if (!directory) return null_arg("directory");
    return guarded([&] {
        zinb::ConfigLayers layers = config->layers;
        for (const char* key : {"counts", "covariates", "groups"}) {
            if (!layers.is_set(key)) layers.set(key, "-", zinb::Source::Default);
        }
        zinb::write_fit_outputs(fit->result, zinb::resolve(layers), directory);
        return ZINB_OK;
    });
}

zinb_status zinb_bayesian_fdr(const double* ppi, size_t m, double target, uint8_t* selected, double* threshold) {
    if (!ppi && m > 0) return null_arg("ppi");
    return guarded([&] {
        auto sel = zinb::bayesian_fdr_threshold(std::span<const double>(ppi, m), target);
        if (selected) std::copy(sel.selected.begin(), sel.selected.end(), selected);
        if (threshold) *threshold = sel.threshold;
        return ZINB_OK;
    });
}

zinb_status zinb_roc_auc(const double* scores, const uint8_t* truth, size_t m, double* out) {
    if (!scores || !truth) return null_arg("scores");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = zinb::roc_auc(std::span<const double>(scores, m), std::span<const std::uint8_t>(truth, m));
        return ZINB_OK;
    });
}

}  // extern "C"
