#ifndef ZINB_COMMANDS_HPP
#define ZINB_COMMANDS_HPP

#include "zinb/config.hpp"
#include "zinb/data_model.hpp"
#include "zinb/error.hpp"
#include "zinb/evaluation.hpp"
#include "zinb/inference.hpp"
#include "zinb/sampler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace zinb {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitConvergence = 3, kExitNumerical = 4 };

int exit_code_for(ErrorCode code);

struct FitResult {
    Dataset data;  // filtered, validated, standardized
    SizeFactors size_factors;
    std::vector<std::size_t> retained;  // input feature indices kept by the filter
    std::size_t features_in = 0;
    std::vector<ChainTrace> traces;
    PosteriorSummary summary;
    std::optional<ConcordanceReport> concordance;  // set when chains >= 2
};

/**
 * filter -> validate -> standardize -> size factors -> chains -> summary.
 * Labels are 1..K with K the largest label present.
 */
FitResult fit_dataset(const CountMatrix& counts, const CovariateMatrix& covariates, const std::vector<int>& labels,
                      const RunConfig& config, const std::vector<std::uint64_t>& chain_seeds, unsigned threads);

void write_fit_outputs(const FitResult& result, const RunConfig& config, const std::string& dir);

/// Runs one command; returns the exit code. Errors propagate as zinb::Error.
int run_command(const RunConfig& config);

int run_fit(const RunConfig& config);
int run_simulate(const RunConfig& config);
int run_evaluate(const RunConfig& config);
int run_sim_study(const RunConfig& config);

}  // namespace zinb

#endif
