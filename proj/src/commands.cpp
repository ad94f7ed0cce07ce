#include "zinb/commands.hpp"

#include "zinb/io.hpp"
#include "zinb/parallel.hpp"
#include "zinb/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace zinb {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string pad3(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
}

std::vector<ChainConfig> chain_configs(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
    std::vector<ChainConfig> out;
    for (auto s : seeds) {
        ChainConfig c;
        c.n_iter = config.iterations;
        c.burn_in = config.burn_in;
        c.thin = config.thin;
        c.seed = s;
        c.prior_only = config.prior_only;
        c.adapt = config.adapt;
        c.record_diagnostics = config.trace;
        out.push_back(c);
    }
    return out;
}

void write_roc(const std::string& path, const std::vector<RocPoint>& points) {
    CsvWriter w(path);
    w.row({"threshold", "fpr", "tpr"});
    for (const auto& pt : points) w.row({fmt(pt.threshold), fmt(pt.fpr), fmt(pt.tpr)});
    w.close();
}

bool has_two_classes(std::span<const std::uint8_t> truth) {
    const auto pos = std::count(truth.begin(), truth.end(), std::uint8_t{1});
    return pos > 0 && pos < static_cast<std::ptrdiff_t>(truth.size());
}

/// Truth restricted to the features a fit kept.
SimTruth subset_truth(const SimTruth& truth, const std::vector<std::size_t>& keep) {
    SimTruth out;
    const std::size_t r = truth.delta_true.rows();
    out.delta_true = Matrix<std::uint8_t>(r, keep.size());
    out.beta_true = Matrix<double>(r, keep.size());
    for (std::size_t t = 0; t < keep.size(); ++t) {
        const std::size_t j = keep[t];
        out.gamma_true.push_back(truth.gamma_true[j]);
        out.mu0_true.push_back(truth.mu0_true[j]);
        out.mu2_true.push_back(truth.mu2_true[j]);
        for (std::size_t c = 0; c < r; ++c) {
            out.delta_true(c, t) = truth.delta_true(c, j);
            out.beta_true(c, t) = truth.beta_true(c, j);
        }
    }
    return out;
}

std::vector<std::string> score_header() {
    return {"auc_gamma", "auc_delta", "mcc_gamma", "mcc_delta", "sensitivity", "specificity", "fdr_empirical",
            "fpr_delta", "tp", "fp", "tn", "fn", "delta_tp", "delta_fp", "delta_tn", "delta_fn"};
}

std::vector<double> score_values(const ScoreReport& s) {
    auto d = [](std::size_t v) { return static_cast<double>(v); };
    return {s.auc_gamma, s.auc_delta, s.mcc_gamma, s.mcc_delta, s.sensitivity, s.specificity, s.fdr_empirical, s.fpr,
            d(s.gamma.tp), d(s.gamma.fp), d(s.gamma.tn), d(s.gamma.fn), d(s.delta.tp), d(s.delta.fp), d(s.delta.tn),
            d(s.delta.fn)};
}

void write_roc_files(const PosteriorSummary& summary, const SimTruth& truth, const std::string& dir,
                     const std::string& stem) {
    if (has_two_classes(truth.gamma_true)) {
        write_roc(join_path(dir, stem + "gamma.csv"), roc_curve(summary.ppi_gamma, truth.gamma_true));
    }
    if (has_two_classes(truth.delta_true.data())) {
        write_roc(join_path(dir, stem + "delta.csv"), roc_curve(summary.ppi_delta.data(), truth.delta_true.data()));
    }
}

double min_gamma_correlation(const std::optional<ConcordanceReport>& c) {
    if (!c || c->gamma.empty()) return std::numeric_limits<double>::quiet_NaN();
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : c->gamma) m = std::min(m, g.degenerate ? -std::numeric_limits<double>::infinity() : g.correlation);
    return m;
}

}  // namespace

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownFlag:
        case ErrorCode::InvalidValue:
        case ErrorCode::MissingInput:
        case ErrorCode::InvalidArgument:
            return kExitUsage;
        case ErrorCode::NumericalFailure:
        case ErrorCode::DomainError:
        case ErrorCode::InvariantViolation:
        case ErrorCode::InconsistentZeroIndicator:
            return kExitNumerical;
        default:
            return kExitData;
    }
}

FitResult fit_dataset(const CountMatrix& counts, const CovariateMatrix& covariates, const std::vector<int>& labels,
                      const RunConfig& config, const std::vector<std::uint64_t>& chain_seeds, unsigned threads) {
    if (labels.empty()) throw Error(ErrorCode::InvalidGroups, "no group labels");
    const int k = *std::max_element(labels.begin(), labels.end());
    if (config.reference_group > k) {
        throw Error(ErrorCode::InvalidGroups, "reference group " + std::to_string(config.reference_group) +
                                                  " exceeds the number of groups " + std::to_string(k));
    }
    GroupAssignment groups(labels, k, config.reference_group);
    const int min_groups = config.min_groups == 0 ? k : config.min_groups;
    auto kept = filter_low_abundance_indices(counts, groups, config.min_count, min_groups);
    if (kept.retained.empty()) {
        throw Error(ErrorCode::AllZeroFeature, "no feature passes the abundance filter (min_count " +
                                                   std::to_string(config.min_count) + " in " +
                                                   std::to_string(min_groups) + " groups)");
    }
    auto data = validate_inputs(select_features(counts, kept.retained), covariates, groups);
    data.covariates = standardize_covariates(data.covariates);
    auto sf = estimate_size_factors(data.counts, config.norm);
    config.hp.validate();
    config.scales.validate();

    auto traces = run_chains_parallel(data, sf, config.hp, config.scales, chain_configs(config, chain_seeds), threads);
    auto summary = summarize(traces, config.fdr);
    std::optional<ConcordanceReport> conc;
    if (traces.size() >= 2) conc = chain_concordance(traces, config.concordance_floor);
    return FitResult{std::move(data), std::move(sf), std::move(kept.retained), counts.p(), std::move(traces),
                     std::move(summary), std::move(conc)};
}

void write_fit_outputs(const FitResult& result, const RunConfig& config, const std::string& dir) {
    ensure_directory(dir);
    const auto& s = result.summary;
    const auto& features = result.data.counts.feature_ids();
    const auto& covs = result.data.covariates.covariate_ids();
    const auto& groups = result.data.groups;

    {
        CsvWriter w(join_path(dir, "ppi_gamma.csv"));
        w.row({"feature_id", "ppi", "selected"});
        for (std::size_t j = 0; j < s.p; ++j) {
            w.row({features[j], fmt(s.ppi_gamma[j]), std::to_string(s.selected_gamma[j])});
        }
        w.close();
    }
    {
        CsvWriter w(join_path(dir, "ppi_delta.csv"));
        w.row({"feature_id", "covariate_id", "ppi", "selected", "beta_mean", "beta_sd"});
        for (std::size_t j = 0; j < s.p; ++j) {
            for (std::size_t r = 0; r < s.n_cov; ++r) {
                w.row({features[j], covs[r], fmt(s.ppi_delta(r, j)), std::to_string(s.selected_delta(r, j)),
                       fmt(s.beta_mean(r, j)), fmt(s.beta_sd(r, j))});
            }
        }
        w.close();
    }
    {
        CsvWriter w(join_path(dir, "posterior_summary.csv"));
        std::vector<std::string> header{"feature_id", "mu0_mean", "mu0_sd"};
        for (int g = 1; g <= groups.k(); ++g) {
            const auto name = "mu" + std::to_string(g);
            header.insert(header.end(), {name + "_mean", name + "_lower", name + "_upper"});
        }
        header.insert(header.end(), {"phi_mean", "phi_sd"});
        w.row(header);
        for (std::size_t j = 0; j < s.p; ++j) {
            std::vector<std::string> row{features[j], fmt(s.mu0_mean[j]), fmt(s.mu0_sd[j])};
            for (std::size_t g = 0; g < s.k; ++g) {
                row.insert(row.end(), {fmt(s.mu_k_mean(g, j)), fmt(s.mu_k_lower(g, j)), fmt(s.mu_k_upper(g, j))});
            }
            row.insert(row.end(), {fmt(s.phi_mean[j]), fmt(s.phi_sd[j])});
            w.row(row);
        }
        w.close();
    }
    {
        CsvWriter w(join_path(dir, "convergence.csv"));
        w.row({"indicator", "chain_a", "chain_b", "correlation", "status"});
        if (result.concordance) {
            const auto& c = *result.concordance;
            auto emit = [&](const char* name, const std::vector<PairCorrelation>& pairs, bool gate) {
                for (const auto& pc : pairs) {
                    std::string status = pc.degenerate ? "degenerate"
                                         : (gate && pc.correlation < c.floor) ? "below_floor"
                                                                              : "ok";
                    w.row({name, std::to_string(pc.chain_a + 1), std::to_string(pc.chain_b + 1), fmt(pc.correlation),
                           status});
                }
            };
            emit("gamma", c.gamma, true);
            emit("delta", c.delta, false);
            w.row({"verdict", "", "", fmt(c.floor), c.converged ? "converged" : "not_converged"});
        } else {
            w.row({"verdict", "", "", fmt(config.concordance_floor), "single_chain"});
        }
        w.close();
    }
    {
        CsvWriter w(join_path(dir, "size_factors.csv"));
        w.row({"sample_id", "size_factor", "method"});
        const auto& ids = result.data.counts.sample_ids();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            w.row({ids[i], fmt(result.size_factors[i]), norm_method_name(result.size_factors.method())});
        }
        w.close();
    }
    write_text(join_path(dir, "run_config.resolved"), config.resolved_text);

    if (config.trace) {
        for (std::size_t c = 0; c < result.traces.size(); ++c) {
            CsvWriter w(join_path(dir, "trace_chain" + std::to_string(c + 1) + ".csv"));
            w.row({"iteration", "log_posterior", "gamma_count", "delta_count", "acc_mu0", "acc_gamma_add",
                   "acc_gamma_delete", "acc_mu", "acc_delta_add", "acc_delta_delete", "acc_beta", "acc_phi"});
            for (const auto& d : result.traces[c].diagnostics) {
                const auto& a = d.acceptance;
                w.row({std::to_string(d.iteration), fmt(d.log_posterior), std::to_string(d.gamma_count),
                       std::to_string(d.delta_count), fmt(a.mu0.rate()), fmt(a.gamma_add.rate()),
                       fmt(a.gamma_delete.rate()), fmt(a.mu_k.rate()), fmt(a.delta_add.rate()),
                       fmt(a.delta_delete.rate()), fmt(a.beta.rate()), fmt(a.phi.rate())});
            }
            w.close();
        }
    }
}

int run_fit(const RunConfig& config) {
    const auto counts = read_counts(config.counts_path);
    const auto covariates = read_covariates(config.covariates_path);
    const auto groups = read_groups(config.groups_path);
    const auto aligned = align_by_sample(counts, covariates, groups);
    const auto seeds = config.chain_seeds.empty() ? config.seeds_for(config.seed) : config.chain_seeds;

    auto result = fit_dataset(aligned.counts, aligned.covariates, aligned.labels, config, seeds, config.threads);
    write_fit_outputs(result, config, config.output);

    const auto& s = result.summary;
    const auto n_sel = std::count(s.selected_gamma.begin(), s.selected_gamma.end(), std::uint8_t{1});
    const auto n_assoc = std::count(s.selected_delta.data().begin(), s.selected_delta.data().end(), std::uint8_t{1});
    std::printf("features: %zu of %zu kept; discriminating: %td; associations: %td (FDR %s)\n", s.p,
                result.features_in, n_sel, n_assoc, fmt(config.fdr).c_str());
    if (result.concordance && !result.concordance->converged) {
        return kExitConvergence;
    }
    return kExitOk;
}

int run_simulate(const RunConfig& config) {
    std::optional<CovariatePool> pool;
    if (!config.pool_covariates_path.empty()) {
        auto pc = read_covariates(config.pool_covariates_path);
        auto pg = read_groups(config.pool_groups_path);
        auto aligned_labels = std::vector<int>(pc.sample_ids.size());
        std::unordered_map<std::string, int> label_of;
        for (std::size_t i = 0; i < pg.sample_ids.size(); ++i) label_of[pg.sample_ids[i]] = pg.labels[i];
        for (std::size_t i = 0; i < pc.sample_ids.size(); ++i) {
            auto it = label_of.find(pc.sample_ids[i]);
            if (it == label_of.end()) {
                throw Error(ErrorCode::UnalignedSampleIds, "pool sample " + pc.sample_ids[i] + " has no group");
            }
            aligned_labels[i] = it->second;
        }
        const int k = *std::max_element(aligned_labels.begin(), aligned_labels.end());
        pool = CovariatePool{pc.covariates, GroupAssignment(aligned_labels, std::max(k, 2))};
    }
    SimConfig sc = config.sim;
    if (pool) sc.n_cov = static_cast<int>(pool->covariates.r());
    const auto sim = generate(sc, pool);

    ensure_directory(config.output);
    const auto& ids = sim.counts.sample_ids();
    write_counts(join_path(config.output, "counts.csv"), sim.counts);
    write_covariates(join_path(config.output, "covariates.csv"), ids, sim.covariates);
    write_groups(join_path(config.output, "groups.csv"), ids, sim.groups);
    write_truth(join_path(config.output, "truth.csv"), sim.counts.feature_ids(), sim.covariates.covariate_ids(),
                sim.truth);
    write_text(join_path(config.output, "run_config.resolved"), config.resolved_text);
    std::printf("wrote %zu samples x %zu features to %s\n", sim.counts.n(), sim.counts.p(), config.output.c_str());
    return kExitOk;
}

int run_evaluate(const RunConfig& config) {
    const auto truth = read_truth(config.truth_path);
    const auto gamma = read_table(join_path(config.fit_dir, "ppi_gamma.csv"));
    const auto delta = read_table(join_path(config.fit_dir, "ppi_delta.csv"));
    if (gamma.header.size() < 3 || gamma.header[0] != "feature_id" || delta.header.size() < 4) {
        throw Error(ErrorCode::ParseError, "unexpected PPI file layout in " + config.fit_dir);
    }
    std::unordered_map<std::string, std::size_t> feature_index, cov_index;
    for (std::size_t j = 0; j < truth.feature_ids.size(); ++j) feature_index[truth.feature_ids[j]] = j;
    for (std::size_t r = 0; r < truth.covariate_ids.size(); ++r) cov_index[truth.covariate_ids[r]] = r;

    auto number = [](const std::string& cell, const std::string& what) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') throw Error(ErrorCode::ParseError, what + ": \"" + cell + "\"");
        return v;
    };

    std::vector<std::size_t> keep;
    std::unordered_map<std::string, std::size_t> fit_pos;
    PosteriorSummary s;
    for (const auto& row : gamma.rows) {
        auto it = feature_index.find(row[0]);
        if (it == feature_index.end()) throw Error(ErrorCode::DimensionMismatch, "feature " + row[0] + " not in truth");
        fit_pos[row[0]] = keep.size();
        keep.push_back(it->second);
        s.ppi_gamma.push_back(number(row[1], "ppi"));
        s.selected_gamma.push_back(row[2] == "1" ? 1 : 0);
    }
    s.p = keep.size();
    s.n_cov = truth.covariate_ids.size();
    s.ppi_delta = Matrix<double>(s.n_cov, s.p);
    s.selected_delta = Matrix<std::uint8_t>(s.n_cov, s.p);
    std::size_t filled = 0;
    for (const auto& row : delta.rows) {
        auto f = fit_pos.find(row[0]);
        auto c = cov_index.find(row[1]);
        if (f == fit_pos.end() || c == cov_index.end()) {
            throw Error(ErrorCode::DimensionMismatch, "association " + row[0] + "/" + row[1] + " not in truth");
        }
        s.ppi_delta(c->second, f->second) = number(row[2], "ppi");
        s.selected_delta(c->second, f->second) = row[3] == "1" ? 1 : 0;
        ++filled;
    }
    if (filled != s.n_cov * s.p) throw Error(ErrorCode::DimensionMismatch, "ppi_delta.csv does not cover every pair");

    const auto sub = subset_truth(truth.truth, keep);
    const auto report = score_run(s, sub);
    ensure_directory(config.output);
    {
        CsvWriter w(join_path(config.output, "scores.csv"));
        w.row(score_header());
        std::vector<std::string> row;
        for (double v : score_values(report)) row.push_back(fmt(v));
        w.row(row);
        w.close();
    }
    write_roc_files(s, sub, config.output, "roc_");
    write_text(join_path(config.output, "run_config.resolved"), config.resolved_text);
    std::printf("auc_gamma %s auc_delta %s mcc_gamma %s\n", fmt(report.auc_gamma).c_str(),
                fmt(report.auc_delta).c_str(), fmt(report.mcc_gamma).c_str());
    return kExitOk;
}

int run_sim_study(const RunConfig& config) {
    struct Replicate {
        std::uint64_t seed = 0;
        std::string status = "ok";
        ScoreReport report;
        PosteriorSummary summary;
        SimTruth truth;
        std::size_t n_features = 0;
        double min_corr = std::numeric_limits<double>::quiet_NaN();
        bool converged = false;
    };
    const auto reps = static_cast<std::size_t>(config.reps);
    std::vector<Replicate> out(reps);
    const unsigned threads = resolve_thread_count(config.threads);

    parallel_for(reps, threads, [&](std::size_t rep) {
        auto& r = out[rep];
        r.seed = derive_seed(config.seed, rep);
        try {
            SimConfig sc = config.sim;
            sc.seed = r.seed;
            const auto sim = generate(sc);
            auto fit = fit_dataset(sim.counts, sim.covariates, sim.groups.labels(), config, config.seeds_for(r.seed), 1);
            r.truth = subset_truth(sim.truth, fit.retained);
            r.report = score_run(fit.summary, r.truth);
            r.summary = std::move(fit.summary);
            r.n_features = fit.retained.size();
            r.min_corr = min_gamma_correlation(fit.concordance);
            r.converged = fit.concordance ? fit.concordance->converged : true;
        } catch (const Error& e) {
            r.status = error_code_name(e.code());
        }
    });

    ensure_directory(config.output);
    const auto roc_dir = join_path(config.output, "roc");
    ensure_directory(roc_dir);
    const auto metrics = score_header();
    {
        CsvWriter w(join_path(config.output, "scores.csv"));
        std::vector<std::string> header{"rep", "seed", "status", "n_features", "converged", "min_gamma_correlation"};
        header.insert(header.end(), metrics.begin(), metrics.end());
        w.row(header);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto& r = out[rep];
            std::vector<std::string> row{std::to_string(rep + 1), std::to_string(r.seed), r.status};
            if (r.status == "ok") {
                row.insert(row.end(), {std::to_string(r.n_features), r.converged ? "1" : "0", fmt(r.min_corr)});
                for (double v : score_values(r.report)) row.push_back(fmt(v));
                write_roc_files(r.summary, r.truth, roc_dir, "rep" + pad3(static_cast<int>(rep + 1)) + "_");
            } else {
                row.resize(header.size(), "NA");
            }
            w.row(row);
        }
        w.close();
    }
    {
        CsvWriter w(join_path(config.output, "aggregate.csv"));
        std::vector<std::string> header{"statistic", "replicates"};
        header.insert(header.end(), metrics.begin(), metrics.end());
        w.row(header);
        std::vector<std::vector<double>> columns(metrics.size());
        std::size_t ok = 0;
        for (const auto& r : out) {
            if (r.status != "ok") continue;
            ++ok;
            const auto v = score_values(r.report);
            for (std::size_t m = 0; m < v.size(); ++m) {
                if (!std::isnan(v[m])) columns[m].push_back(v[m]);
            }
        }
        std::vector<std::string> mean_row{"mean", std::to_string(ok)}, sd_row{"sd", std::to_string(ok)};
        for (const auto& col : columns) {
            const double n = static_cast<double>(col.size());
            double mean = std::numeric_limits<double>::quiet_NaN(), sd = mean;
            if (!col.empty()) {
                mean = 0.0;
                for (double x : col) mean += x;
                mean /= n;
            }
            if (col.size() >= 2) {
                double ss = 0.0;
                for (double x : col) ss += (x - mean) * (x - mean);
                sd = std::sqrt(ss / (n - 1.0));
            }
            mean_row.push_back(fmt(mean));
            sd_row.push_back(fmt(sd));
        }
        w.row(mean_row);
        w.row(sd_row);
        w.close();
    }
    write_text(join_path(config.output, "run_config.resolved"), config.resolved_text);
    std::size_t failed = 0;
    for (const auto& r : out) failed += r.status != "ok";
    std::printf("%zu replicates, %zu failed; scores in %s\n", reps, failed, config.output.c_str());
    return kExitOk;
}

int run_command(const RunConfig& config) {
    switch (config.command) {
        case Command::Fit: return run_fit(config);
        case Command::Simulate: return run_simulate(config);
        case Command::Evaluate: return run_evaluate(config);
        case Command::SimStudy: return run_sim_study(config);
    }
    return kExitUsage;
}

}  // namespace zinb
