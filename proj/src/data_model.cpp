#include "zinb/data_model.hpp"

#include "zinb/error.hpp"

#include <cmath>
#include <unordered_set>

namespace zinb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ConstantCovariate: return "ConstantCovariate";
        case ErrorCode::AllZeroFeature: return "AllZeroFeature";
        case ErrorCode::InvalidGroups: return "InvalidGroups";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::NoSharedFeatures: return "NoSharedFeatures";
        case ErrorCode::InconsistentZeroIndicator: return "InconsistentZeroIndicator";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::EmptyTrace: return "EmptyTrace";
        case ErrorCode::PoolTooSmall: return "PoolTooSmall";
        case ErrorCode::SingleClassTruth: return "SingleClassTruth";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnalignedSampleIds: return "UnalignedSampleIds";
        case ErrorCode::NonIntegerCount: return "NonIntegerCount";
        case ErrorCode::UnknownFlag: return "UnknownFlag";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::InvalidArgument, std::string("duplicate ") + what + " '" + id + "'");
        }
    }
}

struct ColumnMoments {
    double mean = 0.0;
    double sd = 0.0;
};

ColumnMoments column_moments(std::span<const double> x) {
    ColumnMoments m;
    const double n = static_cast<double>(x.size());
    for (double v : x) m.mean += v;
    m.mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return m;
}

bool is_constant(std::span<const double> x) {
    for (double v : x) {
        if (v != x.front()) return false;
    }
    return true;
}

}  // namespace

CountMatrix::CountMatrix(Matrix<std::int64_t> counts, std::vector<std::string> sample_ids,
                         std::vector<std::string> feature_ids)
    : counts_(std::move(counts)), sample_ids_(std::move(sample_ids)), feature_ids_(std::move(feature_ids)) {
    if (counts_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "count matrix needs at least 2 samples");
    if (counts_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "count matrix needs at least 1 feature");
    if (sample_ids_.size() != counts_.rows() || feature_ids_.size() != counts_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "count matrix labels do not match its shape");
    }
    for (auto v : counts_.data()) {
        if (v < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
    }
    require_unique(sample_ids_, "sample id");
    require_unique(feature_ids_, "feature id");
}

CovariateMatrix::CovariateMatrix(Matrix<double> values, std::vector<std::string> covariate_ids, bool standardized)
    : values_(std::move(values)), covariate_ids_(std::move(covariate_ids)), standardized_(standardized) {
    if (covariate_ids_.size() != values_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "covariate ids do not match the number of columns");
    }
    for (double v : values_.data()) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "missing or non-finite covariate value");
    }
    require_unique(covariate_ids_, "covariate id");
    if (standardized_) {
        for (std::size_t r = 0; r < values_.cols(); ++r) {
            auto col = values_.col(r);
            if (is_constant(col)) throw Error(ErrorCode::ConstantCovariate, covariate_ids_[r]);
            auto m = column_moments(col);
            if (std::abs(m.mean) >= 1e-8 || std::abs(m.sd - 1.0) >= 1e-6) {
                throw Error(ErrorCode::InvariantViolation, "covariate '" + covariate_ids_[r] + "' is not standardized");
            }
        }
    }
}

GroupAssignment::GroupAssignment(std::vector<int> labels, int k, int reference_group)
    : labels_(std::move(labels)), k_(k), reference_(reference_group) {
    if (k_ < 1) throw Error(ErrorCode::InvalidGroups, "group count must be positive");
    if (reference_ < 1 || reference_ > k_) throw Error(ErrorCode::InvalidGroups, "reference group outside 1..K");
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
    for (int z : labels_) {
        if (z < 1 || z > k_) throw Error(ErrorCode::InvalidGroups, "label " + std::to_string(z) + " outside 1..K");
        ++sizes[static_cast<std::size_t>(z - 1)];
    }
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (sizes[g] == 0) throw Error(ErrorCode::InvalidGroups, "group " + std::to_string(g + 1) + " has no samples");
    }
}

void Hyperparameters::validate() const {
    const double all[] = {a_pi, b_pi, a_omega, b_omega, a_p, b_p, a_phi, b_phi, sigma0_sq, a_t, b_t};
    for (double v : all) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "hyperparameters must be positive");
    }
}

void ProposalScales::validate() const {
    const double all[] = {tau_mu0, tau_mu, tau_beta, tau_phi};
    for (double v : all) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "proposal scales must be positive");
    }
}

Dataset validate_inputs(CountMatrix counts, CovariateMatrix covariates, GroupAssignment groups) {
    const std::size_t n = counts.n();
    if (covariates.n() != n || groups.n() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "counts have " + std::to_string(n) + " rows, covariates " + std::to_string(covariates.n()) +
                        ", groups " + std::to_string(groups.n()));
    }
    if (groups.k() < 2) throw Error(ErrorCode::InvalidGroups, "at least two groups are required");
    for (std::size_t r = 0; r < covariates.r(); ++r) {
        if (is_constant(covariates.values().col(r))) {
            throw Error(ErrorCode::ConstantCovariate, covariates.covariate_ids()[r]);
        }
    }
    for (std::size_t j = 0; j < counts.p(); ++j) {
        bool any = false;
        for (auto v : counts.counts().col(j)) any = any || v > 0;
        if (!any) throw Error(ErrorCode::AllZeroFeature, counts.feature_ids()[j]);
    }
    return Dataset{std::move(counts), std::move(covariates), std::move(groups)};
}

CovariateMatrix standardize_covariates(const CovariateMatrix& covariates) {
    Matrix<double> out(covariates.n(), covariates.r());
    for (std::size_t r = 0; r < covariates.r(); ++r) {
        auto col = covariates.values().col(r);
        if (is_constant(col)) throw Error(ErrorCode::ConstantCovariate, covariates.covariate_ids()[r]);
        auto m = column_moments(col);
        auto dst = out.col(r);
        for (std::size_t i = 0; i < col.size(); ++i) dst[i] = (col[i] - m.mean) / m.sd;
    }
    return CovariateMatrix(std::move(out), covariates.covariate_ids(), true);
}

FilterResult filter_low_abundance_indices(const CountMatrix& counts, const GroupAssignment& groups, int min_count,
                                          int min_groups) {
    if (min_count < 1) throw Error(ErrorCode::InvalidArgument, "min_count must be >= 1");
    if (min_groups < 1 || min_groups > groups.k()) throw Error(ErrorCode::InvalidArgument, "min_groups outside 1..K");
    if (groups.n() != counts.n()) throw Error(ErrorCode::DimensionMismatch, "groups do not match counts");

    FilterResult result;
    std::vector<int> nonzero(static_cast<std::size_t>(groups.k()));
    for (std::size_t j = 0; j < counts.p(); ++j) {
        std::fill(nonzero.begin(), nonzero.end(), 0);
        auto col = counts.counts().col(j);
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (col[i] > 0) ++nonzero[groups.index(i)];
        }
        int passing = 0;
        for (int c : nonzero) passing += c >= min_count ? 1 : 0;
        if (passing >= min_groups) {
            result.retained.push_back(j);
            result.feature_ids.push_back(counts.feature_ids()[j]);
        }
    }
    return result;
}

CountMatrix select_features(const CountMatrix& counts, const std::vector<std::size_t>& columns) {
    Matrix<std::int64_t> out(counts.n(), columns.size());
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        auto src = counts.counts().col(columns[c]);
        std::copy(src.begin(), src.end(), out.col(c).begin());
        ids.push_back(counts.feature_ids()[columns[c]]);
    }
    return CountMatrix(std::move(out), counts.sample_ids(), std::move(ids));
}

CountMatrix filter_low_abundance(const CountMatrix& counts, const GroupAssignment& groups, int min_count,
                                 int min_groups) {
    auto kept = filter_low_abundance_indices(counts, groups, min_count, min_groups);
    if (kept.retained.empty()) throw Error(ErrorCode::InvalidArgument, "no feature passes the abundance filter");
    return select_features(counts, kept.retained);
}

}  // namespace zinb
