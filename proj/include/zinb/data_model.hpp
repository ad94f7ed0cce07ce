#ifndef ZINB_DATA_MODEL_HPP
#define ZINB_DATA_MODEL_HPP

#include "zinb/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace zinb {

/// n x p table of observed counts; rows are samples, columns are features.
class CountMatrix {
public:
    CountMatrix(Matrix<std::int64_t> counts, std::vector<std::string> sample_ids,
                std::vector<std::string> feature_ids);

    std::size_t n() const noexcept { return counts_.rows(); }
    std::size_t p() const noexcept { return counts_.cols(); }
    const Matrix<std::int64_t>& counts() const noexcept { return counts_; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return counts_(i, j); }
    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    const std::vector<std::string>& feature_ids() const noexcept { return feature_ids_; }

    bool operator==(const CountMatrix&) const = default;

private:
    Matrix<std::int64_t> counts_;
    std::vector<std::string> sample_ids_;
    std::vector<std::string> feature_ids_;
};

/// n x R design matrix of sample covariates.
class CovariateMatrix {
public:
    CovariateMatrix(Matrix<double> values, std::vector<std::string> covariate_ids,
                    bool standardized = false);

    std::size_t n() const noexcept { return values_.rows(); }
    std::size_t r() const noexcept { return values_.cols(); }
    const Matrix<double>& values() const noexcept { return values_; }
    double operator()(std::size_t i, std::size_t r) const { return values_(i, r); }
    const std::vector<std::string>& covariate_ids() const noexcept { return covariate_ids_; }
    bool standardized() const noexcept { return standardized_; }

    bool operator==(const CovariateMatrix&) const = default;

private:
    Matrix<double> values_;
    std::vector<std::string> covariate_ids_;
    bool standardized_ = false;
};

/// Sample allocation to groups 1..K. Group `reference_group` carries no shift.
class GroupAssignment {
public:
    GroupAssignment(std::vector<int> labels, int k, int reference_group = 1);

    std::size_t n() const noexcept { return labels_.size(); }
    int k() const noexcept { return k_; }
    int reference_group() const noexcept { return reference_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    /// Zero-based group index of sample i.
    std::size_t index(std::size_t i) const { return static_cast<std::size_t>(labels_[i] - 1); }
    std::size_t reference_index() const noexcept { return static_cast<std::size_t>(reference_ - 1); }

    bool operator==(const GroupAssignment&) const = default;

private:
    std::vector<int> labels_;
    int k_ = 0;
    int reference_ = 1;
};

struct Hyperparameters {
    double a_pi = 1.0;
    double b_pi = 1.0;
    double a_omega = 0.2;
    double b_omega = 1.8;
    double a_p = 0.4;
    double b_p = 0.6;
    double a_phi = 1.0;
    double b_phi = 0.01;  // rate
    double sigma0_sq = 100.0;
    double a_t = 2.0;
    double b_t = 10.0;

    void validate() const;
    bool operator==(const Hyperparameters&) const = default;
};

/// Random-walk standard deviations of the Metropolis-Hastings moves.
struct ProposalScales {
    double tau_mu0 = 0.5;
    double tau_mu = 1.0;
    double tau_beta = 1.0;
    double tau_phi = 1.0;

    void validate() const;
    bool operator==(const ProposalScales&) const = default;
};

/// Inputs that passed validate_inputs(); rows of all three are aligned.
struct Dataset {
    CountMatrix counts;
    CovariateMatrix covariates;
    GroupAssignment groups;
};

Dataset validate_inputs(CountMatrix counts, CovariateMatrix covariates, GroupAssignment groups);

CovariateMatrix standardize_covariates(const CovariateMatrix& covariates);

/**
 * Keeps feature j iff, in at least `min_groups` groups, at least `min_count`
 * samples of that group have a nonzero count for j. Column order is preserved.
 * The result may contain zero features, in which case an empty matrix with the
 * original sample ids is returned through `retained` only.
 */
struct FilterResult {
    std::vector<std::size_t> retained;  // indices into the input feature set
    std::vector<std::string> feature_ids;
};

FilterResult filter_low_abundance_indices(const CountMatrix& counts, const GroupAssignment& groups,
                                          int min_count, int min_groups);

/// Throws InvalidArgument when no feature survives, since CountMatrix requires p >= 1.
CountMatrix filter_low_abundance(const CountMatrix& counts, const GroupAssignment& groups,
                                 int min_count, int min_groups);

CountMatrix select_features(const CountMatrix& counts, const std::vector<std::size_t>& columns);

}  // namespace zinb

#endif
