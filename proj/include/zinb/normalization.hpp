#ifndef ZINB_NORMALIZATION_HPP
#define ZINB_NORMALIZATION_HPP

#include "zinb/data_model.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace zinb {

enum class NormMethod { CSS, GMPR, Q75, TMM, RLE };

NormMethod parse_norm_method(std::string_view name);
const char* norm_method_name(NormMethod method);

/// Per-sample size factors whose logs sum to zero.
class SizeFactors {
public:
    SizeFactors(std::vector<double> values, NormMethod method);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    NormMethod method() const noexcept { return method_; }

private:
    std::vector<double> values_;
    NormMethod method_;
};

/// Rescales positive raw factors so that their logs sum to zero.
std::vector<double> renormalize_log_sum_zero(std::span<const double> raw);

/// Type-7 (linear interpolation) quantile of an ascending-sorted range.
double sorted_quantile(std::span<const double> sorted, double q);

SizeFactors estimate_css(const CountMatrix& counts, int l_css = 50);
SizeFactors estimate_gmpr(const CountMatrix& counts);
SizeFactors estimate_q75(const CountMatrix& counts);
SizeFactors estimate_tmm(const CountMatrix& counts, double trim_m = 0.30, double trim_a = 0.05);
SizeFactors estimate_rle(const CountMatrix& counts, double pseudo = 1.0);

/// Raw (pre-renormalization) factors, exposed for inspection and testing.
std::vector<double> raw_css(const CountMatrix& counts, int l_css = 50);
std::vector<double> raw_q75(const CountMatrix& counts);

/// Index of the TMM reference sample.
std::size_t tmm_reference_sample(const CountMatrix& counts);

struct NormOptions {
    NormMethod method = NormMethod::CSS;
    int l_css = 50;
};

SizeFactors estimate_size_factors(const CountMatrix& counts, const NormOptions& options);

}  // namespace zinb

#endif
