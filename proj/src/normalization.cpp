#include "zinb/normalization.hpp"

#include "zinb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace zinb {

NormMethod parse_norm_method(std::string_view name) {
    if (name == "css") return NormMethod::CSS;
    if (name == "gmpr") return NormMethod::GMPR;
    if (name == "q75") return NormMethod::Q75;
    if (name == "tmm") return NormMethod::TMM;
    if (name == "rle") return NormMethod::RLE;
    throw Error(ErrorCode::InvalidValue, "norm: unknown method '" + std::string(name) + "'");
}

const char* norm_method_name(NormMethod method) {
    switch (method) {
        case NormMethod::CSS: return "css";
        case NormMethod::GMPR: return "gmpr";
        case NormMethod::Q75: return "q75";
        case NormMethod::TMM: return "tmm";
        case NormMethod::RLE: return "rle";
    }
    return "?";
}

SizeFactors::SizeFactors(std::vector<double> values, NormMethod method) : values_(std::move(values)), method_(method) {
    double log_sum = 0.0;
    for (double v : values_) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvariantViolation, "size factors must be positive");
        log_sum += std::log(v);
    }
    if (std::abs(log_sum) > 1e-10 * std::max<double>(1.0, static_cast<double>(values_.size()))) {
        throw Error(ErrorCode::InvariantViolation, "size factor logs do not sum to zero");
    }
}

std::vector<double> renormalize_log_sum_zero(std::span<const double> raw) {
    double mean_log = 0.0;
    for (double v : raw) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::DomainError, "raw size factor must be positive");
        mean_log += std::log(v);
    }
    mean_log /= static_cast<double>(raw.size());
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::exp(std::log(raw[i]) - mean_log);
    return out;
}

double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::DomainError, "quantile of an empty set");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::vector<double> sorted_nonzero(const CountMatrix& counts, std::size_t i) {
    std::vector<double> v;
    for (std::size_t j = 0; j < counts.p(); ++j) {
        if (counts(i, j) > 0) v.push_back(static_cast<double>(counts(i, j)));
    }
    if (v.empty()) throw Error(ErrorCode::EmptySample, counts.sample_ids()[i]);
    std::sort(v.begin(), v.end());
    return v;
}

double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return sorted_quantile(v, 0.5);
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t s = 0; s < order.size();) {
        std::size_t e = s;
        while (e + 1 < order.size() && x[order[e + 1]] == x[order[s]]) ++e;
        const double r = 0.5 * (static_cast<double>(s + 1) + static_cast<double>(e + 1));
        for (std::size_t t = s; t <= e; ++t) ranks[order[t]] = r;
        s = e + 1;
    }
    return ranks;
}

std::vector<double> library_sizes(const CountMatrix& counts) {
    std::vector<double> lib(counts.n(), 0.0);
    for (std::size_t j = 0; j < counts.p(); ++j) {
        for (std::size_t i = 0; i < counts.n(); ++i) lib[i] += static_cast<double>(counts(i, j));
    }
    return lib;
}

}  // namespace

std::vector<double> raw_css(const CountMatrix& counts, int l_css) {
    if (l_css < 0 || l_css > 100) throw Error(ErrorCode::InvalidArgument, "l_css must lie in [0, 100]");
    std::vector<double> raw(counts.n());
    for (std::size_t i = 0; i < counts.n(); ++i) {
        auto nz = sorted_nonzero(counts, i);
        const double q = sorted_quantile(nz, l_css / 100.0);
        double sum = 0.0;
        for (double v : nz) {
            if (v <= q) sum += v;
        }
        raw[i] = sum;
    }
    return raw;
}

SizeFactors estimate_css(const CountMatrix& counts, int l_css) {
    auto raw = raw_css(counts, l_css);
    return SizeFactors(renormalize_log_sum_zero(raw), NormMethod::CSS);
}

std::vector<double> raw_q75(const CountMatrix& counts) {
    std::vector<double> raw(counts.n());
    for (std::size_t i = 0; i < counts.n(); ++i) raw[i] = sorted_quantile(sorted_nonzero(counts, i), 0.75);
    return raw;
}

SizeFactors estimate_q75(const CountMatrix& counts) {
    auto raw = raw_q75(counts);
    return SizeFactors(renormalize_log_sum_zero(raw), NormMethod::Q75);
}

// The geometric mean runs over all n samples with the self-ratio equal to 1,
// so that a sample scaled by c ends up with a size factor c times larger.
SizeFactors estimate_gmpr(const CountMatrix& counts) {
    const std::size_t n = counts.n();
    std::vector<double> log_raw(n, 0.0);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            ratios.clear();
            for (std::size_t j = 0; j < counts.p(); ++j) {
                if (counts(i, j) > 0 && counts(k, j) > 0) {
                    ratios.push_back(static_cast<double>(counts(i, j)) / static_cast<double>(counts(k, j)));
                }
            }
            if (ratios.empty()) {
                throw Error(ErrorCode::NoSharedFeatures,
                            "samples '" + counts.sample_ids()[i] + "' and '" + counts.sample_ids()[k] + "'");
            }
            log_raw[i] += std::log(median_inplace(ratios));
        }
    }
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = std::exp(log_raw[i] / static_cast<double>(n));
    return SizeFactors(renormalize_log_sum_zero(raw), NormMethod::GMPR);
}

std::size_t tmm_reference_sample(const CountMatrix& counts) {
    const auto lib = library_sizes(counts);
    std::vector<double> upper(counts.n());
    std::vector<double> props(counts.p());
    for (std::size_t i = 0; i < counts.n(); ++i) {
        if (!(lib[i] > 0.0)) throw Error(ErrorCode::EmptySample, counts.sample_ids()[i]);
        for (std::size_t j = 0; j < counts.p(); ++j) props[j] = static_cast<double>(counts(i, j)) / lib[i];
        std::sort(props.begin(), props.end());
        upper[i] = sorted_quantile(props, 0.75);
    }
    const double mean_upper = std::accumulate(upper.begin(), upper.end(), 0.0) / static_cast<double>(upper.size());
    std::size_t best = 0;
    for (std::size_t i = 1; i < upper.size(); ++i) {
        if (std::abs(upper[i] - mean_upper) < std::abs(upper[best] - mean_upper)) best = i;
    }
    return best;
}

SizeFactors estimate_tmm(const CountMatrix& counts, double trim_m, double trim_a) {
    if (!(trim_m >= 0.0 && trim_m < 0.5) || !(trim_a >= 0.0 && trim_a < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "TMM trim fractions must lie in [0, 0.5)");
    }
    const auto lib = library_sizes(counts);
    const std::size_t ref = tmm_reference_sample(counts);
    std::vector<double> raw(counts.n());
    std::vector<double> m_vals, a_vals, v_vals;
    for (std::size_t i = 0; i < counts.n(); ++i) {
        if (i == ref) {
            raw[i] = lib[i];
            continue;
        }
        m_vals.clear();
        a_vals.clear();
        v_vals.clear();
        for (std::size_t j = 0; j < counts.p(); ++j) {
            const double obs = static_cast<double>(counts(i, j));
            const double rv = static_cast<double>(counts(ref, j));
            if (obs <= 0.0 || rv <= 0.0) continue;
            const double lo = std::log2(obs / lib[i]);
            const double lr = std::log2(rv / lib[ref]);
            m_vals.push_back(lo - lr);
            a_vals.push_back(0.5 * (lo + lr));
            v_vals.push_back((lib[i] - obs) / lib[i] / obs + (lib[ref] - rv) / lib[ref] / rv);
        }
        if (m_vals.empty()) {
            throw Error(ErrorCode::NoSharedFeatures,
                        "samples '" + counts.sample_ids()[i] + "' and '" + counts.sample_ids()[ref] + "'");
        }
        const double m = static_cast<double>(m_vals.size());
        const double lo_m = std::floor(m * trim_m) + 1.0, hi_m = m + 1.0 - lo_m;
        const double lo_a = std::floor(m * trim_a) + 1.0, hi_a = m + 1.0 - lo_a;
        const auto rank_m = average_ranks(m_vals);
        const auto rank_a = average_ranks(a_vals);
        double num = 0.0, den = 0.0;
        for (std::size_t g = 0; g < m_vals.size(); ++g) {
            if (rank_m[g] >= lo_m && rank_m[g] <= hi_m && rank_a[g] >= lo_a && rank_a[g] <= hi_a) {
                num += m_vals[g] / v_vals[g];
                den += 1.0 / v_vals[g];
            }
        }
        const double log2_factor = den > 0.0 ? num / den : 0.0;
        raw[i] = lib[i] * std::exp2(log2_factor);
    }
    return SizeFactors(renormalize_log_sum_zero(raw), NormMethod::TMM);
}

SizeFactors estimate_rle(const CountMatrix& counts, double pseudo) {
    if (!(pseudo > 0.0)) throw Error(ErrorCode::InvalidArgument, "RLE pseudo-count must be positive");
    const std::size_t n = counts.n();
    std::vector<double> log_ref(counts.p(), 0.0);
    for (std::size_t j = 0; j < counts.p(); ++j) {
        for (std::size_t i = 0; i < n; ++i) log_ref[j] += std::log(static_cast<double>(counts(i, j)) + pseudo);
        log_ref[j] /= static_cast<double>(n);
    }
    std::vector<double> raw(n);
    std::vector<double> ratios(counts.p());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < counts.p(); ++j) {
            ratios[j] = std::exp(std::log(static_cast<double>(counts(i, j)) + pseudo) - log_ref[j]);
        }
        raw[i] = median_inplace(ratios);
    }
    return SizeFactors(renormalize_log_sum_zero(raw), NormMethod::RLE);
}

SizeFactors estimate_size_factors(const CountMatrix& counts, const NormOptions& options) {
    switch (options.method) {
        case NormMethod::CSS: return estimate_css(counts, options.l_css);
        case NormMethod::GMPR: return estimate_gmpr(counts);
        case NormMethod::Q75: return estimate_q75(counts);
        case NormMethod::TMM: return estimate_tmm(counts);
        case NormMethod::RLE: return estimate_rle(counts);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown normalization method");
}

}  // namespace zinb
