#ifndef ZINB_IO_HPP
#define ZINB_IO_HPP

#include "zinb/data_model.hpp"
#include "zinb/simgen.hpp"

#include <string>
#include <vector>

namespace zinb {

/// Delimited text with a header row. Tab for .tsv/.tab/.txt, comma otherwise.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

char delimiter_for(const std::string& path);
Table read_table(const std::string& path);
Table parse_table(const std::string& text, char delim);

struct LabeledCovariates {
    std::vector<std::string> sample_ids;
    CovariateMatrix covariates;
};

struct LabeledGroups {
    std::vector<std::string> sample_ids;
    std::vector<int> labels;
};

CountMatrix read_counts(const std::string& path);
LabeledCovariates read_covariates(const std::string& path);
LabeledGroups read_groups(const std::string& path);

/// Reorders covariates and groups to the sample order of the counts.
struct AlignedInputs {
    CountMatrix counts;
    CovariateMatrix covariates;
    std::vector<int> labels;
};

AlignedInputs align_by_sample(const CountMatrix& counts, const LabeledCovariates& covariates,
                              const LabeledGroups& groups);

/// Fixed-precision rendering shared by every writer; NaN prints as NA.
std::string format_double(double x);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::string path_;
    std::string buffer_;
    char delim_;
    bool closed_ = false;
};

void write_counts(const std::string& path, const CountMatrix& counts);
void write_covariates(const std::string& path, const std::vector<std::string>& sample_ids,
                      const CovariateMatrix& covariates);
void write_groups(const std::string& path, const std::vector<std::string>& sample_ids,
                  const GroupAssignment& groups);

/// feature_id, gamma_true, mu0_true, mu2_true, then beta_<covariate> per covariate.
void write_truth(const std::string& path, const std::vector<std::string>& feature_ids,
                 const std::vector<std::string>& covariate_ids, const SimTruth& truth);

struct LabeledTruth {
    std::vector<std::string> feature_ids;
    std::vector<std::string> covariate_ids;
    SimTruth truth;  // structural_zero_mask left empty
};

LabeledTruth read_truth(const std::string& path);

void ensure_directory(const std::string& path);
std::string join_path(const std::string& dir, const std::string& name);

}  // namespace zinb

#endif
