#include "zinb/io.hpp"

#include "zinb/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace zinb {

namespace {

std::string where(const std::string& path, std::size_t line, std::size_t col) {
    return path + ": line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line, char delim, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && trim(cell).empty()) {
            quoted = true;
            was_quoted = true;
            cell.clear();
        } else if (c == delim) {
            cells.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else {
            cell += c;
        }
    }
    if (quoted) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                               std::to_string(cells.size() + 1) + ": unterminated quote");
    }
    cells.push_back(was_quoted ? cell : trim(cell));
    return cells;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e && b != e;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e && std::isfinite(out);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_columns(const Table& t, const std::string& path, std::size_t min_cols, const char* what) {
    if (t.header.size() < min_cols) {
        throw Error(ErrorCode::ParseError, where(path, 1, t.header.size()) + ": header needs sample_id and " + what);
    }
}

/// Rewrites "line N" positions from parse_table so that they carry the path.
Table read_table_checked(const std::string& path) {
    try {
        return read_table(path);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError) throw;
        std::string msg = e.what();
        const std::string prefix = std::string(error_code_name(ErrorCode::ParseError)) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        throw Error(ErrorCode::ParseError, path + ": " + msg);
    }
}

}  // namespace

char delimiter_for(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    return (ext == ".tsv" || ext == ".tab" || ext == ".txt") ? '\t' : ',';
}

Table parse_table(const std::string& text, char delim) {
    Table t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) {
            if (nl >= text.size()) break;
            continue;
        }
        auto cells = split_line(line, delim, line_no);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size()) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                                       std::to_string(std::min(cells.size(), t.header.size()) + 1) +
                                                       ": expected " + std::to_string(t.header.size()) +
                                                       " fields, found " + std::to_string(cells.size()));
            }
            t.rows.push_back(std::move(cells));
        }
        if (nl >= text.size()) break;
    }
    if (!have_header) throw Error(ErrorCode::ParseError, "line 1, column 1: missing header row");
    return t;
}

Table read_table(const std::string& path) { return parse_table(read_file(path), delimiter_for(path)); }

CountMatrix read_counts(const std::string& path) {
    const Table t = read_table_checked(path);
    require_columns(t, path, 2, "at least one feature column");
    const std::size_t n = t.rows.size(), p = t.header.size() - 1;
    Matrix<std::int64_t> y(n, p);
    std::vector<std::string> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples[i] = t.rows[i][0];
        for (std::size_t j = 0; j < p; ++j) {
            const auto& cell = t.rows[i][j + 1];
            std::int64_t v = 0;
            double d = 0.0;
            if (!parse_int64(cell, v)) {
                if (parse_double(cell, d)) {
                    throw Error(ErrorCode::NonIntegerCount, where(path, i + 2, j + 2) + ": \"" + cell + "\"");
                }
                throw Error(ErrorCode::ParseError, where(path, i + 2, j + 2) + ": not a count: \"" + cell + "\"");
            }
            if (v < 0) throw Error(ErrorCode::ParseError, where(path, i + 2, j + 2) + ": negative count");
            y(i, j) = v;
        }
    }
    return CountMatrix(std::move(y), std::move(samples), std::vector<std::string>(t.header.begin() + 1, t.header.end()));
}

LabeledCovariates read_covariates(const std::string& path) {
    const Table t = read_table_checked(path);
    require_columns(t, path, 2, "at least one covariate column");
    const std::size_t n = t.rows.size(), r = t.header.size() - 1;
    Matrix<double> x(n, r);
    std::vector<std::string> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples[i] = t.rows[i][0];
        for (std::size_t c = 0; c < r; ++c) {
            if (!parse_double(t.rows[i][c + 1], x(i, c))) {
                throw Error(ErrorCode::ParseError,
                            where(path, i + 2, c + 2) + ": not a finite number: \"" + t.rows[i][c + 1] + "\"");
            }
        }
    }
    return {std::move(samples),
            CovariateMatrix(std::move(x), std::vector<std::string>(t.header.begin() + 1, t.header.end()))};
}

LabeledGroups read_groups(const std::string& path) {
    const Table t = read_table_checked(path);
    require_columns(t, path, 2, "a group column");
    LabeledGroups g;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        std::int64_t v = 0;
        if (!parse_int64(t.rows[i][1], v) || v < 1 || v > 1000000) {
            throw Error(ErrorCode::ParseError, where(path, i + 2, 2) + ": group label must be a positive integer");
        }
        g.sample_ids.push_back(t.rows[i][0]);
        g.labels.push_back(static_cast<int>(v));
    }
    return g;
}

AlignedInputs align_by_sample(const CountMatrix& counts, const LabeledCovariates& covariates,
                              const LabeledGroups& groups) {
    auto index_of = [](const std::vector<std::string>& ids, const char* what) {
        std::unordered_map<std::string, std::size_t> m;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!m.emplace(ids[i], i).second) {
                throw Error(ErrorCode::UnalignedSampleIds, std::string("duplicate sample ") + ids[i] + " in " + what);
            }
        }
        return m;
    };
    const auto cov_idx = index_of(covariates.sample_ids, "covariates");
    const auto grp_idx = index_of(groups.sample_ids, "groups");
    const auto& ids = counts.sample_ids();
    for (const auto& id : ids) {
        if (!cov_idx.count(id)) throw Error(ErrorCode::UnalignedSampleIds, "sample " + id + " missing from covariates");
        if (!grp_idx.count(id)) throw Error(ErrorCode::UnalignedSampleIds, "sample " + id + " missing from groups");
    }
    std::unordered_map<std::string, std::size_t> count_idx;
    for (std::size_t i = 0; i < ids.size(); ++i) count_idx.emplace(ids[i], i);
    for (const auto& id : covariates.sample_ids) {
        if (!count_idx.count(id)) throw Error(ErrorCode::UnalignedSampleIds, "sample " + id + " missing from counts");
    }
    for (const auto& id : groups.sample_ids) {
        if (!count_idx.count(id)) throw Error(ErrorCode::UnalignedSampleIds, "sample " + id + " missing from counts");
    }
    const auto& cx = covariates.covariates;
    Matrix<double> x(ids.size(), cx.r());
    std::vector<int> labels(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t ci = cov_idx.at(ids[i]);
        for (std::size_t r = 0; r < cx.r(); ++r) x(i, r) = cx(ci, r);
        labels[i] = groups.labels[grp_idx.at(ids[i])];
    }
    return {counts, CovariateMatrix(std::move(x), cx.covariate_ids()), std::move(labels)};
}

std::string format_double(double x) {
    if (std::isnan(x)) return "NA";
    if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
    if (x == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), delim_(delimiter_for(path)) {}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
        }
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c) buffer_ += delim_;
        const auto& s = cells[c];
        if (s.find_first_of(std::string{delim_, '"', '\n'}) != std::string::npos) {
            buffer_ += '"';
            for (char ch : s) {
                if (ch == '"') buffer_ += '"';
                buffer_ += ch;
            }
            buffer_ += '"';
        } else {
            buffer_ += s;
        }
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path_);
    out << buffer_;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path_);
}

void write_counts(const std::string& path, const CountMatrix& counts) {
    CsvWriter w(path);
    std::vector<std::string> header{"sample_id"};
    header.insert(header.end(), counts.feature_ids().begin(), counts.feature_ids().end());
    w.row(header);
    for (std::size_t i = 0; i < counts.n(); ++i) {
        std::vector<std::string> row{counts.sample_ids()[i]};
        for (std::size_t j = 0; j < counts.p(); ++j) row.push_back(std::to_string(counts(i, j)));
        w.row(row);
    }
    w.close();
}

void write_covariates(const std::string& path, const std::vector<std::string>& sample_ids,
                      const CovariateMatrix& covariates) {
    CsvWriter w(path);
    std::vector<std::string> header{"sample_id"};
    header.insert(header.end(), covariates.covariate_ids().begin(), covariates.covariate_ids().end());
    w.row(header);
    char buf[40];
    for (std::size_t i = 0; i < covariates.n(); ++i) {
        std::vector<std::string> row{sample_ids.at(i)};
        for (std::size_t r = 0; r < covariates.r(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g", covariates(i, r));
            row.push_back(buf);
        }
        w.row(row);
    }
    w.close();
}

void write_groups(const std::string& path, const std::vector<std::string>& sample_ids,
                  const GroupAssignment& groups) {
    CsvWriter w(path);
    w.row({"sample_id", "group"});
    for (std::size_t i = 0; i < groups.n(); ++i) w.row({sample_ids.at(i), std::to_string(groups.labels()[i])});
    w.close();
}

void write_truth(const std::string& path, const std::vector<std::string>& feature_ids,
                 const std::vector<std::string>& covariate_ids, const SimTruth& truth) {
    CsvWriter w(path);
    std::vector<std::string> header{"feature_id", "gamma_true", "mu0_true", "mu2_true"};
    for (const auto& c : covariate_ids) header.push_back("beta_" + c);
    w.row(header);
    char buf[40];
    auto exact = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t j = 0; j < feature_ids.size(); ++j) {
        std::vector<std::string> row{feature_ids[j], std::to_string(truth.gamma_true[j]), exact(truth.mu0_true[j]),
                                     exact(truth.mu2_true[j])};
        for (std::size_t r = 0; r < covariate_ids.size(); ++r) row.push_back(exact(truth.beta_true(r, j)));
        w.row(row);
    }
    w.close();
}

LabeledTruth read_truth(const std::string& path) {
    const Table t = read_table_checked(path);
    if (t.header.size() < 4 || t.header[0] != "feature_id" || t.header[1] != "gamma_true") {
        throw Error(ErrorCode::ParseError, where(path, 1, 1) + ": expected feature_id,gamma_true,mu0_true,mu2_true,beta_*");
    }
    LabeledTruth out;
    const std::size_t p = t.rows.size(), r = t.header.size() - 4;
    for (std::size_t c = 4; c < t.header.size(); ++c) {
        const auto& h = t.header[c];
        out.covariate_ids.push_back(h.rfind("beta_", 0) == 0 ? h.substr(5) : h);
    }
    auto& tr = out.truth;
    tr.gamma_true.resize(p);
    tr.mu0_true.resize(p);
    tr.mu2_true.resize(p);
    tr.beta_true = Matrix<double>(r, p);
    tr.delta_true = Matrix<std::uint8_t>(r, p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto& row = t.rows[j];
        out.feature_ids.push_back(row[0]);
        std::int64_t g = 0;
        if (!parse_int64(row[1], g) || (g != 0 && g != 1)) {
            throw Error(ErrorCode::ParseError, where(path, j + 2, 2) + ": gamma_true must be 0 or 1");
        }
        tr.gamma_true[j] = static_cast<std::uint8_t>(g);
        double v = 0.0;
        for (std::size_t c = 2; c < row.size(); ++c) {
            if (!parse_double(row[c], v)) throw Error(ErrorCode::ParseError, where(path, j + 2, c + 1) + ": not a number");
            if (c == 2) tr.mu0_true[j] = v;
            else if (c == 3) tr.mu2_true[j] = v;
            else {
                tr.beta_true(c - 4, j) = v;
                tr.delta_true(c - 4, j) = v != 0.0 ? 1 : 0;
            }
        }
    }
    return out;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec || !std::filesystem::is_directory(path)) throw Error(ErrorCode::IoError, "cannot create directory " + path);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace zinb
