#ifndef ZINB_MATRIX_HPP
#define ZINB_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace zinb {

/**
 * Dense column-major matrix. Columns are contiguous, which matches the
 * per-feature access pattern of the sampler.
 */
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<T> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const T> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace zinb

#endif
