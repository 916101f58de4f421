#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace multiroc {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// rate matrices and the rank-1 factorization; everything heavier lives in
// the kernels that use it.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double> col(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Stacks `top` over `bottom`; column counts must agree.
inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
    assert(top.cols() == bottom.cols());
    Matrix out(top.rows() + bottom.rows(), top.cols());
    auto dst = out.data();
    std::copy(top.data().begin(), top.data().end(), dst.begin());
    std::copy(bottom.data().begin(), bottom.data().end(), dst.begin() + top.size());
    return out;
}

}  // namespace multiroc
