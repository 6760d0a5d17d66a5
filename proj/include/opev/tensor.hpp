#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "opev/errors.hpp"

namespace opev {

/// Dense row-major matrix of doubles. The only tensor rank the toolkit needs:
/// batches of observations, weight matrices, and gradients are all 2-D.
class Tensor2 {
public:
    Tensor2() = default;

    Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("Tensor2: data length does not match rows*cols");
    }

    /// Construction that rejects NaN/Inf entries.
    static Tensor2 checked(std::size_t rows, std::size_t cols, std::vector<double> data) {
        Tensor2 t(rows, cols, std::move(data));
        for (double v : t.data_)
            if (!std::isfinite(v)) throw ValidationError("Tensor2: non-finite entry");
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace opev
