#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace evt {

// Dense row-major matrix of doubles. Covers everything this library needs
// (data tables, coefficient matrices, TPDMs); no BLAS required at d <= 50.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: data size does not match dimensions");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            out[i] = (*this)(i, j);
        }
        return out;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // this * transpose(this), symmetric rows x rows result.
    Matrix times_transpose() const {
        Matrix out(rows_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = i; j < rows_; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < cols_; ++k) {
                    s += (*this)(i, k) * (*this)(j, k);
                }
                out(i, j) = s;
                out(j, i) = s;
            }
        }
        return out;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace evt
