#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace lse {

// Dense row-major matrix of doubles. The single numeric carrier of the
// library: feature tables, layer weights, activations and gradients.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    Matrix select_rows(const std::vector<std::size_t>& indices) const;
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// c = a * b. Throws when a.cols != b.rows, naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);

// c = transpose(a) * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

// c = a * transpose(b) without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Number of worker threads used by the matmul family. Defaults to 1.
// Results are bitwise identical for every thread count: each output row is
// produced by exactly one thread with a fixed accumulation order.
void set_num_threads(int n);
int num_threads();

}  // namespace lse
