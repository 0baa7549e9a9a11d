#include "lse/matrix.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "lse/error.hpp"

#ifdef LSE_HAVE_OPENMP
#include <omp.h>
#endif

namespace lse {

namespace {

std::atomic<int> g_num_threads{1};

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void set_num_threads(int n) { g_num_threads.store(n < 1 ? 1 : n); }
int num_threads() { return g_num_threads.load(); }

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.size() ? rows.begin()->size() : 0;
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_)
            throw usage_error("Matrix::from_rows: ragged initializer");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::select_rows(const std::vector<std::size_t>& indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_)
            throw usage_error("Matrix::select_rows: index " + std::to_string(indices[i]) +
                              " out of range for " + std::to_string(rows_) + " rows");
        const double* src = row(indices[i]);
        double* dst = out.row(i);
        for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
    }
    return out;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw usage_error("matmul: dimension mismatch (" + shape_of(a) + ")*(" + shape_of(b) + ")");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n, 0.0);
#ifdef LSE_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(num_threads()) if (num_threads() > 1 && m > 63)
#endif
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw usage_error("matmul_at_b: dimension mismatch (" + shape_of(a) + ")^T*(" + shape_of(b) + ")");
    const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
    Matrix c(m, n, 0.0);
    // Output rows are processed in small blocks so each thread streams over
    // the shared k dimension once while its block of c stays cached.
    constexpr std::size_t block = 16;
    const std::size_t nblocks = (m + block - 1) / block;
#ifdef LSE_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(num_threads()) if (num_threads() > 1 && nblocks > 1)
#endif
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
        const std::size_t i0 = bi * block;
        const std::size_t i1 = std::min(i0 + block, m);
        for (std::size_t r = 0; r < k; ++r) {
            const double* ar = a.row(r);
            const double* br = b.row(r);
            for (std::size_t i = i0; i < i1; ++i) {
                const double ari = ar[i];
                double* ci = c.row(i);
                for (std::size_t j = 0; j < n; ++j) ci[j] += ari * br[j];
            }
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw usage_error("matmul_a_bt: dimension mismatch (" + shape_of(a) + ")*(" + shape_of(b) + ")^T");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n, 0.0);
#ifdef LSE_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(num_threads()) if (num_threads() > 1 && m > 63)
#endif
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.row(j);
            double sum = 0.0;
            for (std::size_t p = 0; p < k; ++p) sum += ai[p] * bj[p];
            ci[j] = sum;
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

}  // namespace lse
