#pragma once

#include <cblas.h>

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsrl {

// Dense row-major tensor of doubles.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(numel_of(shape), 0.0) {}
    Tensor(std::initializer_list<std::size_t> s)
        : Tensor(std::vector<std::size_t>(s)) {}

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
    std::size_t ndim() const { return shape.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // Reinterprets the buffer with a new shape of identical element count.
    Tensor reshaped(std::vector<std::size_t> s) const {
        if (numel_of(s) != numel())
            throw std::invalid_argument("Tensor::reshaped: element count mismatch");
        Tensor t;
        t.shape = std::move(s);
        t.data = data;
        return t;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline void require_shape(const Tensor& t, const std::vector<std::size_t>& s,
                          const std::string& what) {
    if (t.shape != s) throw std::invalid_argument(what + ": unexpected tensor shape");
}

// C = alpha * op(A) * op(B) + beta * C, row-major.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 double alpha, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double beta, double* c, std::size_t ldc) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
                static_cast<int>(ldc));
}

}  // namespace lsrl
