#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace leapgrid {

// Dense row-major 2-D tensor of doubles. Batch dimension along rows.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    Tensor2(int r, int c, std::initializer_list<double> values);

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    Tensor2 row(int i) const;

    bool operator==(const Tensor2&) const = default;
};

// C = A * B  (A: m x k, B: k x n). Throws ShapeError on mismatch.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);

// C = A * B^T and C = A^T * B, used by the backward pass.
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);

}  // namespace leapgrid
