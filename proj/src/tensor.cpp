#include "leapgrid/tensor.hpp"

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "leapgrid/errors.hpp"

namespace leapgrid {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

RowMajorMap map_of(const Tensor2& t) { return RowMajorMap(t.data.data(), t.rows, t.cols); }

}  // namespace

Tensor2::Tensor2(int r, int c, std::initializer_list<double> values) : Tensor2(r, c) {
    if (values.size() != data.size()) {
        throw ShapeError("initializer size " + std::to_string(values.size()) +
                         " does not match " + std::to_string(r) + "x" + std::to_string(c));
    }
    std::copy(values.begin(), values.end(), data.begin());
}

bool Tensor2::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor2 Tensor2::row(int i) const {
    Tensor2 out(1, cols);
    for (int j = 0; j < cols; ++j) out(0, j) = (*this)(i, j);
    return out;
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul shape mismatch: " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " * " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
    }
    Tensor2 c(a.rows, b.cols);
    RowMajorMutMap(c.data.data(), c.rows, c.cols).noalias() = map_of(a) * map_of(b);
    return c;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.cols) {
        throw ShapeError("matmul_nt shape mismatch: " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " * (" + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols) + ")^T");
    }
    Tensor2 c(a.rows, b.rows);
    RowMajorMutMap(c.data.data(), c.rows, c.cols).noalias() = map_of(a) * map_of(b).transpose();
    return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    if (a.rows != b.rows) {
        throw ShapeError("matmul_tn shape mismatch: (" + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + ")^T * " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
    }
    Tensor2 c(a.cols, b.cols);
    RowMajorMutMap(c.data.data(), c.rows, c.cols).noalias() = map_of(a).transpose() * map_of(b);
    return c;
}

}  // namespace leapgrid
