#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace misa {

// Dense row-major matrix of doubles; samples are rows, features are columns.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Binary observation mask stored as doubles so it composes with Matrix
// arithmetic directly. 1 = observed, 0 = missing.
using MaskMatrix = Matrix;

inline std::string shape_string(const Matrix& m) {
    return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

inline bool same_shape(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

// Throws dimension_error naming `what` when shapes differ.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

bool all_finite(const Matrix& m);

bool is_binary(const Matrix& m);

// Training frees and reallocates the same buffers every step. On glibc this
// stops the heap from handing them back to the kernel between steps, which
// otherwise dominates runtime with page faults. Idempotent; no-op elsewhere.
void keep_heap_resident();

// Copies rows of `src` selected by `index` (in order).
template <typename IndexRange>
Matrix gather_rows(const Matrix& src, const IndexRange& index) {
    Matrix out(static_cast<Eigen::Index>(std::size(index)), src.cols());
    Eigen::Index r = 0;
    for (auto i : index) out.row(r++) = src.row(static_cast<Eigen::Index>(i));
    return out;
}

template <typename IndexRange>
Matrix gather_cols(const Matrix& src, const IndexRange& index) {
    Matrix out(src.rows(), static_cast<Eigen::Index>(std::size(index)));
    Eigen::Index c = 0;
    for (auto i : index) out.col(c++) = src.col(static_cast<Eigen::Index>(i));
    return out;
}

} // namespace misa
