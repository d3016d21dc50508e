#pragma once

#include "bpi/types.hpp"

namespace bpi {

// argmin_{x >= 0} ||a x - b||_2 (Lawson-Hanson active set on the normal
// equations).
Vector nnls(const Matrix& a, const Vector& b);

// Same problem given gram = a^T a and rhs = a^T b.
Vector nnls_gram(const Matrix& gram, const Vector& rhs);

// Column-wise nnls for min ||t - r p||_F over p >= 0.
Matrix nnls_columns(const Matrix& r, const Matrix& t);

}  // namespace bpi
