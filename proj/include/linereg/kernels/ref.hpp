#pragma once

#include <cmath>
#include <cstddef>

// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are equivalence-tested against. Multiply-adds that the SIMD side
// fuses are spelled with std::fma here so both paths round identically.

namespace linereg::kernels::ref {

/// Squared Euclidean distances from query (qx,qy,qz) to n points in SoA layout.
template <typename T>
inline void squared_distances(const T* xs, const T* ys, const T* zs, std::size_t n,
                              T qx, T qy, T qz, T* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const T dx = xs[i] - qx;
    const T dy = ys[i] - qy;
    const T dz = zs[i] - qz;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

/// Squared L2 distance from `q` to each row of a dense row-major matrix.
template <typename T>
inline void row_sqdist(const T* rows, std::size_t n, std::size_t dim, const T* q, T* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* r = rows + i * dim;
    T acc = T(0);
    for (std::size_t c = 0; c < dim; ++c) {
      const T d = r[c] - q[c];
      acc += d * d;
    }
    out[i] = acc;
  }
}

/// Y = X * W + b, optionally ReLU-clamped.
/// X: n x cin (row-major), W: cin x cout (row-major), b: cout, Y: n x cout.
template <typename T>
inline void affine(const T* x, std::size_t n, std::size_t cin, const T* w, const T* b,
                   std::size_t cout, bool relu, T* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* xi = x + i * cin;
    T* yi = y + i * cout;
    for (std::size_t co = 0; co < cout; ++co) yi[co] = b[co];
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const T xv = xi[ci];
      const T* wr = w + ci * cout;
      for (std::size_t co = 0; co < cout; ++co) yi[co] = std::fma(xv, wr[co], yi[co]);
    }
    if (relu) {
      for (std::size_t co = 0; co < cout; ++co) yi[co] = yi[co] > T(0) ? yi[co] : T(0);
    }
  }
}

/// Column-wise max over k rows of a k x c row-major block, plus the row index
/// of each max (first occurrence wins).
template <typename T>
inline void colwise_max_argmax(const T* rows, std::size_t k, std::size_t c, T* out_max,
                               int* out_argmax) {
  for (std::size_t j = 0; j < c; ++j) {
    out_max[j] = rows[j];
    out_argmax[j] = 0;
  }
  for (std::size_t i = 1; i < k; ++i) {
    const T* ri = rows + i * c;
    for (std::size_t j = 0; j < c; ++j) {
      if (ri[j] > out_max[j]) {
        out_max[j] = ri[j];
        out_argmax[j] = static_cast<int>(i);
      }
    }
  }
}

template <typename T>
inline T l1_distance(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace linereg::kernels::ref
