#pragma once

#include <cstddef>

// Dispatched arithmetic kernels. Every entry point has a scalar reference
// implementation (kernels/ref.hpp) and, on x86-64 with AVX2+FMA, a vectorized
// variant selected once at startup. force_isa() pins the choice for tests;
// the LINEREG_ISA environment variable ("scalar" or "avx2") does the same for
// whole-process runs.
//
// Exactness contract, verified by the equivalence tests:
//   squared_distances, affine, colwise_max_argmax  — bit-identical to ref
//   row_sqdist, l1_distance                        — reassociated reductions,
//                                                    equal within tolerance

namespace linereg::kernels {

enum class Isa { scalar, avx2 };

bool cpu_has_avx2();
Isa active_isa();
const char* isa_name(Isa isa);

/// Pin the dispatch (tests). Throws std::invalid_argument if unsupported.
void force_isa(Isa isa);

void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz, double* out);

void row_sqdist(const float* rows, std::size_t n, std::size_t dim, const float* q, float* out);
void row_sqdist(const double* rows, std::size_t n, std::size_t dim, const double* q, double* out);

void affine(const float* x, std::size_t n, std::size_t cin, const float* w, const float* b,
            std::size_t cout, bool relu, float* y);
void affine(const double* x, std::size_t n, std::size_t cin, const double* w, const double* b,
            std::size_t cout, bool relu, double* y);

void colwise_max_argmax(const float* rows, std::size_t k, std::size_t c, float* out_max,
                        int* out_argmax);
void colwise_max_argmax(const double* rows, std::size_t k, std::size_t c, double* out_max,
                        int* out_argmax);

float l1_distance(const float* a, const float* b, std::size_t n);
double l1_distance(const double* a, const double* b, std::size_t n);

}  // namespace linereg::kernels

// AVX2 entry points (defined in avx2.cpp when compiled in). Callable only
// after a runtime cpu_has_avx2() check.
#if defined(__x86_64__) || defined(_M_X64)
#define LINEREG_KERNELS_HAVE_AVX2 1
namespace linereg::kernels::avx2 {

void squared_distances(const double* xs, const double* ys, const double* zs,
                       std::size_t n, double qx, double qy, double qz, double* out);
void row_sqdist(const float* rows, std::size_t n, std::size_t dim, const float* q, float* out);
void row_sqdist(const double* rows, std::size_t n, std::size_t dim, const double* q, double* out);
void affine(const float* x, std::size_t n, std::size_t cin, const float* w, const float* b,
            std::size_t cout, bool relu, float* y);
void affine(const double* x, std::size_t n, std::size_t cin, const double* w, const double* b,
            std::size_t cout, bool relu, double* y);
void colwise_max_argmax(const float* rows, std::size_t k, std::size_t c, float* out_max,
                        int* out_argmax);
void colwise_max_argmax(const double* rows, std::size_t k, std::size_t c, double* out_max,
                        int* out_argmax);
float l1_distance(const float* a, const float* b, std::size_t n);
double l1_distance(const double* a, const double* b, std::size_t n);

}  // namespace linereg::kernels::avx2
#else
#define LINEREG_KERNELS_HAVE_AVX2 0
#endif
