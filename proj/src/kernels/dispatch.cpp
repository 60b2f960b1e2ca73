#include "linereg/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "linereg/kernels/ref.hpp"

namespace linereg::kernels {

bool cpu_has_avx2() {
#if LINEREG_KERNELS_HAVE_AVX2
  // FMA is a separate CPUID bit from AVX2; the avx2 kernels use both.
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa pick_initial_isa() {
  if (const char* env = std::getenv("LINEREG_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
    // Unknown or unsupported value: fall through to auto-detection.
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

Isa& isa_slot() {
  static Isa isa = pick_initial_isa();
  return isa;
}

}  // namespace

Isa active_isa() { return isa_slot(); }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) {
    throw std::invalid_argument("force_isa: avx2 not supported on this CPU");
  }
  isa_slot() = isa;
}

#if LINEREG_KERNELS_HAVE_AVX2
#define LINEREG_DISPATCH(fn, ...) \
  return active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : ref::fn(__VA_ARGS__)
#else
#define LINEREG_DISPATCH(fn, ...) return ref::fn(__VA_ARGS__)
#endif

void squared_distances(const double* xs, const double* ys, const double* zs, std::size_t n,
                       double qx, double qy, double qz, double* out) {
  LINEREG_DISPATCH(squared_distances, xs, ys, zs, n, qx, qy, qz, out);
}

void row_sqdist(const float* rows, std::size_t n, std::size_t dim, const float* q, float* out) {
  LINEREG_DISPATCH(row_sqdist, rows, n, dim, q, out);
}

void row_sqdist(const double* rows, std::size_t n, std::size_t dim, const double* q, double* out) {
  LINEREG_DISPATCH(row_sqdist, rows, n, dim, q, out);
}

void affine(const float* x, std::size_t n, std::size_t cin, const float* w, const float* b,
            std::size_t cout, bool relu, float* y) {
  LINEREG_DISPATCH(affine, x, n, cin, w, b, cout, relu, y);
}

void affine(const double* x, std::size_t n, std::size_t cin, const double* w, const double* b,
            std::size_t cout, bool relu, double* y) {
  LINEREG_DISPATCH(affine, x, n, cin, w, b, cout, relu, y);
}

void colwise_max_argmax(const float* rows, std::size_t k, std::size_t c, float* out_max,
                        int* out_argmax) {
  LINEREG_DISPATCH(colwise_max_argmax, rows, k, c, out_max, out_argmax);
}

void colwise_max_argmax(const double* rows, std::size_t k, std::size_t c, double* out_max,
                        int* out_argmax) {
  LINEREG_DISPATCH(colwise_max_argmax, rows, k, c, out_max, out_argmax);
}

float l1_distance(const float* a, const float* b, std::size_t n) {
  LINEREG_DISPATCH(l1_distance, a, b, n);
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  LINEREG_DISPATCH(l1_distance, a, b, n);
}

#undef LINEREG_DISPATCH

}  // namespace linereg::kernels
