#include "mmce/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace mmce::kernels::avx2 {

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i),
                          _mm256_loadu_pd(b.data() + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy);
    _mm256_storeu_pd(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = b[r] + dot({w.data() + r * cols, cols}, x);
  }
}

void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy(gy[r], {w.data() + r * cols, cols}, gx);
  }
}

void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    axpy(gy[r], x, {gw.data() + r * cols, cols});
  }
}

}  // namespace mmce::kernels::avx2

#else

namespace mmce::kernels::avx2 {
bool available() { return false; }
double dot(std::span<const double> a, std::span<const double> b) {
  return scalar::dot(a, b);
}
void axpy(double a, std::span<const double> x, std::span<double> y) {
  scalar::axpy(a, x, y);
}
void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols) {
  scalar::matvec_affine(w, b, x, y, rows, cols);
}
void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols) {
  scalar::matvec_t_acc(w, gy, gx, rows, cols);
}
void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols) {
  scalar::outer_acc(gy, x, gw, rows, cols);
}
}  // namespace mmce::kernels::avx2

#endif
