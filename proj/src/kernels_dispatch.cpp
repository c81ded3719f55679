#include "mmce/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mmce::kernels {

namespace {
Backend pick_backend() {
  const char* env = std::getenv("MMCE_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2::available()) return Backend::Avx2;
  }
  return avx2::available() ? Backend::Avx2 : Backend::Scalar;
}
}  // namespace

Backend active_backend() {
  static const Backend b = pick_backend();
  return b;
}

const char* backend_name() {
  return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_backend() == Backend::Avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_backend() == Backend::Avx2 ? avx2::axpy(a, x, y) : scalar::axpy(a, x, y);
}

void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols) {
  active_backend() == Backend::Avx2 ? avx2::matvec_affine(w, b, x, y, rows, cols)
                                    : scalar::matvec_affine(w, b, x, y, rows, cols);
}

void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols) {
  active_backend() == Backend::Avx2 ? avx2::matvec_t_acc(w, gy, gx, rows, cols)
                                    : scalar::matvec_t_acc(w, gy, gx, rows, cols);
}

void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols) {
  active_backend() == Backend::Avx2 ? avx2::outer_acc(gy, x, gw, rows, cols)
                                    : scalar::outer_acc(gy, x, gw, rows, cols);
}

}  // namespace mmce::kernels
