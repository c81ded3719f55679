#pragma once

// Data-parallel inner loops used by the forward/backward passes.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Set MMCE_KERNELS=scalar
// (or =avx2) in the environment to pin a backend.

#include <cstddef>
#include <span>

namespace mmce::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
const char* backend_name();

double dot(std::span<const double> a, std::span<const double> b);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// y = W x + b, W row-major (rows x cols)
void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols);

// gx += W^T gy
void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols);

// gw += gy x^T
void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols);
void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols);
void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols);
}  // namespace scalar

namespace avx2 {
bool available();
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void matvec_affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::span<double> y,
                   std::size_t rows, std::size_t cols);
void matvec_t_acc(std::span<const double> w, std::span<const double> gy,
                  std::span<double> gx, std::size_t rows, std::size_t cols);
void outer_acc(std::span<const double> gy, std::span<const double> x,
               std::span<double> gw, std::size_t rows, std::size_t cols);
}  // namespace avx2

}  // namespace mmce::kernels
