#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision vector kernels used by the embedding scorer and the
// cosine features. Each kernel has a scalar reference implementation and an
// AVX2+FMA variant; the variant is picked once at startup from CPUID and can
// be pinned with TABLEFILL_SIMD=scalar or set_backend().
namespace tablefill::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Throws std::invalid_argument when the backend is not available on this CPU.
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> y);

// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// out[r] = dot(row r of the row-major matrix, x); matrix is out.size() x x.size().
void matvec(std::span<const double> matrix, std::span<const double> x, std::span<double> out);

// matrix += alpha * outer(u, v); matrix is u.size() x v.size(), row-major.
void rank1_update(double alpha, std::span<const double> u, std::span<const double> v,
                  std::span<double> matrix);

// out[c] = sum_r matrix[r][c] * y[r]  (transposed product), out.size() columns.
void matvec_transposed(std::span<const double> matrix, std::span<const double> y, std::span<double> out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace avx2

}  // namespace tablefill::simd
