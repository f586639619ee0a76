#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tablefill/simd/kernels.hpp"

namespace tablefill::simd {

namespace {

struct KernelTable {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

constexpr KernelTable kScalarTable{Backend::kScalar, &scalar::dot, &scalar::squared_norm, &scalar::axpy,
                                   &scalar::scale};
constexpr KernelTable kAvx2Table{Backend::kAvx2, &avx2::dot, &avx2::squared_norm, &avx2::axpy, &avx2::scale};

const KernelTable* detect() {
  if (const char* env = std::getenv("TABLEFILL_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return &kScalarTable;
  }
  return avx2::supported() ? &kAvx2Table : &kScalarTable;
}

const KernelTable*& table() {
  static const KernelTable* active = detect();
  return active;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd: length mismatch");
}

}  // namespace

std::string_view backend_name(Backend b) { return b == Backend::kAvx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return b == Backend::kScalar || avx2::supported(); }

Backend active_backend() { return table()->backend; }

void set_backend(Backend b) {
  if (!backend_available(b)) throw std::invalid_argument("simd backend not available on this CPU");
  table() = b == Backend::kAvx2 ? &kAvx2Table : &kScalarTable;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return table()->dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) { return table()->squared_norm(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  table()->axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> y) { table()->scale(alpha, y.data(), y.size()); }

double cosine(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  const KernelTable* k = table();
  const double na = k->squared_norm(a.data(), a.size());
  const double nb = k->squared_norm(b.data(), b.size());
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = k->dot(a.data(), b.data(), a.size()) / std::sqrt(na * nb);
  // Rounding can push |c| marginally past 1.
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

void matvec(std::span<const double> matrix, std::span<const double> x, std::span<double> out) {
  check_sizes(matrix.size(), x.size() * out.size());
  const KernelTable* k = table();
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = k->dot(matrix.data() + r * x.size(), x.data(), x.size());
}

void rank1_update(double alpha, std::span<const double> u, std::span<const double> v, std::span<double> matrix) {
  check_sizes(matrix.size(), u.size() * v.size());
  const KernelTable* k = table();
  for (std::size_t r = 0; r < u.size(); ++r) {
    if (u[r] != 0.0) k->axpy(alpha * u[r], v.data(), matrix.data() + r * v.size(), v.size());
  }
}

void matvec_transposed(std::span<const double> matrix, std::span<const double> y, std::span<double> out) {
  check_sizes(matrix.size(), y.size() * out.size());
  const KernelTable* k = table();
  for (auto& o : out) o = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (y[r] != 0.0) k->axpy(y[r], matrix.data() + r * out.size(), out.data(), out.size());
  }
}

}  // namespace tablefill::simd
