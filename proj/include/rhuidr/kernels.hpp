#pragma once

// Flat inner loops used by the operators and proximity maps. Each entry has a
// portable scalar reference and, where the CPU allows, an AVX2 variant; the
// active table is picked once at startup. Elementwise kernels agree bit for
// bit across variants; reductions agree to rounding.

#include <cstddef>
#include <string_view>
#include <vector>

namespace rhuidr::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // out = a - b
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  // out = alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, const double* y, double* out,
                std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = x * w (elementwise)
  void (*mul)(const double* x, const double* w, double* out, std::size_t n);
  // out = sign(x) * max(|x| - t, 0)
  void (*soft_threshold)(const double* x, double t, double* out, std::size_t n);
  // out = max(x, 0)
  void (*clamp_nonneg)(const double* x, double* out, std::size_t n);
  // acc += x * x
  void (*accumulate_sq)(const double* x, double* acc, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*sum_abs)(const double* x, std::size_t n);
  // sum (a - b)^2
  double (*diff_sq)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the running CPU (or the build) lacks AVX2+FMA.
const KernelTable* avx2_table();

/// Selected on first use: RHUIDR_KERNELS=scalar|avx2 forces a variant,
/// otherwise the widest supported one.
const KernelTable& active();

/// Variants usable on this machine, scalar first.
std::vector<const KernelTable*> available();

}  // namespace rhuidr::kernels
