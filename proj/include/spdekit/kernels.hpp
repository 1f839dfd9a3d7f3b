#pragma once

// Data-parallel inner loops used by the sparse and FEM layers. Each kernel has
// a scalar reference implementation and, on x86-64, an AVX2 variant; the
// variant is chosen once at startup from CPUID. Setting SPDEKIT_SIMD=scalar in
// the environment forces the reference kernels.
//
// Element kernels are bit-identical across variants (no FMA, same operation
// order per lane). Reductions (dot, gather_dot) reassociate and agree to a
// few ulps only.

#include <cstddef>
#include <cstdint>
#include <span>

namespace spdekit::kernels {

/// Structure-of-arrays view of a batch of triangles (vertex coordinates).
struct TriangleBatch {
  std::span<const double> x0, y0, x1, y1, x2, y2;
  std::size_t size() const { return x0.size(); }
};

/// Per-triangle outputs: area and the six distinct entries of the symmetric
/// 3x3 element stiffness <grad phi_i, H grad phi_j>.
struct ElementStiffness {
  std::span<double> area, g00, g01, g02, g11, g12, g22;
};

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Tensor2 {
  double xx = 1.0, xy = 0.0, yy = 1.0;
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*gather_dot)(const double* values, const std::int32_t* index, const double* x,
                       std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*element_stiffness)(const TriangleBatch& tris, const Tensor2& h, const ElementStiffness& out);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double gather_dot(std::span<const double> values, std::span<const std::int32_t> index,
                         const double* x) {
  return active().gather_dot(values.data(), index.data(), x, values.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace spdekit::kernels
