#include "element_math.hpp"
#include "spdekit/kernels.hpp"

namespace spdekit::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double gather_dot_scalar(const double* values, const std::int32_t* index, const double* x,
                         std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += values[i] * x[index[i]];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void element_stiffness_scalar(const TriangleBatch& tris, const Tensor2& h,
                              const ElementStiffness& out) {
  for (std::size_t k = 0; k < tris.size(); ++k) detail::element_one(tris, h, out, k);
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{"scalar", dot_scalar, gather_dot_scalar, axpy_scalar,
                                 element_stiffness_scalar};
  return table;
}

}  // namespace spdekit::kernels
