// Compiled with -mavx2 and without FMA so the element kernel matches the
// scalar reference bit for bit.

#include <immintrin.h>

#include "element_math.hpp"
#include "spdekit/kernels.hpp"

namespace spdekit::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double gather_dot_avx2(const double* values, const std::int32_t* index, const double* x,
                       std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index + i));
    __m256d xv = _mm256_i32gather_pd(x, idx, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(values + i), xv));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += values[i] * x[index[i]];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

struct Lanes {
  __m256d xx, xy, yy;
};

inline __m256d perp_form(const Lanes& h, __m256d ax, __m256d ay, __m256d bx, __m256d by) {
  __m256d t0 = _mm256_mul_pd(h.xx, _mm256_mul_pd(ay, by));
  __m256d t1 = _mm256_mul_pd(h.xy, _mm256_add_pd(_mm256_mul_pd(ay, bx), _mm256_mul_pd(ax, by)));
  __m256d t2 = _mm256_mul_pd(h.yy, _mm256_mul_pd(ax, bx));
  return _mm256_add_pd(_mm256_sub_pd(t0, t1), t2);
}

void element_stiffness_avx2(const TriangleBatch& t, const Tensor2& h, const ElementStiffness& o) {
  const Lanes hl{_mm256_set1_pd(h.xx), _mm256_set1_pd(h.xy), _mm256_set1_pd(h.yy)};
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const std::size_t n = t.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x0 = _mm256_loadu_pd(&t.x0[k]), y0 = _mm256_loadu_pd(&t.y0[k]);
    const __m256d x1 = _mm256_loadu_pd(&t.x1[k]), y1 = _mm256_loadu_pd(&t.y1[k]);
    const __m256d x2 = _mm256_loadu_pd(&t.x2[k]), y2 = _mm256_loadu_pd(&t.y2[k]);
    const __m256d e0x = _mm256_sub_pd(x2, x1), e0y = _mm256_sub_pd(y2, y1);
    const __m256d e1x = _mm256_sub_pd(x0, x2), e1y = _mm256_sub_pd(y0, y2);
    const __m256d e2x = _mm256_sub_pd(x1, x0), e2y = _mm256_sub_pd(y1, y0);
    const __m256d twice_area =
        _mm256_sub_pd(_mm256_mul_pd(e2x, _mm256_xor_pd(e1y, sign)),
                      _mm256_mul_pd(e2y, _mm256_xor_pd(e1x, sign)));
    const __m256d denom = _mm256_mul_pd(two, twice_area);
    _mm256_storeu_pd(&o.area[k], _mm256_mul_pd(half, twice_area));
    _mm256_storeu_pd(&o.g00[k], _mm256_div_pd(perp_form(hl, e0x, e0y, e0x, e0y), denom));
    _mm256_storeu_pd(&o.g01[k], _mm256_div_pd(perp_form(hl, e0x, e0y, e1x, e1y), denom));
    _mm256_storeu_pd(&o.g02[k], _mm256_div_pd(perp_form(hl, e0x, e0y, e2x, e2y), denom));
    _mm256_storeu_pd(&o.g11[k], _mm256_div_pd(perp_form(hl, e1x, e1y, e1x, e1y), denom));
    _mm256_storeu_pd(&o.g12[k], _mm256_div_pd(perp_form(hl, e1x, e1y, e2x, e2y), denom));
    _mm256_storeu_pd(&o.g22[k], _mm256_div_pd(perp_form(hl, e2x, e2y, e2x, e2y), denom));
  }
  for (; k < n; ++k) detail::element_one(t, h, o, k);
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{"avx2", dot_avx2, gather_dot_avx2, axpy_avx2,
                                 element_stiffness_avx2};
  return table;
}

}  // namespace spdekit::kernels
