#include "ptycho/fields.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace ptycho {

double norm_sq(const ComplexGrid& g) {
  double s = 0.0;
  for (const cdouble& z : g.data) s += std::norm(z);
  return s;
}

cdouble inner(const ComplexGrid& a, const ComplexGrid& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(fmt::format(
        "inner: shape mismatch ({}x{} vs {}x{})", a.height, a.width, b.height, b.width));
  }
  cdouble s = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
  return s;
}

void check_finite(const ComplexGrid& g, const char* what) {
  for (size_t i = 0; i < g.data.size(); ++i) {
    const cdouble& z = g.data[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument(fmt::format("{}: non-finite value at (row {}, col {})",
                                              what, i / g.width, i % g.width));
    }
  }
}

double ProbeStack::total_power() const {
  double s = 0.0;
  for (const ComplexGrid& m : modes) s += norm_sq(m);
  return s;
}

void ProbeStack::check_consistent(const char* what) const {
  if (modes.empty()) throw std::invalid_argument(fmt::format("{}: probe has no modes", what));
  for (const ComplexGrid& m : modes) {
    if (!m.same_shape(modes.front())) {
      throw std::invalid_argument(fmt::format("{}: probe modes differ in shape", what));
    }
  }
}

void ScanPositions::check_in_bounds(int obj_h, int obj_w, int probe_h, int probe_w) const {
  for (size_t k = 0; k < offsets.size(); ++k) {
    const int r = offsets[k][0], c = offsets[k][1];
    if (r < 0 || c < 0 || r + probe_h > obj_h || c + probe_w > obj_w) {
      throw std::invalid_argument(fmt::format(
          "scan position {} at ({}, {}) puts a {}x{} footprint outside a {}x{} object",
          k, r, c, probe_h, probe_w, obj_h, obj_w));
    }
  }
}

void DiffractionDataset::validate() const {
  if (patterns.empty()) throw std::invalid_argument("dataset: no diffraction patterns");
  if (patterns.size() != positions.size()) {
    throw std::invalid_argument(fmt::format("dataset: {} patterns but {} scan positions",
                                            patterns.size(), positions.size()));
  }
  const int h = patterns.front().height, w = patterns.front().width;
  for (size_t k = 0; k < patterns.size(); ++k) {
    const RealGrid& p = patterns[k];
    if (p.height != h || p.width != w) {
      throw std::invalid_argument(fmt::format("dataset: pattern {} shape differs", k));
    }
    for (size_t i = 0; i < p.data.size(); ++i) {
      if (!std::isfinite(p.data[i]) || p.data[i] < 0.0) {
        throw std::invalid_argument(fmt::format(
            "dataset: pattern {} has invalid intensity {} at (row {}, col {})",
            k, p.data[i], i / p.width, i % p.width));
      }
    }
  }
}

namespace {

// Plans are cached per shape and direction. FFTW_ESTIMATE keeps planning
// deterministic; execution uses the new-array interface so concurrent
// transforms never share buffers.
class PlanCache {
 public:
  fftw_plan get(int h, int w, int sign) {
    const std::scoped_lock lock(mu_);
    const auto key = std::make_tuple(h, w, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* in = fftw_alloc_complex(static_cast<size_t>(h) * w);
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct FftwBuffer {
  fftw_complex* p;
  explicit FftwBuffer(size_t n) : p(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// Shared core: unitary 2-D DFT with centered zero frequency. The centering
// permutation is applied to the output of the forward transform and to the
// input of the inverse one, so the pair stays mutually inverse and adjoint.
ComplexGrid dft2_centered(const ComplexGrid& g, int sign) {
  const int h = g.height, w = g.width;
  if (h < 1 || w < 1) throw std::invalid_argument("fft2: empty grid");
  const size_t n = g.size();
  FftwBuffer in(n), out(n);
  const int h2 = h / 2, w2 = w / 2;

  if (sign == FFTW_FORWARD) {
    for (size_t i = 0; i < n; ++i) {
      in.p[i][0] = g.data[i].real();
      in.p[i][1] = g.data[i].imag();
    }
  } else {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const cdouble& z = g.at((y + h2) % h, (x + w2) % w);
        const size_t i = static_cast<size_t>(y) * w + x;
        in.p[i][0] = z.real();
        in.p[i][1] = z.imag();
      }
    }
  }

  fftw_execute_dft(plan_cache().get(h, w, sign), in.p, out.p);

  ComplexGrid result(h, w, g.pitch);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  if (sign == FFTW_FORWARD) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        result.at((y + h2) % h, (x + w2) % w) = cdouble(out.p[i][0] * s, out.p[i][1] * s);
      }
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      result.data[i] = cdouble(out.p[i][0] * s, out.p[i][1] * s);
    }
  }
  return result;
}

}  // namespace

ComplexGrid fft2_unitary(const ComplexGrid& g) {
  check_finite(g, "fft2_unitary");
  return dft2_centered(g, FFTW_FORWARD);
}

ComplexGrid ifft2_unitary(const ComplexGrid& g) {
  check_finite(g, "ifft2_unitary");
  return dft2_centered(g, FFTW_BACKWARD);
}

ComplexGrid extract_patch(const ComplexGrid& obj, int row, int col, int h, int w) {
  if (row < 0 || col < 0 || row + h > obj.height || col + w > obj.width) {
    throw std::invalid_argument(fmt::format(
        "extract_patch: {}x{} window at ({}, {}) exceeds {}x{} object bounds",
        h, w, row, col, obj.height, obj.width));
  }
  ComplexGrid patch(h, w, obj.pitch);
  for (int y = 0; y < h; ++y) {
    const cdouble* src = &obj.at(row + y, col);
    cdouble* dst = &patch.at(y, 0);
    std::copy(src, src + w, dst);
  }
  return patch;
}

void accumulate_patch(ComplexGrid& target, int row, int col, const ComplexGrid& patch) {
  if (row < 0 || col < 0 || row + patch.height > target.height ||
      col + patch.width > target.width) {
    throw std::invalid_argument(fmt::format(
        "accumulate_patch: {}x{} patch at ({}, {}) exceeds {}x{} target bounds",
        patch.height, patch.width, row, col, target.height, target.width));
  }
  for (int y = 0; y < patch.height; ++y) {
    const cdouble* src = &patch.at(y, 0);
    cdouble* dst = &target.at(row + y, col);
    for (int x = 0; x < patch.width; ++x) dst[x] += src[x];
  }
}

ComplexGrid roll(const ComplexGrid& g, int dy, int dx) {
  ComplexGrid out(g.height, g.width, g.pitch);
  const int h = g.height, w = g.width;
  const int sy = ((dy % h) + h) % h;
  const int sx = ((dx % w) + w) % w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at((y + sy) % h, (x + sx) % w) = g.at(y, x);
    }
  }
  return out;
}

}  // namespace ptycho
