#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace ptycho {

using cdouble = std::complex<double>;

// 2-D complex field, row-major. `pitch` is the physical pixel size in meters;
// 0 means unitless.
struct ComplexGrid {
  int height = 0;
  int width = 0;
  double pitch = 0.0;
  std::vector<cdouble> data;

  ComplexGrid() = default;
  ComplexGrid(int h, int w, double pitch_m = 0.0)
      : height(h), width(w), pitch(pitch_m),
        data(static_cast<size_t>(h) * static_cast<size_t>(w)) {}

  cdouble& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  const cdouble& at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const ComplexGrid& o) const {
    return height == o.height && width == o.width;
  }
};

// 2-D real field (diffraction intensities, masks, image maps).
struct RealGrid {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int h, int w)
      : height(h), width(w), data(static_cast<size_t>(h) * static_cast<size_t>(w)) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  const double& at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }
};

double norm_sq(const ComplexGrid& g);
// Sum of conj(a) * b.
cdouble inner(const ComplexGrid& a, const ComplexGrid& b);
// Throws std::invalid_argument naming the first non-finite element.
void check_finite(const ComplexGrid& g, const char* what);

// Ordered stack of mutually incoherent probe modes, all the same shape.
struct ProbeStack {
  std::vector<ComplexGrid> modes;

  int mode_count() const { return static_cast<int>(modes.size()); }
  int height() const { return modes.empty() ? 0 : modes.front().height; }
  int width() const { return modes.empty() ? 0 : modes.front().width; }
  double total_power() const;
  void check_consistent(const char* what) const;
};

// Integer pixel offsets (row, col) of each probe footprint in the object frame.
struct ScanPositions {
  std::vector<std::array<int, 2>> offsets;

  size_t size() const { return offsets.size(); }
  void check_in_bounds(int obj_h, int obj_w, int probe_h, int probe_w) const;
};

// Measured intensity patterns with their scan geometry and physics metadata.
struct DiffractionDataset {
  std::vector<RealGrid> patterns;
  ScanPositions positions;
  double wavelength = 0.0;          // meters
  double detector_distance = 0.0;   // meters
  double pixel_size = 0.0;          // meters

  int count() const { return static_cast<int>(patterns.size()); }
  int pattern_height() const { return patterns.empty() ? 0 : patterns.front().height; }
  int pattern_width() const { return patterns.empty() ? 0 : patterns.front().width; }
  void validate() const;
};

// Unitary DFT with the zero-frequency bin at (floor(H/2), floor(W/2)).
ComplexGrid fft2_unitary(const ComplexGrid& g);
// Exact inverse (and adjoint) of fft2_unitary.
ComplexGrid ifft2_unitary(const ComplexGrid& g);

// Copy of the h x w window at (row, col); rejects out-of-bounds footprints.
ComplexGrid extract_patch(const ComplexGrid& obj, int row, int col, int h, int w);
// Adds `patch` into `target` at (row, col); overlapping calls sum.
void accumulate_patch(ComplexGrid& target, int row, int col, const ComplexGrid& patch);

// Circular shift by (dy, dx); positive shifts move content down/right.
ComplexGrid roll(const ComplexGrid& g, int dy, int dx);

}  // namespace ptycho
