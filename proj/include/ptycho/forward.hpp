#pragma once

#include <span>
#include <vector>

#include "ptycho/fields.hpp"

namespace ptycho {

// Physical model parameters shared by simulation and reconstruction.
struct PhysicsConfig {
  double wavelength = 1e-9;         // meters
  double fresnel_distance = 25e-6;  // meters; 0 disables propagation
  double pixel_size = 1e-8;         // meters
  int mode_count = 3;

  void validate() const;
};

// Unit-modulus Fourier-domain Fresnel kernel on the centered frequency grid:
// H(q) = exp(-i pi lambda z |q|^2), q_x = f_x / (W * pixel_size) with
// integer f_x in [-W/2, W/2), and likewise for q_y.
ComplexGrid fresnel_transfer(int h, int w, const PhysicsConfig& physics);

// F^-1 { H . F{wave} }; adjoint=true multiplies by conj(H) instead, which
// undoes the propagation exactly.
ComplexGrid apply_transfer(const ComplexGrid& wave, const ComplexGrid& kernel,
                           bool adjoint = false);

// Propagates every mode through the Fresnel kernel for `physics`.
ProbeStack propagate_probe(const ProbeStack& probe, const PhysicsConfig& physics,
                           bool adjoint = false);

// Real-space exit waves for a minibatch of scan positions, k-major then mode.
struct ExitWaveBatch {
  int batch_size = 0;
  int mode_count = 0;
  std::vector<ComplexGrid> waves;  // waves[k * mode_count + m]

  const ComplexGrid& wave(int k, int m) const {
    return waves[static_cast<size_t>(k) * mode_count + m];
  }
};

// wave[k][m](r) = P_m(r) * O(r - R_k) for each position index in `batch`.
ExitWaveBatch exit_waves(const ProbeStack& sample_probe, const ComplexGrid& object,
                         const ScanPositions& positions, std::span<const int> batch);

// Incoherent multi-mode intensity: I_k(q) = sum_m |F{wave_km}(q)|^2.
std::vector<RealGrid> predict_intensity(const ExitWaveBatch& batch);

}  // namespace ptycho
