#include "ptycho/forward.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ptycho {

void PhysicsConfig::validate() const {
  if (wavelength <= 0.0) throw std::invalid_argument("physics: wavelength must be > 0");
  if (pixel_size <= 0.0) throw std::invalid_argument("physics: pixel_size must be > 0");
  if (mode_count < 1) throw std::invalid_argument("physics: mode_count must be >= 1");
  if (fresnel_distance < 0.0) {
    throw std::invalid_argument("physics: fresnel_distance must be >= 0");
  }
}

ComplexGrid fresnel_transfer(int h, int w, const PhysicsConfig& physics) {
  physics.validate();
  ComplexGrid kernel(h, w);
  const double coeff =
      std::numbers::pi * physics.wavelength * physics.fresnel_distance;
  const int h2 = h / 2, w2 = w / 2;
  for (int y = 0; y < h; ++y) {
    const double qy = static_cast<double>(y - h2) / (h * physics.pixel_size);
    for (int x = 0; x < w; ++x) {
      const double qx = static_cast<double>(x - w2) / (w * physics.pixel_size);
      kernel.at(y, x) = std::polar(1.0, -coeff * (qx * qx + qy * qy));
    }
  }
  return kernel;
}

ComplexGrid apply_transfer(const ComplexGrid& wave, const ComplexGrid& kernel,
                           bool adjoint) {
  if (!wave.same_shape(kernel)) {
    throw std::invalid_argument(fmt::format(
        "apply_transfer: wave {}x{} does not match kernel {}x{}", wave.height,
        wave.width, kernel.height, kernel.width));
  }
  ComplexGrid spectrum = fft2_unitary(wave);
  if (adjoint) {
    for (size_t i = 0; i < spectrum.data.size(); ++i) {
      spectrum.data[i] *= std::conj(kernel.data[i]);
    }
  } else {
    for (size_t i = 0; i < spectrum.data.size(); ++i) {
      spectrum.data[i] *= kernel.data[i];
    }
  }
  return ifft2_unitary(spectrum);
}

ProbeStack propagate_probe(const ProbeStack& probe, const PhysicsConfig& physics,
                           bool adjoint) {
  probe.check_consistent("propagate_probe");
  if (physics.fresnel_distance == 0.0) return probe;
  const ComplexGrid kernel = fresnel_transfer(probe.height(), probe.width(), physics);
  ProbeStack out;
  out.modes.reserve(probe.modes.size());
  for (const ComplexGrid& mode : probe.modes) {
    out.modes.push_back(apply_transfer(mode, kernel, adjoint));
  }
  return out;
}

ExitWaveBatch exit_waves(const ProbeStack& sample_probe, const ComplexGrid& object,
                         const ScanPositions& positions, std::span<const int> batch) {
  sample_probe.check_consistent("exit_waves");
  const int h = sample_probe.height(), w = sample_probe.width();
  const int m_count = sample_probe.mode_count();

  ExitWaveBatch out;
  out.batch_size = static_cast<int>(batch.size());
  out.mode_count = m_count;
  out.waves.reserve(batch.size() * m_count);
  for (int k : batch) {
    if (k < 0 || static_cast<size_t>(k) >= positions.size()) {
      throw std::invalid_argument(fmt::format("exit_waves: position index {} out of range", k));
    }
    const auto [row, col] = positions.offsets[k];
    const ComplexGrid patch = extract_patch(object, row, col, h, w);
    for (int m = 0; m < m_count; ++m) {
      ComplexGrid wave(h, w, sample_probe.modes[m].pitch);
      const ComplexGrid& mode = sample_probe.modes[m];
      for (size_t i = 0; i < wave.data.size(); ++i) {
        wave.data[i] = mode.data[i] * patch.data[i];
      }
      out.waves.push_back(std::move(wave));
    }
  }
  return out;
}

std::vector<RealGrid> predict_intensity(const ExitWaveBatch& batch) {
  std::vector<RealGrid> intensities;
  intensities.reserve(batch.batch_size);
  for (int k = 0; k < batch.batch_size; ++k) {
    const ComplexGrid& first = batch.wave(k, 0);
    RealGrid intensity(first.height, first.width);
    for (int m = 0; m < batch.mode_count; ++m) {
      const ComplexGrid spectrum = fft2_unitary(batch.wave(k, m));
      for (size_t i = 0; i < spectrum.data.size(); ++i) {
        intensity.data[i] += std::norm(spectrum.data[i]);
      }
    }
    intensities.push_back(std::move(intensity));
  }
  return intensities;
}

}  // namespace ptycho
