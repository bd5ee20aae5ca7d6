#include "ptycho/objective.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace ptycho {

namespace {

void check_pair_shapes(std::span<const RealGrid> predicted,
                       std::span<const RealGrid> measured, const char* what) {
  if (predicted.size() != measured.size()) {
    throw std::invalid_argument(fmt::format("{}: {} predicted vs {} measured patterns",
                                            what, predicted.size(), measured.size()));
  }
  if (predicted.empty()) throw std::invalid_argument(fmt::format("{}: empty input", what));
  for (size_t k = 0; k < predicted.size(); ++k) {
    if (predicted[k].height != measured[k].height ||
        predicted[k].width != measured[k].width) {
      throw std::invalid_argument(fmt::format("{}: pattern {} shape mismatch", what, k));
    }
  }
}

}  // namespace

LossValue amplitude_mse(std::span<const RealGrid> predicted,
                        std::span<const RealGrid> measured) {
  check_pair_shapes(predicted, measured, "amplitude_mse");
  double total = 0.0;
  for (size_t k = 0; k < predicted.size(); ++k) {
    for (size_t i = 0; i < predicted[k].data.size(); ++i) {
      const double ip = predicted[k].data[i];
      const double im = measured[k].data[i];
      if (im < 0.0) {
        throw std::invalid_argument(
            fmt::format("amplitude_mse: negative measured intensity {} in pattern {}", im, k));
      }
      if (ip < 0.0) {
        throw std::invalid_argument(
            fmt::format("amplitude_mse: negative predicted intensity {} in pattern {}", ip, k));
      }
      const double d = std::sqrt(ip) - std::sqrt(im);
      total += d * d;
    }
  }
  return {total / static_cast<double>(predicted.size()), LossKind::amplitude_mse};
}

LossValue poisson_nll(std::span<const RealGrid> predicted,
                      std::span<const RealGrid> measured, double floor) {
  check_pair_shapes(predicted, measured, "poisson_nll");
  if (floor <= 0.0) throw std::invalid_argument("poisson_nll: floor must be > 0");
  double total = 0.0;
  for (size_t k = 0; k < predicted.size(); ++k) {
    for (size_t i = 0; i < predicted[k].data.size(); ++i) {
      const double ip = predicted[k].data[i];
      if (ip < 0.0) {
        throw std::invalid_argument(
            fmt::format("poisson_nll: negative predicted intensity {} in pattern {}", ip, k));
      }
      total += ip - measured[k].data[i] * std::log(std::max(ip, floor));
    }
  }
  return {total, LossKind::poisson_nll};
}

namespace {

// Everything one scan position contributes, kept patch-local so positions can
// be computed concurrently and reduced in a fixed order afterwards.
struct PositionTerm {
  double loss = 0.0;                    // sum_q (A - a)^2, unnormalized
  ComplexGrid object_grad;              // h x w patch, scatter at the scan offset
  std::vector<ComplexGrid> probe_grad;  // per mode, sample plane
};

PositionTerm position_term(const ProbeStack& sample_probe, const ComplexGrid& object,
                           const DiffractionDataset& data, int k, double inv_k_scale,
                           double eps_amp) {
  const int h = sample_probe.height(), w = sample_probe.width();
  const int m_count = sample_probe.mode_count();
  const auto [row, col] = data.positions.offsets[k];
  const ComplexGrid patch = extract_patch(object, row, col, h, w);

  std::vector<ComplexGrid> spectra;
  spectra.reserve(m_count);
  for (int m = 0; m < m_count; ++m) {
    ComplexGrid wave(h, w, patch.pitch);
    const ComplexGrid& mode = sample_probe.modes[m];
    for (size_t i = 0; i < wave.data.size(); ++i) {
      wave.data[i] = mode.data[i] * patch.data[i];
    }
    spectra.push_back(fft2_unitary(wave));
  }

  // Modeled amplitude A(q), measured amplitude a(q), and the per-bin residual
  // factor (2/K)(1 - a / max(A, eps)) of the amplitude-MSE gradient.
  const RealGrid& measured = data.patterns[k];
  PositionTerm term;
  term.object_grad = ComplexGrid(h, w, patch.pitch);
  RealGrid factor(h, w);
  for (size_t i = 0; i < factor.data.size(); ++i) {
    double power = 0.0;
    for (int m = 0; m < m_count; ++m) power += std::norm(spectra[m].data[i]);
    const double amp = std::sqrt(power);
    const double meas = std::sqrt(measured.data[i]);
    const double d = amp - meas;
    term.loss += d * d;
    factor.data[i] = inv_k_scale * (1.0 - meas / std::max(amp, eps_amp));
  }

  term.probe_grad.reserve(m_count);
  for (int m = 0; m < m_count; ++m) {
    ComplexGrid chi = std::move(spectra[m]);
    for (size_t i = 0; i < chi.data.size(); ++i) chi.data[i] *= factor.data[i];
    const ComplexGrid g = ifft2_unitary(chi);

    const ComplexGrid& mode = sample_probe.modes[m];
    ComplexGrid probe_grad(h, w, mode.pitch);
    for (size_t i = 0; i < g.data.size(); ++i) {
      term.object_grad.data[i] += std::conj(mode.data[i]) * g.data[i];
      probe_grad.data[i] = std::conj(patch.data[i]) * g.data[i];
    }
    term.probe_grad.push_back(std::move(probe_grad));
  }
  return term;
}

}  // namespace

std::pair<LossValue, GradientPair> loss_and_gradients(
    const ProbeStack& probe, const ComplexGrid& object, const DiffractionDataset& data,
    std::span<const int> batch, const PhysicsConfig& physics,
    const LossGradOptions& options) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  if (options.eps_amp <= 0.0) {
    throw std::invalid_argument("loss_and_gradients: eps_amp must be > 0");
  }
  probe.check_consistent("loss_and_gradients");
  for (int k : batch) {
    if (k < 0 || static_cast<size_t>(k) >= data.positions.size()) {
      throw std::invalid_argument(
          fmt::format("loss_and_gradients: batch index {} out of range", k));
    }
  }

  const int m_count = probe.mode_count();
  const ProbeStack sample_probe = propagate_probe(probe, physics);
  const double inv_k_scale = 2.0 / static_cast<double>(batch.size());

  std::vector<PositionTerm> terms(batch.size());
  const int workers =
      std::max(1, std::min<int>(options.threads, static_cast<int>(batch.size())));
  if (workers == 1) {
    for (size_t j = 0; j < batch.size(); ++j) {
      terms[j] = position_term(sample_probe, object, data, batch[j], inv_k_scale,
                               options.eps_amp);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (size_t j = t; j < batch.size(); j += workers) {
            terms[j] = position_term(sample_probe, object, data, batch[j], inv_k_scale,
                                     options.eps_amp);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Fixed-order reduction: identical to the serial result bit for bit.
  GradientPair grads;
  grads.d_object = ComplexGrid(object.height, object.width, object.pitch);
  grads.d_probe.modes.assign(m_count, ComplexGrid(probe.height(), probe.width()));
  double loss_sum = 0.0;
  for (size_t j = 0; j < batch.size(); ++j) {
    const auto [row, col] = data.positions.offsets[batch[j]];
    loss_sum += terms[j].loss;
    accumulate_patch(grads.d_object, row, col, terms[j].object_grad);
    for (int m = 0; m < m_count; ++m) {
      ComplexGrid& acc = grads.d_probe.modes[m];
      const ComplexGrid& part = terms[j].probe_grad[m];
      for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += part.data[i];
    }
  }

  // Pull the probe gradient back from the sample plane to the reference plane.
  if (physics.fresnel_distance != 0.0) {
    const ComplexGrid kernel = fresnel_transfer(probe.height(), probe.width(), physics);
    for (int m = 0; m < m_count; ++m) {
      grads.d_probe.modes[m] = apply_transfer(grads.d_probe.modes[m], kernel, true);
    }
  }
  for (int m = 0; m < m_count; ++m) {
    grads.d_probe.modes[m].pitch = probe.modes[m].pitch;
    check_finite(grads.d_probe.modes[m], "loss_and_gradients: probe gradient");
  }
  check_finite(grads.d_object, "loss_and_gradients: object gradient");

  const double loss = loss_sum / static_cast<double>(batch.size());
  if (!std::isfinite(loss)) {
    throw std::runtime_error("loss_and_gradients: non-finite loss");
  }
  return {LossValue{loss, LossKind::amplitude_mse}, std::move(grads)};
}

}  // namespace ptycho
