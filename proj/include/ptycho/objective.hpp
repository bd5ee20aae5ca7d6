#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ptycho/fields.hpp"
#include "ptycho/forward.hpp"

namespace ptycho {

enum class LossKind { amplitude_mse, poisson_nll };

struct LossValue {
  double value = 0.0;
  LossKind kind = LossKind::amplitude_mse;
};

// Conjugate-Wirtinger gradients, shaped like their targets.
struct GradientPair {
  ComplexGrid d_object;
  ProbeStack d_probe;
};

// (1/K) sum_k sum_q (sqrt(I_k) - sqrt(I_k^exp))^2.
LossValue amplitude_mse(std::span<const RealGrid> predicted,
                        std::span<const RealGrid> measured);

// sum_k sum_q (I_k - I_k^exp * ln(max(I_k, floor))). Evaluation metric only.
LossValue poisson_nll(std::span<const RealGrid> predicted,
                      std::span<const RealGrid> measured, double floor = 1e-12);

struct LossGradOptions {
  double eps_amp = 1e-8;  // guards the amplitude ratio at zero modeled amplitude
  int threads = 1;        // per-position fan-out; reduction order is fixed
};

// Minibatch amplitude-MSE loss and its analytic gradients with respect to the
// object and the (reference-plane) probe. The probe is propagated through the
// Fresnel kernel before forming exit waves and the probe gradient is pulled
// back through the kernel adjoint. Gradient accumulation always runs in batch
// index order, so results are identical for any thread count.
std::pair<LossValue, GradientPair> loss_and_gradients(
    const ProbeStack& probe, const ComplexGrid& object, const DiffractionDataset& data,
    std::span<const int> batch, const PhysicsConfig& physics,
    const LossGradOptions& options = {});

}  // namespace ptycho
