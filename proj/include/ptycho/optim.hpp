#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ptycho/fields.hpp"

namespace ptycho {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update over a flat real view of the parameters.
// `step_count` is the 1-based index of this step.
template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m1,
                 std::span<T> m2, long step_count, const AdamParams& hp, T lr) {
  if (params.size() != grads.size() || params.size() != m1.size() ||
      params.size() != m2.size()) {
    throw std::invalid_argument("adam_update: parameter/gradient/state size mismatch");
  }
  if (!(lr > T(0))) throw std::invalid_argument("adam_update: lr must be > 0");
  const T b1 = static_cast<T>(hp.beta1);
  const T b2 = static_cast<T>(hp.beta2);
  const T eps = static_cast<T>(hp.eps);
  const T c1 = T(1) - std::pow(b1, static_cast<T>(step_count));
  const T c2 = T(1) - std::pow(b2, static_cast<T>(step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    m1[i] = b1 * m1[i] + (T(1) - b1) * g;
    m2[i] = b2 * m2[i] + (T(1) - b2) * g * g;
    const T mhat = m1[i] / c1;
    const T vhat = m2[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

// Adam moment accumulators over a flat real parameter vector. Complex
// parameters are optimized as independent real/imaginary channels, so the
// state for a complex set has twice its element count.
template <typename T>
struct AdamStateT {
  std::vector<T> m1, m2;
  long step_count = 0;
  AdamParams hp;

  AdamStateT() = default;
  explicit AdamStateT(size_t real_size, AdamParams params = {})
      : m1(real_size, T(0)), m2(real_size, T(0)), hp(params) {}

  void reset() {
    std::fill(m1.begin(), m1.end(), T(0));
    std::fill(m2.begin(), m2.end(), T(0));
    step_count = 0;
  }

  void step(std::span<T> params, std::span<const T> grads, T lr) {
    step_count += 1;
    adam_update<T>(params, grads, m1, m2, step_count, hp, lr);
  }
};

using AdamState = AdamStateT<double>;

// Complex conveniences: std::complex<double> arrays are contiguous (re, im)
// pairs, so they update through the flat kernel directly.
void adam_step(ComplexGrid& params, const ComplexGrid& grads, AdamState& state, double lr);
void adam_step(ProbeStack& params, const ProbeStack& grads, AdamState& state, double lr);

AdamState make_adam_state(const ComplexGrid& params, AdamParams hp = {});
AdamState make_adam_state(const ProbeStack& params, AdamParams hp = {});

// Step-decay schedule: lr(i) = base_lr * decay^floor(i / step_size).
struct LrSchedule {
  double base_lr = 0.005;
  int step_size = 50;
  double decay = 0.2;

  void validate() const;
};

double lr_at(const LrSchedule& schedule, int iteration);

// Seeded random permutation of 0..total-1 split into ceil(total/batch_size)
// contiguous chunks.
std::vector<std::vector<int>> minibatch_plan(int total, int batch_size, uint64_t seed);

}  // namespace ptycho
