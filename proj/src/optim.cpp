#include "ptycho/optim.hpp"

#include <fmt/format.h>

#include <numeric>

#include "ptycho/rng.hpp"

namespace ptycho {

namespace {

std::span<double> real_view(ComplexGrid& g) {
  return {reinterpret_cast<double*>(g.data.data()), g.data.size() * 2};
}

std::span<const double> real_view(const ComplexGrid& g) {
  return {reinterpret_cast<const double*>(g.data.data()), g.data.size() * 2};
}

}  // namespace

void adam_step(ComplexGrid& params, const ComplexGrid& grads, AdamState& state, double lr) {
  if (!params.same_shape(grads)) {
    throw std::invalid_argument("adam_step: parameter/gradient shape mismatch");
  }
  state.step(real_view(params), real_view(grads), lr);
}

void adam_step(ProbeStack& params, const ProbeStack& grads, AdamState& state, double lr) {
  if (params.mode_count() != grads.mode_count()) {
    throw std::invalid_argument("adam_step: probe mode count mismatch");
  }
  state.step_count += 1;
  size_t offset = 0;
  for (int m = 0; m < params.mode_count(); ++m) {
    if (!params.modes[m].same_shape(grads.modes[m])) {
      throw std::invalid_argument("adam_step: probe mode shape mismatch");
    }
    const size_t n = params.modes[m].data.size() * 2;
    if (offset + n > state.m1.size()) {
      throw std::invalid_argument("adam_step: probe state too small");
    }
    adam_update<double>(real_view(params.modes[m]), real_view(grads.modes[m]),
                        std::span<double>(state.m1).subspan(offset, n),
                        std::span<double>(state.m2).subspan(offset, n),
                        state.step_count, state.hp, lr);
    offset += n;
  }
  if (offset != state.m1.size()) {
    throw std::invalid_argument("adam_step: probe state size mismatch");
  }
}

AdamState make_adam_state(const ComplexGrid& params, AdamParams hp) {
  return AdamState(params.data.size() * 2, hp);
}

AdamState make_adam_state(const ProbeStack& params, AdamParams hp) {
  size_t n = 0;
  for (const ComplexGrid& m : params.modes) n += m.data.size() * 2;
  return AdamState(n, hp);
}

void LrSchedule::validate() const {
  if (base_lr <= 0.0) throw std::invalid_argument("lr schedule: base_lr must be > 0");
  if (step_size < 1) throw std::invalid_argument("lr schedule: step_size must be >= 1");
  if (decay <= 0.0 || decay > 1.0) {
    throw std::invalid_argument("lr schedule: decay must be in (0, 1]");
  }
}

double lr_at(const LrSchedule& schedule, int iteration) {
  schedule.validate();
  if (iteration < 0) throw std::invalid_argument("lr_at: iteration must be >= 0");
  return schedule.base_lr * std::pow(schedule.decay, iteration / schedule.step_size);
}

std::vector<std::vector<int>> minibatch_plan(int total, int batch_size, uint64_t seed) {
  if (total < 1) throw std::invalid_argument("minibatch_plan: need at least one index");
  if (batch_size < 1) throw std::invalid_argument("minibatch_plan: batch_size must be >= 1");
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  rng::Engine engine(seed);
  engine.shuffle(order);
  std::vector<std::vector<int>> plan;
  for (int start = 0; start < total; start += batch_size) {
    const int end = std::min(total, start + batch_size);
    plan.emplace_back(order.begin() + start, order.begin() + end);
  }
  return plan;
}

}  // namespace ptycho
