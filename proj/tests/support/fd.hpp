#pragma once

// Central finite-difference oracles for gradient checks. Kept independent of
// the backward implementation: losses are re-evaluated on fresh tapes.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "abmix/nd/param_store.hpp"
#include "abmix/nd/tape.hpp"

namespace testsupport {

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-4});
  return std::abs(a - b) / denom;
}

/// Max relative error between tape gradients and central differences (step h)
/// for a scalar loss built from the given input tensors.
inline double fd_max_rel_err(
    std::vector<abmix::nd::Tensor> inputs,
    const std::function<abmix::nd::Var(abmix::nd::Tape&, const std::vector<abmix::nd::Var>&)>&
        build,
    double h = 1e-5) {
  using namespace abmix::nd;
  auto eval = [&](const std::vector<Tensor>& at) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(at.size());
    for (const auto& x : at) vars.push_back(t.input(x));
    return build(t, vars).value()[0];
  };

  Tape t;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(t.input(x));
  Var loss = build(t, vars);
  t.backward(loss);
  std::vector<Tensor> grads;
  for (const auto& v : vars) {
    const Tensor* g = t.grad(v.id);
    grads.push_back(g ? *g : Tensor::zeros(v.value().shape()));
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double orig = inputs[i][j];
      inputs[i][j] = orig + h;
      const double lp = eval(inputs);
      inputs[i][j] = orig - h;
      const double lm = eval(inputs);
      inputs[i][j] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      worst = std::max(worst, rel_err(fd, grads[i][j]));
    }
  }
  return worst;
}

/// Same check but for weights living in a ParamStore; the loss builder reads
/// the store through tape.param(...) internally.
inline double fd_max_rel_err_store(
    abmix::nd::ParamStore& store, const std::vector<std::string>& names,
    const std::function<abmix::nd::Var(abmix::nd::Tape&)>& build, double h = 1e-5) {
  using namespace abmix::nd;
  auto eval = [&] {
    Tape t;
    return build(t).value()[0];
  };

  store.zero_grad();
  Tape t;
  Var loss = build(t);
  t.backward(loss);

  double worst = 0.0;
  for (const auto& name : names) {
    auto& e = store.at(name);
    for (std::size_t j = 0; j < e.w.size(); ++j) {
      const double orig = e.w[j];
      e.w[j] = orig + h;
      const double lp = eval();
      e.w[j] = orig - h;
      const double lm = eval();
      e.w[j] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      worst = std::max(worst, rel_err(fd, e.g[j]));
    }
  }
  return worst;
}

}  // namespace testsupport
