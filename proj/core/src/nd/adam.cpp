#include "abmix/nd/adam.hpp"

#include <cmath>

#include "abmix/errors.hpp"

namespace abmix::nd {

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  if (cfg.lr <= 0.0) throw ConfigError("adam_step: lr must be > 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
    throw ConfigError("adam_step: betas must lie in [0, 1)");
  const auto t = static_cast<double>(store.step_count() + 1);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, e] : store) {
    if (e.m.empty()) {
      e.m = Tensor::zeros(e.w.shape());
      e.v = Tensor::zeros(e.w.shape());
    }
    for (std::size_t i = 0; i < e.w.size(); ++i) {
      const double g = e.g[i];
      e.m[i] = cfg.beta1 * e.m[i] + (1.0 - cfg.beta1) * g;
      e.v[i] = cfg.beta2 * e.v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = e.m[i] / bc1;
      const double vhat = e.v[i] / bc2;
      e.w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      e.g[i] = 0.0;
    }
  }
  store.set_step_count(store.step_count() + 1);
}

}  // namespace abmix::nd
