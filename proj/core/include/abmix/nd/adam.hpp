#pragma once

#include "abmix/nd/param_store.hpp"

namespace abmix::nd {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update over every entry in the store: standard bias-corrected
/// recurrences, moment buffers kept on the entries. Gradients are zeroed and
/// step_count incremented.
void adam_step(ParamStore& store, const AdamConfig& cfg);

inline void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps) {
  adam_step(store, AdamConfig{lr, beta1, beta2, eps});
}

}  // namespace abmix::nd
