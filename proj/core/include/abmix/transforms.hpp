#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abmix/rng.hpp"

namespace abmix::transforms {

/// K probabilities, each in [0,1], summing to 1.
using SimplexVec = std::vector<double>;
/// K strictly increasing reals.
using OrderedVec = std::vector<double>;

bool is_simplex(std::span<const double> p, double tol = 1e-12);
bool is_strictly_increasing(std::span<const double> v);

/// Pull rounded external data off the simplex boundary before unconstraining.
SimplexVec clamp_to_interior(std::span<const double> p, double eps = 1e-12);

/// Stick-breaking map to R^(K-1): z_k = p_k / (1 - sum_{j<k} p_j),
/// theta_k = logit(z_k) - log(1/(K-k)). The origin maps to the uniform simplex.
std::vector<double> simplex_unconstrain(std::span<const double> p);

/// Inverse stick-breaking; the last element closes the simplex exactly.
SimplexVec simplex_constrain(std::span<const double> theta);

/// theta_1 = mu_1, theta_k = log(mu_k - mu_{k-1}) for k >= 2.
std::vector<double> ordered_unconstrain(std::span<const double> m);

/// mu_1 = theta_1, mu_k = mu_{k-1} + exp(theta_k); increasing by construction.
OrderedVec ordered_constrain(std::span<const double> theta);

struct RejectionStats {
  std::uint64_t attempts = 0;
  std::uint64_t accepts = 0;
  bool low_rate_warned = false;
};

/// Component-wise Normal(loc, scale) truncated to the strictly increasing
/// region by rejection. Emits a one-time warning through `stats` when a window
/// of draws falls below a 1e-4 acceptance rate (priors too overlapping).
OrderedVec sample_ordered_normal(std::span<const double> loc, std::span<const double> scale,
                                 Rng& rng, RejectionStats* stats = nullptr);

}  // namespace abmix::transforms
