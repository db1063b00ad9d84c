#include "abmix/transforms.hpp"

#include <cmath>
#include <cstdio>

#include "abmix/errors.hpp"
#include "abmix/math.hpp"

namespace abmix::transforms {

bool is_simplex(std::span<const double> p, double tol) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

bool is_strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

SimplexVec clamp_to_interior(std::span<const double> p, double eps) {
  SimplexVec out(p.begin(), p.end());
  double s = 0.0;
  for (double& v : out) {
    v = std::min(1.0 - eps, std::max(eps, v));
    s += v;
  }
  for (double& v : out) v /= s;
  return out;
}

std::vector<double> simplex_unconstrain(std::span<const double> p) {
  const std::size_t K = p.size();
  if (K < 2) throw ContractError("simplex_unconstrain: need K >= 2");
  for (double v : p)
    if (v <= 0.0 || v >= 1.0)
      throw BoundaryError("simplex_unconstrain: entries must lie strictly inside (0,1)");
  std::vector<double> theta(K - 1);
  double remaining = 1.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double z = p[k] / remaining;
    if (z <= 0.0 || z >= 1.0)
      throw BoundaryError("simplex_unconstrain: degenerate stick proportion");
    theta[k] = math::logit(z) + std::log(static_cast<double>(K - k - 1));
    remaining -= p[k];
  }
  return theta;
}

SimplexVec simplex_constrain(std::span<const double> theta) {
  const std::size_t K = theta.size() + 1;
  SimplexVec p(K);
  double remaining = 1.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double z = math::inv_logit(theta[k] - std::log(static_cast<double>(K - k - 1)));
    p[k] = remaining * z;
    remaining -= p[k];
  }
  p[K - 1] = remaining;  // closes the sum to exactly 1 - accumulated mass
  return p;
}

std::vector<double> ordered_unconstrain(std::span<const double> m) {
  if (!is_strictly_increasing(m))
    throw BoundaryError("ordered_unconstrain: values must be strictly increasing");
  std::vector<double> theta(m.size());
  if (m.empty()) return theta;
  theta[0] = m[0];
  for (std::size_t k = 1; k < m.size(); ++k) theta[k] = std::log(m[k] - m[k - 1]);
  return theta;
}

OrderedVec ordered_constrain(std::span<const double> theta) {
  OrderedVec m(theta.size());
  if (theta.empty()) return m;
  m[0] = theta[0];
  for (std::size_t k = 1; k < theta.size(); ++k) m[k] = m[k - 1] + std::exp(theta[k]);
  return m;
}

OrderedVec sample_ordered_normal(std::span<const double> loc, std::span<const double> scale,
                                 Rng& rng, RejectionStats* stats) {
  if (loc.size() != scale.size()) throw DimensionError("sample_ordered_normal: size mismatch");
  for (double s : scale)
    if (!(s > 0.0)) throw DomainError("sample_ordered_normal: scale must be > 0");
  constexpr std::uint64_t kWindow = 10000;  // 0 accepts in a window => rate < 1e-4
  std::uint64_t misses = 0;
  OrderedVec draw(loc.size());
  for (;;) {
    if (stats) ++stats->attempts;
    for (std::size_t k = 0; k < loc.size(); ++k) draw[k] = rng.normal(loc[k], scale[k]);
    if (is_strictly_increasing(draw)) {
      if (stats) ++stats->accepts;
      return draw;
    }
    if (++misses % kWindow == 0 && stats && !stats->low_rate_warned) {
      stats->low_rate_warned = true;
      std::fprintf(stderr,
                   "[abmix] warning: ordered-normal rejection acceptance below 1e-4; "
                   "prior components overlap heavily\n");
    }
  }
}

}  // namespace abmix::transforms
