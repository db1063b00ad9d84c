#pragma once

#include <string>

#include "abmix/nd/param_store.hpp"
#include "abmix/nd/tape.hpp"

namespace abmix::nd {

/// Single-gate gated recurrent cell (minimal gated unit). Cell equations:
///
///   f   = sigmoid([x, h] Wf + bf)          forget/update gate
///   hc  = tanh([x, f .* h] Wh + bh)        candidate state
///   h'  = (1 - f) .* h + f .* hc
///
/// With zero weights and zero state, f = 1/2, hc = 0, so h' stays at zero.
/// Differentiable through time when applied sequentially on one tape.
struct GruCell {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::string prefix;

  GruCell() = default;
  GruCell(std::size_t in, std::size_t hidden, std::string name_prefix)
      : input_dim(in), hidden_dim(hidden), prefix(std::move(name_prefix)) {}

  void init(ParamStore& store, Rng& rng) const {
    store.create_dense(prefix + ".wf", input_dim + hidden_dim, hidden_dim, rng);
    store.create_zeros(prefix + ".bf", {hidden_dim});
    store.create_dense(prefix + ".wh", input_dim + hidden_dim, hidden_dim, rng);
    store.create_zeros(prefix + ".bh", {hidden_dim});
  }

  /// One step: state [B x H], input [B x I] -> next state [B x H].
  Var step(Tape& t, ParamStore& store, const Var& state, const Var& input) const {
    if (state.rows() != input.rows())
      throw DimensionError("GruCell::step: batch extents differ");
    if (state.cols() != hidden_dim || input.cols() != input_dim)
      throw DimensionError("GruCell::step: width mismatch");
    Var wf = t.param(store.at(prefix + ".wf"));
    Var bf = t.param(store.at(prefix + ".bf"));
    Var wh = t.param(store.at(prefix + ".wh"));
    Var bh = t.param(store.at(prefix + ".bh"));
    Var f = sigmoid(affine(concat_cols(input, state), wf, bf));
    Var hc = tanh_(affine(concat_cols(input, mul(f, state)), wh, bh));
    Var keep = add_const(neg(f), 1.0);
    return add(mul(keep, state), mul(f, hc));
  }
};

/// recurrent_step as a free function over a named cell slice in the store.
inline Var recurrent_step(Tape& t, ParamStore& store, const GruCell& cell, const Var& state,
                          const Var& input) {
  return cell.step(t, store, state, input);
}

}  // namespace abmix::nd
