#pragma once

#include <functional>
#include <vector>

#include "abmix/nd/param_store.hpp"
#include "abmix/nd/tensor.hpp"

namespace abmix::nd {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Define-by-run graph of recorded primitive ops. One tape per training step;
/// freed wholesale when it goes out of scope. Reverse sweep visits nodes in
/// inverse recording order (the recording order is a topological order by
/// construction).
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self_id)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Data leaf (observations, constants). Gradients are tracked so tests can
  /// differentiate with respect to inputs too.
  Var input(Tensor v);

  /// Weight leaf bound to a ParamStore entry; backward() adds its adjoint to
  /// the entry's gradient slot. The entry's value is referenced, not copied.
  Var param(ParamStore::Entry& e);

  /// Record a custom op. `fn` may be empty for non-differentiable outputs.
  Var push(Tensor value, std::vector<int> inputs, BackwardFn fn);

  const Tensor& value(int id) const;
  std::size_t num_nodes() const { return nodes_.size(); }

  /// Adjoint of `id` from the last backward() run; nullptr if unreachable.
  const Tensor* grad(int id) const;

  /// Adjoint buffer for accumulation (zeros of the node's value shape on first
  /// touch). Only meaningful inside backward callbacks.
  Tensor& grad_buffer(int id);

  void accumulate(int id, const Tensor& g);

  /// Reverse-mode sweep from a scalar loss. Resets all adjoints first, seeds
  /// the loss with 1, and flushes adjoints of param leaves into their
  /// ParamStore gradient slots. Weights not reachable from the loss are left
  /// untouched (their gradient contribution is zero).
  void backward(const Var& loss);

 private:
  struct Node {
    Tensor value;  // empty when param != nullptr (value lives in the store)
    ParamStore::Entry* param = nullptr;
    std::vector<int> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// ---- primitive ops -------------------------------------------------------

/// y = x * w + b (b broadcast over rows).
Var affine(const Var& x, const Var& w, const Var& b);
Var matmul(const Var& a, const Var& b);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_const(const Var& a, double c);

Var relu(const Var& a);
Var tanh_(const Var& a);
Var sigmoid(const Var& a);
Var exp_(const Var& a);

/// Row-normalized softmax over the last dimension, max-subtracted.
Var softmax_lastdim(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);
/// M x N -> {M}: sum over the last dimension.
Var rowsum(const Var& a);

/// Mean categorical cross-entropy of 0-based `labels` given logits (M x K).
/// Fused log-sum-exp formulation; gradient is (softmax - onehot)/M.
Var cross_entropy_with_logits(const Var& logits, std::vector<int> labels);

/// Weighted mean over contiguous equal-length segments: x is (S*P) x H, out is
/// S x H with out[s] = sum_p w[sP+p] x[sP+p] / sum_p w[sP+p]. Contributions are
/// summed in ascending value order so the result is invariant to permutations
/// of the rows inside a segment (bitwise). Weights are non-differentiable.
Var segment_mean(const Var& x, std::size_t segments, Tensor weights);

/// S x H -> (S*R) x H, each row duplicated R times contiguously.
Var repeat_rows(const Var& x, std::size_t times);

Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);
Var gather_cols(const Var& a, std::vector<std::size_t> idx);
Var gather_rows(const Var& a, std::vector<std::size_t> idx);
Var slice_rows(const Var& a, std::size_t r0, std::size_t r1);
Var reshape(const Var& a, std::vector<std::size_t> shape);

}  // namespace abmix::nd
