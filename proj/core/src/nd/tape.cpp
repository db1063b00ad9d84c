#include "abmix/nd/tape.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <utility>

#include "abmix/errors.hpp"
#include "abmix/math.hpp"

namespace abmix::nd {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

namespace {

ECMap map2(const Tensor& t, std::size_t r, std::size_t c) {
  return ECMap(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
EMap map2(Tensor& t, std::size_t r, std::size_t c) {
  return EMap(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void require(bool ok, const char* msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }
const std::vector<std::size_t>& Var::shape() const { return value().shape(); }

Var Tape::input(Tensor v) { return push(std::move(v), {}, nullptr); }

Var Tape::param(ParamStore::Entry& e) {
  Node n;
  n.param = &e;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Tensor value, std::vector<int> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.param ? n.param->w : n.value;
}

const Tensor* Tape::grad(int id) const {
  if (static_cast<std::size_t>(id) >= grads_.size()) return nullptr;
  const Tensor& g = grads_[static_cast<std::size_t>(id)];
  return g.empty() ? nullptr : &g;
}

Tensor& Tape::grad_buffer(int id) {
  if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
  Tensor& g = grads_[static_cast<std::size_t>(id)];
  if (g.empty()) g = Tensor::zeros(value(id).shape());
  return g;
}

void Tape::accumulate(int id, const Tensor& g) {
  Tensor& buf = grad_buffer(id);
  if (!buf.same_shape(g)) throw DimensionError("Tape::accumulate: shape mismatch");
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

void Tape::backward(const Var& loss) {
  if (loss.tape != this) throw ContractError("backward: foreign Var");
  if (value(loss.id).size() != 1) throw ContractError("backward: loss must be scalar");
  grads_.clear();
  grads_.resize(nodes_.size());
  grad_buffer(loss.id)[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty()) continue;
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      if (!n.param->g.same_shape(g)) throw DimensionError("backward: param grad shape");
      for (std::size_t i = 0; i < g.size(); ++i) n.param->g[i] += g[i];
    }
  }
}

// ---- ops -------------------------------------------------------------------

Var affine(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  const std::size_t B = xv.rows(), I = xv.cols(), O = wv.cols();
  require(wv.rows() == I, "affine: inner extents differ");
  require(bv.size() == O, "affine: bias length != output width");
  Tensor out({B, O});
  map2(out, B, O).noalias() = map2(xv, B, I) * map2(wv, I, O);
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < O; ++c) out[r * O + c] += bv[c];
  const int xi = x.id, wi = w.id, bi = b.id;
  return x.tape->push(std::move(out), {xi, wi, bi}, [xi, wi, bi, B, I, O](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    const Tensor& xv = t.value(xi);
    const Tensor& wv = t.value(wi);
    map2(t.grad_buffer(xi), B, I).noalias() += map2(g, B, O) * map2(wv, I, O).transpose();
    map2(t.grad_buffer(wi), I, O).noalias() += map2(xv, B, I).transpose() * map2(g, B, O);
    Tensor& gb = t.grad_buffer(bi);
    for (std::size_t r = 0; r < B; ++r)
      for (std::size_t c = 0; c < O; ++c) gb[c] += g[r * O + c];
  });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t M = av.rows(), K = av.cols(), N = bv.cols();
  require(bv.rows() == K, "matmul: inner extents differ");
  Tensor out({M, N});
  map2(out, M, N).noalias() = map2(av, M, K) * map2(bv, K, N);
  const int ai = a.id, bi = b.id;
  return a.tape->push(std::move(out), {ai, bi}, [ai, bi, M, K, N](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    map2(t.grad_buffer(ai), M, K).noalias() += map2(g, M, N) * map2(t.value(bi), K, N).transpose();
    map2(t.grad_buffer(bi), K, N).noalias() += map2(t.value(ai), M, K).transpose() * map2(g, M, N);
  });
}

namespace {

Var binary_same_shape(const Var& a, const Var& b, const char* name,
                      double (*fwd)(double, double),
                      void (*bwd)(double av, double bv, double g, double& ga, double& gb)) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) throw DimensionError(std::string(name) + ": shape mismatch");
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  const int ai = a.id, bi = b.id;
  return a.tape->push(std::move(out), {ai, bi}, [ai, bi, bwd](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    const Tensor& av = t.value(ai);
    const Tensor& bv = t.value(bi);
    Tensor& ga = t.grad_buffer(ai);
    Tensor& gb = t.grad_buffer(bi);
    for (std::size_t i = 0; i < g.size(); ++i) bwd(av[i], bv[i], g[i], ga[i], gb[i]);
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return binary_same_shape(a, b, "add", [](double x, double y) { return x + y; },
                           [](double, double, double g, double& ga, double& gb) {
                             ga += g;
                             gb += g;
                           });
}

Var sub(const Var& a, const Var& b) {
  return binary_same_shape(a, b, "sub", [](double x, double y) { return x - y; },
                           [](double, double, double g, double& ga, double& gb) {
                             ga += g;
                             gb -= g;
                           });
}

Var mul(const Var& a, const Var& b) {
  return binary_same_shape(a, b, "mul", [](double x, double y) { return x * y; },
                           [](double x, double y, double g, double& ga, double& gb) {
                             ga += g * y;
                             gb += g * x;
                           });
}

namespace {

template <typename F, typename D>
Var unary(const Var& a, F fwd, D dval) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai, dval](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    const Tensor& av = t.value(ai);
    const Tensor& ov = t.value(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dval(av[i], ov[i]);
  });
}

}  // namespace

Var neg(const Var& a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(const Var& a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_const(const Var& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh_(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(a, [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                                 : std::exp(x) / (1.0 + std::exp(x)); },
               [](double, double y) { return y * (1.0 - y); });
}

Var exp_(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var softmax_lastdim(const Var& a) {
  const Tensor& av = a.value();
  require(av.ndim() >= 1 && av.shape().back() >= 1, "softmax: empty last dim");
  const std::size_t K = av.shape().back();
  const std::size_t M = av.size() / K;
  Tensor out(av.shape());
  for (std::size_t r = 0; r < M; ++r) {
    const double* xr = av.data() + r * K;
    double* yr = out.data() + r * K;
    double mx = xr[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, xr[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      yr[k] = std::exp(xr[k] - mx);
      s += yr[k];
    }
    for (std::size_t k = 0; k < K; ++k) yr[k] /= s;
  }
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai, M, K](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t r = 0; r < M; ++r) {
      const double* yr = y.data() + r * K;
      const double* gr = g.data() + r * K;
      double dot = 0.0;
      for (std::size_t k = 0; k < K; ++k) dot += yr[k] * gr[k];
      double* gar = ga.data() + r * K;
      for (std::size_t k = 0; k < K; ++k) gar[k] += yr[k] * (gr[k] - dot);
    }
  });
}

Var sum(const Var& a) {
  const Tensor& av = a.value();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i];
  const int ai = a.id;
  return a.tape->push(Tensor::scalar(s), {ai}, [ai](Tape& t, int self) {
    const double g = (*t.grad(self))[0];
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean(const Var& a) {
  const Tensor& av = a.value();
  require(av.size() > 0, "mean: empty tensor");
  const double inv = 1.0 / static_cast<double>(av.size());
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i];
  const int ai = a.id;
  return a.tape->push(Tensor::scalar(s * inv), {ai}, [ai, inv](Tape& t, int self) {
    const double g = (*t.grad(self))[0] * inv;
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var rowsum(const Var& a) {
  const Tensor& av = a.value();
  const std::size_t M = av.rows(), N = av.cols();
  Tensor out({M});
  for (std::size_t r = 0; r < M; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < N; ++c) s += av[r * N + c];
    out[r] = s;
  }
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai, M, N](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < N; ++c) ga[r * N + c] += g[r];
  });
}

Var cross_entropy_with_logits(const Var& logits, std::vector<int> labels) {
  const Tensor& lv = logits.value();
  const std::size_t M = lv.rows(), K = lv.cols();
  require(labels.size() == M, "cross_entropy: one label per row");
  for (int z : labels)
    if (z < 0 || static_cast<std::size_t>(z) >= K)
      throw ContractError("cross_entropy: label out of range");
  double loss = 0.0;
  for (std::size_t r = 0; r < M; ++r) {
    const double* xr = lv.data() + r * K;
    double mx = xr[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, xr[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(xr[k] - mx);
    loss += mx + std::log(s) - xr[static_cast<std::size_t>(labels[r])];
  }
  loss /= static_cast<double>(M);
  const int li = logits.id;
  return logits.tape->push(
      Tensor::scalar(loss), {li},
      [li, M, K, labels = std::move(labels)](Tape& t, int self) {
        const double g = (*t.grad(self))[0] / static_cast<double>(M);
        const Tensor& lv = t.value(li);
        Tensor& gl = t.grad_buffer(li);
        for (std::size_t r = 0; r < M; ++r) {
          const double* xr = lv.data() + r * K;
          double mx = xr[0];
          for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, xr[k]);
          double s = 0.0;
          for (std::size_t k = 0; k < K; ++k) s += std::exp(xr[k] - mx);
          double* gr = gl.data() + r * K;
          for (std::size_t k = 0; k < K; ++k) {
            const double p = std::exp(xr[k] - mx) / s;
            gr[k] += g * (p - (static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0));
          }
        }
      });
}

Var segment_mean(const Var& x, std::size_t segments, Tensor weights) {
  const Tensor& xv = x.value();
  const std::size_t R = xv.rows(), H = xv.cols();
  require(segments > 0 && R % segments == 0, "segment_mean: rows not divisible");
  require(weights.size() == R, "segment_mean: one weight per row");
  const std::size_t P = R / segments;
  Tensor out({segments, H});
  std::vector<double> wsum(segments, 0.0);
  std::vector<double> scratch(P);
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t p = 0; p < P; ++p) scratch[p] = weights[s * P + p];
    wsum[s] = math::ordered_sum(scratch);
    if (wsum[s] <= 0.0) continue;  // empty segment pools to zero
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t p = 0; p < P; ++p)
        scratch[p] = weights[s * P + p] * xv[(s * P + p) * H + h];
      out[s * H + h] = math::ordered_sum(scratch) / wsum[s];
    }
  }
  const int xi = x.id;
  return x.tape->push(std::move(out), {xi},
                      [xi, segments, P, H, w = std::move(weights), wsum = std::move(wsum)](
                          Tape& t, int self) {
                        const Tensor& g = *t.grad(self);
                        Tensor& gx = t.grad_buffer(xi);
                        for (std::size_t s = 0; s < segments; ++s) {
                          if (wsum[s] <= 0.0) continue;
                          for (std::size_t p = 0; p < P; ++p) {
                            const double f = w[s * P + p] / wsum[s];
                            if (f == 0.0) continue;
                            for (std::size_t h = 0; h < H; ++h)
                              gx[(s * P + p) * H + h] += f * g[s * H + h];
                          }
                        }
                      });
}

Var repeat_rows(const Var& x, std::size_t times) {
  const Tensor& xv = x.value();
  const std::size_t S = xv.rows(), H = xv.cols();
  Tensor out({S * times, H});
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t r = 0; r < times; ++r)
      std::copy_n(xv.data() + s * H, H, out.data() + (s * times + r) * H);
  const int xi = x.id;
  return x.tape->push(std::move(out), {xi}, [xi, S, H, times](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& gx = t.grad_buffer(xi);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t r = 0; r < times; ++r)
        for (std::size_t h = 0; h < H; ++h) gx[s * H + h] += g[(s * times + r) * H + h];
  });
}

Var concat_cols(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t M = av.rows();
  require(bv.rows() == M, "concat_cols: row mismatch");
  const std::size_t Ca = av.cols(), Cb = bv.cols();
  Tensor out({M, Ca + Cb});
  for (std::size_t r = 0; r < M; ++r) {
    std::copy_n(av.data() + r * Ca, Ca, out.data() + r * (Ca + Cb));
    std::copy_n(bv.data() + r * Cb, Cb, out.data() + r * (Ca + Cb) + Ca);
  }
  const int ai = a.id, bi = b.id;
  return a.tape->push(std::move(out), {ai, bi}, [ai, bi, M, Ca, Cb](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& ga = t.grad_buffer(ai);
    Tensor& gb = t.grad_buffer(bi);
    for (std::size_t r = 0; r < M; ++r) {
      for (std::size_t c = 0; c < Ca; ++c) ga[r * Ca + c] += g[r * (Ca + Cb) + c];
      for (std::size_t c = 0; c < Cb; ++c) gb[r * Cb + c] += g[r * (Ca + Cb) + Ca + c];
    }
  });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  const Tensor& av = a.value();
  const std::size_t M = av.rows(), C = av.cols();
  require(c0 <= c1 && c1 <= C, "slice_cols: bad range");
  const std::size_t W = c1 - c0;
  Tensor out({M, W});
  for (std::size_t r = 0; r < M; ++r)
    std::copy_n(av.data() + r * C + c0, W, out.data() + r * W);
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai, M, C, c0, W](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t r = 0; r < M; ++r)
      for (std::size_t c = 0; c < W; ++c) ga[r * C + c0 + c] += g[r * W + c];
  });
}

Var gather_cols(const Var& a, std::vector<std::size_t> idx) {
  const Tensor& av = a.value();
  const std::size_t M = av.rows(), C = av.cols(), W = idx.size();
  for (std::size_t j : idx) require(j < C, "gather_cols: index out of range");
  Tensor out({M, W});
  for (std::size_t r = 0; r < M; ++r)
    for (std::size_t j = 0; j < W; ++j) out[r * W + j] = av[r * C + idx[j]];
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai},
                      [ai, M, C, W, idx = std::move(idx)](Tape& t, int self) {
                        const Tensor& g = *t.grad(self);
                        Tensor& ga = t.grad_buffer(ai);
                        for (std::size_t r = 0; r < M; ++r)
                          for (std::size_t j = 0; j < W; ++j)
                            ga[r * C + idx[j]] += g[r * W + j];
                      });
}

Var gather_rows(const Var& a, std::vector<std::size_t> idx) {
  const Tensor& av = a.value();
  const std::size_t R = av.rows(), C = av.cols(), W = idx.size();
  for (std::size_t j : idx) require(j < R, "gather_rows: index out of range");
  Tensor out({W, C});
  for (std::size_t r = 0; r < W; ++r)
    std::copy_n(av.data() + idx[r] * C, C, out.data() + r * C);
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai},
                      [ai, C, W, idx = std::move(idx)](Tape& t, int self) {
                        const Tensor& g = *t.grad(self);
                        Tensor& ga = t.grad_buffer(ai);
                        for (std::size_t r = 0; r < W; ++r)
                          for (std::size_t c = 0; c < C; ++c)
                            ga[idx[r] * C + c] += g[r * C + c];
                      });
}

Var slice_rows(const Var& a, std::size_t r0, std::size_t r1) {
  const Tensor& av = a.value();
  const std::size_t R = av.rows(), C = av.cols();
  require(r0 <= r1 && r1 <= R, "slice_rows: bad range");
  const std::size_t W = r1 - r0;
  Tensor out({W, C});
  std::copy_n(av.data() + r0 * C, W * C, out.data());
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai, C, r0, W](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t r = 0; r < W; ++r)
      for (std::size_t c = 0; c < C; ++c) ga[(r0 + r) * C + c] += g[r * C + c];
  });
}

Var reshape(const Var& a, std::vector<std::size_t> shape) {
  const Tensor& av = a.value();
  Tensor out = av.reshaped(shape);
  const int ai = a.id;
  return a.tape->push(std::move(out), {ai}, [ai](Tape& t, int self) {
    const Tensor& g = *t.grad(self);
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

}  // namespace abmix::nd
