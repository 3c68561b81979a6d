#include "hcn/grad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hcn::grad {
namespace {

template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

template <typename T>
T dot(std::span<const T> x, std::span<const T> y) {
  T acc{};
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void require_shape(const Tensor<T>& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw DimensionError(std::string(what) + ": expected shape " + to_string(expected) + ", got " +
                         to_string(t.shape()));
  }
}

}  // namespace

template <typename T>
Var matmul(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  const bool row_vector = av.rank() == 1;
  if ((av.rank() != 1 && av.rank() != 2) || bv.rank() != 2) {
    throw DimensionError("matmul: unsupported ranks " + to_string(av.shape()) + " · " + to_string(bv.shape()));
  }
  const std::size_t m = row_vector ? 1 : av.dim(0);
  const std::size_t k = row_vector ? av.dim(0) : av.dim(1);
  const std::size_t n = bv.dim(1);
  if (k != bv.dim(0)) {
    throw DimensionError("matmul: inner dimensions disagree for " + to_string(av.shape()) + " · " +
                         to_string(bv.shape()));
  }
  Tensor<T> out(row_vector ? Shape{n} : Shape{m, n});
  auto ad = av.data();
  auto od = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    auto orow = od.subspan(i * n, n);
    for (std::size_t p = 0; p < k; ++p) {
      const T s = ad[i * k + p];
      if (s == T{0}) continue;
      axpy(s, bv.row(p), orow);
    }
  }
  return g.record("matmul", {a, b}, std::move(out),
                  [m, k, n](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dc) {
                    const Tensor<T>& av = gr.value(in[0]);
                    const Tensor<T>& bv = gr.value(in[1]);
                    auto dcd = dc.data();
                    if (gr.requires_grad(in[0])) {
                      auto da = gr.grad_mut(in[0]).data();
                      for (std::size_t i = 0; i < m; ++i) {
                        auto dcrow = dcd.subspan(i * n, n);
                        for (std::size_t p = 0; p < k; ++p) da[i * k + p] += dot(dcrow, bv.row(p));
                      }
                    }
                    if (gr.requires_grad(in[1])) {
                      Tensor<T>& db = gr.grad_mut(in[1]);
                      auto ad = av.data();
                      for (std::size_t i = 0; i < m; ++i) {
                        auto dcrow = dcd.subspan(i * n, n);
                        for (std::size_t p = 0; p < k; ++p) {
                          const T s = ad[i * k + p];
                          if (s == T{0}) continue;
                          axpy(s, dcrow, db.row(p));
                        }
                      }
                    }
                  });
}

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  const Var terms[] = {a, b};
  return add_n(g, std::span<const Var>(terms));
}

template <typename T>
Var add_n(Graph<T>& g, std::span<const Var> terms) {
  if (terms.empty()) throw UsageError("add_n: no terms");
  Tensor<T> out = g.value(terms[0]);
  for (std::size_t t = 1; t < terms.size(); ++t) {
    const Tensor<T>& v = g.value(terms[t]);
    if (!v.same_shape(out)) {
      throw DimensionError("add: shape mismatch " + to_string(out.shape()) + " vs " + to_string(v.shape()));
    }
    axpy(T{1}, v.data(), out.data());
  }
  return g.record("add", std::vector<Var>(terms.begin(), terms.end()), std::move(out),
                  [](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    for (Var v : in) {
                      if (gr.requires_grad(v)) axpy(T{1}, dy.data(), gr.grad_mut(v).data());
                    }
                  });
}

template <typename T>
Var mul(Graph<T>& g, Var a, Var b) {
  const Tensor<T>& av = g.value(a);
  const Tensor<T>& bv = g.value(b);
  if (!av.same_shape(bv)) {
    throw DimensionError("mul: shape mismatch " + to_string(av.shape()) + " vs " + to_string(bv.shape()));
  }
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return g.record("mul", {a, b}, std::move(out),
                  [](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    const Tensor<T>& av = gr.value(in[0]);
                    const Tensor<T>& bv = gr.value(in[1]);
                    if (gr.requires_grad(in[0])) {
                      auto da = gr.grad_mut(in[0]).data();
                      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * bv[i];
                    }
                    if (gr.requires_grad(in[1])) {
                      auto db = gr.grad_mut(in[1]).data();
                      for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * av[i];
                    }
                  });
}

template <typename T>
Var scale(Graph<T>& g, Var x, T factor) {
  Tensor<T> out = g.value(x);
  for (T& v : out.data()) v *= factor;
  return g.record("scale", {x}, std::move(out),
                  [factor](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    if (gr.requires_grad(in[0])) axpy(factor, dy.data(), gr.grad_mut(in[0]).data());
                  });
}

template <typename T>
Var sum(Graph<T>& g, Var x) {
  T acc{};
  for (T v : g.value(x).data()) acc += v;
  return g.record("sum", {x}, Tensor<T>::scalar(acc),
                  [](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    if (!gr.requires_grad(in[0])) return;
                    const T s = dy[0];
                    for (T& v : gr.grad_mut(in[0]).data()) v += s;
                  });
}

template <typename T>
Var concat(Graph<T>& g, std::span<const Var> parts) {
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor<T>& v = g.value(p);
    if (v.rank() != 1) throw DimensionError("concat: expected rank-1 parts, got " + to_string(v.shape()));
    total += v.size();
  }
  Tensor<T> out(Shape{total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto src = g.value(p).data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += src.size();
  }
  return g.record("concat", std::vector<Var>(parts.begin(), parts.end()), std::move(out),
                  [](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    std::size_t off = 0;
                    for (Var v : in) {
                      const std::size_t len = gr.value(v).size();
                      if (gr.requires_grad(v)) axpy(T{1}, dy.data().subspan(off, len), gr.grad_mut(v).data());
                      off += len;
                    }
                  });
}

template <typename T>
Var row(Graph<T>& g, Var x, std::size_t r) {
  const Tensor<T>& v = g.value(x);
  if (v.rank() != 2 || r >= v.dim(0)) {
    throw DimensionError("row " + std::to_string(r) + " of tensor " + to_string(v.shape()));
  }
  return g.record("row", {x}, Tensor<T>::vector(v.row(r)),
                  [r](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    if (gr.requires_grad(in[0])) axpy(T{1}, dy.data(), gr.grad_mut(in[0]).row(r));
                  });
}

template <typename T>
Var activation(Graph<T>& g, Activation kind, Var x) {
  Tensor<T> out = g.value(x);
  for (T& v : out.data()) v = apply(kind, v);
  return g.record("activation", {x}, std::move(out),
                  [kind](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    if (!gr.requires_grad(in[0])) return;
                    const Tensor<T>& xv = gr.value(in[0]);
                    auto dx = gr.grad_mut(in[0]).data();
                    for (std::size_t i = 0; i < dx.size(); ++i) {
                      dx[i] += dy[i] * derivative(kind, xv[i], apply(kind, xv[i]));
                    }
                  });
}

template <typename T>
Var conv1d_maxpool(Graph<T>& g, Var seq, Var filters, Var bias, Activation act) {
  const Tensor<T>& sv = g.value(seq);
  const Tensor<T>& fv = g.value(filters);
  const Tensor<T>& bv = g.value(bias);
  if (sv.rank() != 2 || fv.rank() != 3) {
    throw DimensionError("conv1d_maxpool: seq " + to_string(sv.shape()) + ", filters " + to_string(fv.shape()));
  }
  const std::size_t len = sv.dim(0);
  const std::size_t d = sv.dim(1);
  const std::size_t w = fv.dim(0);
  const std::size_t nf = fv.dim(2);
  if (fv.dim(1) != d || w == 0) {
    throw DimensionError("conv1d_maxpool: filters " + to_string(fv.shape()) + " incompatible with seq " +
                         to_string(sv.shape()));
  }
  require_shape(bv, Shape{nf}, "conv1d_maxpool bias");

  const std::size_t positions = std::max(len, w) - w + 1;
  std::vector<T> pre(positions * nf);
  for (std::size_t p = 0; p < positions; ++p) {
    auto z = std::span<T>(pre).subspan(p * nf, nf);
    std::copy(bv.data().begin(), bv.data().end(), z.begin());
    for (std::size_t k = 0; k < w && p + k < len; ++k) {
      const auto x = sv.row(p + k);
      for (std::size_t j = 0; j < d; ++j) {
        if (x[j] == T{0}) continue;
        axpy(x[j], fv.data().subspan((k * d + j) * nf, nf), z);
      }
    }
  }

  Tensor<T> out(Shape{nf});
  std::vector<std::size_t> argmax(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    T best = apply(act, pre[f]);
    for (std::size_t p = 1; p < positions; ++p) {
      const T y = apply(act, pre[p * nf + f]);
      if (y > best) {
        best = y;
        argmax[f] = p;
      }
    }
    out[f] = best;
  }

  return g.record(
      "conv1d_maxpool", {seq, filters, bias}, std::move(out),
      [len, d, w, nf, act, argmax = std::move(argmax), pre = std::move(pre)](
          Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
        const Tensor<T>& sv = gr.value(in[0]);
        const Tensor<T>& fv = gr.value(in[1]);
        Tensor<T>* dseq = gr.requires_grad(in[0]) ? &gr.grad_mut(in[0]) : nullptr;
        Tensor<T>* dfilt = gr.requires_grad(in[1]) ? &gr.grad_mut(in[1]) : nullptr;
        Tensor<T>* dbias = gr.requires_grad(in[2]) ? &gr.grad_mut(in[2]) : nullptr;
        for (std::size_t f = 0; f < nf; ++f) {
          const std::size_t p = argmax[f];
          const T z = pre[p * nf + f];
          const T gz = dy[f] * derivative(act, z, apply(act, z));
          if (gz == T{0}) continue;
          if (dbias) (*dbias)[f] += gz;
          for (std::size_t k = 0; k < w && p + k < len; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
              const std::size_t fi = (k * d + j) * nf + f;
              if (dfilt) (*dfilt)[fi] += gz * sv.at(p + k, j);
              if (dseq) dseq->at(p + k, j) += gz * fv[fi];
            }
          }
        }
      });
}

template <typename T>
LstmState lstm_step(Graph<T>& g, Var x, LstmState prev, const LstmWeights& w) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& hv = g.value(prev.h);
  const Tensor<T>& cv = g.value(prev.c);
  const Tensor<T>& wx = g.value(w.wx);
  const Tensor<T>& wh = g.value(w.wh);
  const Tensor<T>& bv = g.value(w.b);
  if (xv.rank() != 1 || hv.rank() != 1) {
    throw DimensionError("lstm_step: x " + to_string(xv.shape()) + " and h " + to_string(hv.shape()) +
                         " must be rank-1");
  }
  const std::size_t din = xv.size();
  const std::size_t dh = hv.size();
  require_shape(cv, Shape{dh}, "lstm_step c");
  require_shape(wx, Shape{din, 4 * dh}, "lstm_step wx");
  require_shape(wh, Shape{dh, 4 * dh}, "lstm_step wh");
  require_shape(bv, Shape{4 * dh}, "lstm_step b");

  // gates holds post-activation i, f, g, o blocks.
  std::vector<T> gates(bv.data().begin(), bv.data().end());
  for (std::size_t i = 0; i < din; ++i) {
    if (xv[i] == T{0}) continue;
    axpy(xv[i], wx.row(i), std::span<T>(gates));
  }
  for (std::size_t i = 0; i < dh; ++i) {
    if (hv[i] == T{0}) continue;
    axpy(hv[i], wh.row(i), std::span<T>(gates));
  }
  for (std::size_t j = 0; j < dh; ++j) {
    gates[j] = sigmoid(gates[j]);
    gates[dh + j] = sigmoid(gates[dh + j]);
    gates[2 * dh + j] = std::tanh(gates[2 * dh + j]);
    gates[3 * dh + j] = sigmoid(gates[3 * dh + j]);
  }
  Tensor<T> out(Shape{2, dh});
  std::vector<T> tanh_c(dh);
  for (std::size_t j = 0; j < dh; ++j) {
    const T c_new = gates[dh + j] * cv[j] + gates[j] * gates[2 * dh + j];
    tanh_c[j] = std::tanh(c_new);
    out.at(0, j) = gates[3 * dh + j] * tanh_c[j];
    out.at(1, j) = c_new;
  }

  const Var fused = g.record(
      "lstm_step", {x, prev.h, prev.c, w.wx, w.wh, w.b}, std::move(out),
      [din, dh, gates = std::move(gates), tanh_c = std::move(tanh_c)](Graph<T>& gr, const std::vector<Var>& in,
                                                                       const Tensor<T>& dy) {
        const Tensor<T>& cv = gr.value(in[2]);
        std::vector<T> da(4 * dh);
        std::vector<T> dc_prev(dh);
        for (std::size_t j = 0; j < dh; ++j) {
          const T ig = gates[j], fg = gates[dh + j], cg = gates[2 * dh + j], og = gates[3 * dh + j];
          const T dh_out = dy.at(0, j);
          const T dc = dy.at(1, j) + dh_out * og * (T{1} - tanh_c[j] * tanh_c[j]);
          da[j] = dc * cg * ig * (T{1} - ig);
          da[dh + j] = dc * cv[j] * fg * (T{1} - fg);
          da[2 * dh + j] = dc * ig * (T{1} - cg * cg);
          da[3 * dh + j] = dh_out * tanh_c[j] * og * (T{1} - og);
          dc_prev[j] = dc * fg;
        }
        const std::span<const T> das(da);
        const Tensor<T>& xv = gr.value(in[0]);
        const Tensor<T>& hv = gr.value(in[1]);
        if (gr.requires_grad(in[0])) {
          const Tensor<T>& wx = gr.value(in[3]);
          auto dx = gr.grad_mut(in[0]).data();
          for (std::size_t i = 0; i < din; ++i) dx[i] += dot(das, wx.row(i));
        }
        if (gr.requires_grad(in[1])) {
          const Tensor<T>& wh = gr.value(in[4]);
          auto dhp = gr.grad_mut(in[1]).data();
          for (std::size_t i = 0; i < dh; ++i) dhp[i] += dot(das, wh.row(i));
        }
        if (gr.requires_grad(in[2])) axpy(T{1}, std::span<const T>(dc_prev), gr.grad_mut(in[2]).data());
        if (gr.requires_grad(in[3])) {
          Tensor<T>& dwx = gr.grad_mut(in[3]);
          for (std::size_t i = 0; i < din; ++i) {
            if (xv[i] == T{0}) continue;
            axpy(xv[i], das, dwx.row(i));
          }
        }
        if (gr.requires_grad(in[4])) {
          Tensor<T>& dwh = gr.grad_mut(in[4]);
          for (std::size_t i = 0; i < dh; ++i) {
            if (hv[i] == T{0}) continue;
            axpy(hv[i], das, dwh.row(i));
          }
        }
        if (gr.requires_grad(in[5])) axpy(T{1}, das, gr.grad_mut(in[5]).data());
      });
  return LstmState{row(g, fused, 0), row(g, fused, 1)};
}

template <typename T>
Var dropout(Graph<T>& g, Var x, double keep_prob, Mode mode, Rng& rng) {
  if (!(keep_prob > 0.0) || keep_prob > 1.0) {
    throw ConfigError("dropout keep probability must lie in (0, 1], got " + std::to_string(keep_prob));
  }
  if (mode == Mode::eval || keep_prob == 1.0) return x;
  const Tensor<T>& xv = g.value(x);
  Tensor<T> mask(xv.shape());
  const T inv = static_cast<T>(1.0 / keep_prob);
  for (T& m : mask.data()) m = rng.bernoulli(keep_prob) ? inv : T{0};
  Tensor<T> out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.record("dropout", {x}, std::move(out),
                  [mask = std::move(mask)](Graph<T>& gr, const std::vector<Var>& in, const Tensor<T>& dy) {
                    if (!gr.requires_grad(in[0])) return;
                    auto dx = gr.grad_mut(in[0]).data();
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * mask[i];
                  });
}

template <typename T>
std::vector<T> masked_softmax(std::span<const T> logits, std::span<const bool> mask) {
  if (!mask.empty() && mask.size() != logits.size()) {
    throw DimensionError("mask length " + std::to_string(mask.size()) + " != logits length " +
                         std::to_string(logits.size()));
  }
  auto allowed = [&](std::size_t i) { return mask.empty() || mask[i]; };
  T peak = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed(i)) peak = std::max(peak, logits[i]);
  }
  if (!std::isfinite(peak)) throw UsageError("action mask permits no action");
  std::vector<T> probs(logits.size(), T{0});
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!allowed(i)) continue;
    probs[i] = std::exp(logits[i] - peak);
    total += static_cast<double>(probs[i]);
  }
  for (T& p : probs) p = static_cast<T>(static_cast<double>(p) / total);
  return probs;
}

template <typename T>
SoftmaxXent<T> softmax_xent(Graph<T>& g, Var logits, std::size_t gold, std::span<const bool> mask) {
  const Tensor<T>& lv = g.value(logits);
  if (lv.rank() != 1) throw DimensionError("softmax_xent: logits must be rank-1, got " + to_string(lv.shape()));
  if (gold >= lv.size()) {
    throw IndexError("gold action " + std::to_string(gold) + " out of range for " + std::to_string(lv.size()) +
                     " classes");
  }
  if (!mask.empty() && !mask[gold]) throw UsageError("gold action is masked out");
  std::vector<T> probs = masked_softmax<T>(lv.data(), mask);

  // -log p[gold] from the log-sum-exp directly, which stays accurate when
  // p[gold] underflows.
  T peak = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (mask.empty() || mask[i]) peak = std::max(peak, lv[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (mask.empty() || mask[i]) total += std::exp(static_cast<double>(lv[i] - peak));
  }
  const T loss = static_cast<T>(std::log(total) - static_cast<double>(lv[gold] - peak));

  Tensor<T> probs_tensor(Shape{probs.size()}, probs);
  const Var out = g.record("softmax_xent", {logits}, Tensor<T>::scalar(loss),
                           [probs = std::move(probs), gold](Graph<T>& gr, const std::vector<Var>& in,
                                                            const Tensor<T>& dy) {
                             if (!gr.requires_grad(in[0])) return;
                             auto dl = gr.grad_mut(in[0]).data();
                             const T s = dy[0];
                             for (std::size_t i = 0; i < dl.size(); ++i) {
                               dl[i] += s * (probs[i] - (i == gold ? T{1} : T{0}));
                             }
                           });
  return SoftmaxXent<T>{out, std::move(probs_tensor)};
}

#define HCN_INSTANTIATE_OPS(T)                                                                  \
  template Var matmul<T>(Graph<T>&, Var, Var);                                                  \
  template Var add<T>(Graph<T>&, Var, Var);                                                     \
  template Var mul<T>(Graph<T>&, Var, Var);                                                     \
  template Var add_n<T>(Graph<T>&, std::span<const Var>);                                       \
  template Var scale<T>(Graph<T>&, Var, T);                                                     \
  template Var sum<T>(Graph<T>&, Var);                                                          \
  template Var concat<T>(Graph<T>&, std::span<const Var>);                                      \
  template Var row<T>(Graph<T>&, Var, std::size_t);                                             \
  template Var activation<T>(Graph<T>&, Activation, Var);                                       \
  template Var conv1d_maxpool<T>(Graph<T>&, Var, Var, Var, Activation);                         \
  template LstmState lstm_step<T>(Graph<T>&, Var, LstmState, const LstmWeights&);               \
  template Var dropout<T>(Graph<T>&, Var, double, Mode, Rng&);                                  \
  template SoftmaxXent<T> softmax_xent<T>(Graph<T>&, Var, std::size_t, std::span<const bool>);  \
  template std::vector<T> masked_softmax<T>(std::span<const T>, std::span<const bool>);

HCN_INSTANTIATE_OPS(float)
HCN_INSTANTIATE_OPS(double)

#undef HCN_INSTANTIATE_OPS

}  // namespace hcn::grad
