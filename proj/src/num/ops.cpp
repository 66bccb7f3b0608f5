#include "paretofact/num/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "paretofact/num/kernels.hpp"

namespace paretofact::num {

namespace {

template <typename T>
void require_rank2(const BasicTensor<T>& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " +
                         shape_string(t.shape()));
  }
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
BasicTensor<T> scalar_tensor(double v) {
  return BasicTensor<T>(Shape{1}, std::vector<T>{static_cast<T>(v)});
}

template <typename T>
void softmax_row(const T* in, T* out, std::size_t n) {
  T mx = in[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(static_cast<double>(in[i]) - static_cast<double>(mx));
    out[i] = static_cast<T>(e);
    total += e;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<T>(static_cast<double>(out[i]) / total);
  }
}

inline double clamp_prob(double p) {
  return std::clamp(p, kLogEpsilon, 1.0 - kLogEpsilon);
}

inline bool in_clamp_range(double p) { return p > kLogEpsilon && p < 1.0 - kLogEpsilon; }

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  BasicTensor<T> c(Shape{m, n});
  kernels::active<T>().gemm(a.data(), b.data(), c.data(), m, k, n);
  return c;
}

template <typename T>
Var matmul(BasicGraph<T>& g, Var a, Var b) {
  BasicTensor<T> out = matmul(g.value(a), g.value(b));
  return g.record(std::move(out), {a, b}, [a, b](BasicGraph<T>& gr, std::size_t self) {
    const auto& av = gr.value(a);
    const auto& bv = gr.value(b);
    const auto& go = gr.grad(Var{self});
    const std::size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
    const auto& kt = kernels::active<T>();
    kt.gemm_nt_acc(go.data(), bv.data(), gr.grad_mut(a.id).data(), m, k, n);
    kt.gemm_tn_acc(av.data(), go.data(), gr.grad_mut(b.id).data(), m, k, n);
  });
}

template <typename T>
Var add_bias(BasicGraph<T>& g, Var x, Var bias) {
  const auto& xv = g.value(x);
  const auto& bv = g.value(bias);
  require_rank2(xv, "add_bias");
  if (bv.size() != xv.shape()[1]) {
    throw DimensionError("add_bias: bias " + shape_string(bv.shape()) + " does not match " +
                         shape_string(xv.shape()));
  }
  BasicTensor<T> out = xv;
  const std::size_t m = xv.shape()[0], n = xv.shape()[1];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  }
  return g.record(std::move(out), {x, bias}, [x, bias, m, n](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    auto& gx = gr.grad_mut(x.id);
    auto& gb = gr.grad_mut(bias.id);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        gx[i * n + j] += go[i * n + j];
        gb[j] += go[i * n + j];
      }
    }
  });
}

template <typename T>
BasicTensor<T> elementwise(Elementwise op, const BasicTensor<T>& a, const BasicTensor<T>* b,
                           double slope) {
  BasicTensor<T> out = a;
  auto binary = [&](auto f, const char* name) {
    if (b == nullptr) throw ContractError(std::string(name) + ": missing second operand");
    require_same_shape(a.shape(), b->shape(), name);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i], (*b)[i]);
  };
  switch (op) {
    case Elementwise::add:
      binary([](T x, T y) { return x + y; }, "add");
      break;
    case Elementwise::sub:
      binary([](T x, T y) { return x - y; }, "sub");
      break;
    case Elementwise::mul:
      binary([](T x, T y) { return x * y; }, "mul");
      break;
    case Elementwise::leaky_relu: {
      const T s = static_cast<T>(slope);
      for (auto& v : out.values()) v = v >= T{0} ? v : s * v;
      break;
    }
    case Elementwise::sigmoid:
      for (auto& v : out.values()) v = stable_sigmoid(v);
      break;
  }
  return out;
}

template <typename T>
Var add(BasicGraph<T>& g, Var a, Var b) {
  const auto& av = g.value(a);
  const auto& bv = g.value(b);
  auto out = elementwise(Elementwise::add, av, &bv);
  return g.record(std::move(out), {a, b}, [a, b](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& kt = kernels::active<T>();
    kt.axpy(T{1}, go.data(), gr.grad_mut(a.id).data(), go.size());
    kt.axpy(T{1}, go.data(), gr.grad_mut(b.id).data(), go.size());
  });
}

template <typename T>
Var sub(BasicGraph<T>& g, Var a, Var b) {
  const auto& av = g.value(a);
  const auto& bv = g.value(b);
  auto out = elementwise(Elementwise::sub, av, &bv);
  return g.record(std::move(out), {a, b}, [a, b](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& kt = kernels::active<T>();
    kt.axpy(T{1}, go.data(), gr.grad_mut(a.id).data(), go.size());
    kt.axpy(T{-1}, go.data(), gr.grad_mut(b.id).data(), go.size());
  });
}

template <typename T>
Var mul(BasicGraph<T>& g, Var a, Var b) {
  const auto& av = g.value(a);
  const auto& bv = g.value(b);
  auto out = elementwise(Elementwise::mul, av, &bv);
  return g.record(std::move(out), {a, b}, [a, b](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& av2 = gr.value(a);
    const auto& bv2 = gr.value(b);
    auto& ga = gr.grad_mut(a.id);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv2[i];
    auto& gb = gr.grad_mut(b.id);
    for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av2[i];
  });
}

template <typename T>
Var scale(BasicGraph<T>& g, Var x, double factor) {
  BasicTensor<T> out = g.value(x);
  const T f = static_cast<T>(factor);
  for (auto& v : out.values()) v *= f;
  return g.record(std::move(out), {x}, [x, f](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    kernels::active<T>().axpy(f, go.data(), gr.grad_mut(x.id).data(), go.size());
  });
}

template <typename T>
Var leaky_relu(BasicGraph<T>& g, Var x, double slope) {
  auto out = elementwise<T>(Elementwise::leaky_relu, g.value(x), nullptr, slope);
  const T s = static_cast<T>(slope);
  return g.record(std::move(out), {x}, [x, s](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& xv = gr.value(x);
    auto& gx = gr.grad_mut(x.id);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += xv[i] >= T{0} ? go[i] : s * go[i];
  });
}

template <typename T>
Var sigmoid(BasicGraph<T>& g, Var x) {
  auto out = elementwise(Elementwise::sigmoid, g.value(x));
  return g.record(std::move(out), {x}, [x](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& y = gr.value(Var{self});
    auto& gx = gr.grad_mut(x.id);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * y[i] * (T{1} - y[i]);
  });
}

template <typename T>
Var abs(BasicGraph<T>& g, Var x) {
  BasicTensor<T> out = g.value(x);
  for (auto& v : out.values()) v = std::abs(v);
  return g.record(std::move(out), {x}, [x](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& xv = gr.value(x);
    auto& gx = gr.grad_mut(x.id);
    for (std::size_t i = 0; i < go.size(); ++i) {
      if (xv[i] > T{0}) gx[i] += go[i];
      else if (xv[i] < T{0}) gx[i] -= go[i];
    }
  });
}

template <typename T>
Var softmax(BasicGraph<T>& g, Var logits) {
  const auto& lv = g.value(logits);
  const std::size_t rows = lv.rows(), n = lv.cols();
  if (n < 2) throw DimensionError("softmax: needs at least two logits, got " + shape_string(lv.shape()));
  BasicTensor<T> out(lv.shape());
  for (std::size_t r = 0; r < rows; ++r) softmax_row(lv.data() + r * n, out.data() + r * n, n);
  return g.record(std::move(out), {logits}, [logits, rows, n](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    const auto& y = gr.value(Var{self});
    auto& gx = gr.grad_mut(logits.id);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += static_cast<double>(go[r * n + i]) * y[r * n + i];
      for (std::size_t i = 0; i < n; ++i) {
        gx[r * n + i] += static_cast<T>(y[r * n + i] * (go[r * n + i] - dot));
      }
    }
  });
}

template <typename T>
Var concat_cols(BasicGraph<T>& g, Var a, Var b) {
  const auto& av = g.value(a);
  const auto& bv = g.value(b);
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols: row counts differ, " + shape_string(av.shape()) + " vs " +
                         shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), p = av.cols(), q = bv.cols();
  BasicTensor<T> out(Shape{m, p + q});
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(av.data() + i * p, p, out.data() + i * (p + q));
    std::copy_n(bv.data() + i * q, q, out.data() + i * (p + q) + p);
  }
  return g.record(std::move(out), {a, b}, [a, b, m, p, q](BasicGraph<T>& gr, std::size_t self) {
    const auto& go = gr.grad(Var{self});
    auto& ga = gr.grad_mut(a.id);
    auto& gb = gr.grad_mut(b.id);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < p; ++j) ga[i * p + j] += go[i * (p + q) + j];
      for (std::size_t j = 0; j < q; ++j) gb[i * q + j] += go[i * (p + q) + p + j];
    }
  });
}

template <typename T>
Var sum(BasicGraph<T>& g, Var x) {
  double acc = 0.0;
  for (T v : g.value(x).values()) acc += v;
  return g.record(scalar_tensor<T>(acc), {x}, [x](BasicGraph<T>& gr, std::size_t self) {
    const T go = gr.grad(Var{self})[0];
    for (auto& v : gr.grad_mut(x.id).values()) v += go;
  });
}

template <typename T>
Var mean(BasicGraph<T>& g, Var x) {
  const auto& xv = g.value(x);
  double acc = 0.0;
  for (T v : xv.values()) acc += v;
  const double n = static_cast<double>(xv.size());
  return g.record(scalar_tensor<T>(acc / n), {x}, [x, n](BasicGraph<T>& gr, std::size_t self) {
    const T go = static_cast<T>(gr.grad(Var{self})[0] / n);
    for (auto& v : gr.grad_mut(x.id).values()) v += go;
  });
}

template <typename T>
Var norm_l1(BasicGraph<T>& g, Var x) {
  return sum(g, abs(g, x));
}

template <typename T>
Var norm_l2(BasicGraph<T>& g, Var x) {
  double acc = 0.0;
  for (T v : g.value(x).values()) acc += static_cast<double>(v) * v;
  const double norm = std::sqrt(acc);
  return g.record(scalar_tensor<T>(norm), {x}, [x, norm](BasicGraph<T>& gr, std::size_t self) {
    if (norm == 0.0) return;
    const double go = gr.grad(Var{self})[0];
    const auto& xv = gr.value(x);
    auto& gx = gr.grad_mut(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += static_cast<T>(go * xv[i] / norm);
  });
}

template <typename T>
Var cross_entropy(BasicGraph<T>& g, const BasicTensor<T>& target, Var pred) {
  const auto& pv = g.value(pred);
  require_same_shape(target.shape(), pv.shape(), "cross_entropy");
  const std::size_t rows = pv.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (target[i] != T{0}) acc -= static_cast<double>(target[i]) * std::log(clamp_prob(pv[i]));
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  return g.record(scalar_tensor<T>(acc * inv_rows), {pred},
                  [target, pred, inv_rows](BasicGraph<T>& gr, std::size_t self) {
                    const double go = gr.grad(Var{self})[0] * inv_rows;
                    const auto& p = gr.value(pred);
                    auto& gp = gr.grad_mut(pred.id);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      if (!in_clamp_range(p[i])) continue;
                      gp[i] += static_cast<T>(-go * target[i] / p[i]);
                    }
                  });
}

template <typename T>
Var binary_cross_entropy(BasicGraph<T>& g, const BasicTensor<T>& target, Var pred) {
  const auto& pv = g.value(pred);
  require_same_shape(target.shape(), pv.shape(), "binary_cross_entropy");
  const std::size_t rows = pv.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = clamp_prob(pv[i]);
    const double t = target[i];
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  return g.record(scalar_tensor<T>(acc * inv_rows), {pred},
                  [target, pred, inv_rows](BasicGraph<T>& gr, std::size_t self) {
                    const double go = gr.grad(Var{self})[0] * inv_rows;
                    const auto& p = gr.value(pred);
                    auto& gp = gr.grad_mut(pred.id);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      if (!in_clamp_range(p[i])) continue;
                      const double pi = p[i];
                      const double t = target[i];
                      gp[i] += static_cast<T>(go * (-t / pi + (1.0 - t) / (1.0 - pi)));
                    }
                  });
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.size() < 2) throw DimensionError("softmax: needs at least two logits");
  std::vector<double> out(logits.size());
  softmax_row(logits.data(), out.data(), logits.size());
  return out;
}

std::vector<double> softmax(std::span<const float> logits) {
  std::vector<double> wide(logits.begin(), logits.end());
  return softmax(std::span<const double>(wide));
}

double cross_entropy(std::span<const double> target, std::span<const double> pred) {
  if (target.size() != pred.size()) {
    throw DimensionError("cross_entropy: length " + std::to_string(target.size()) + " vs " +
                         std::to_string(pred.size()));
  }
  double h = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != 0.0) h -= target[i] * std::log(clamp_prob(pred[i]));
  }
  return h;
}

namespace {
template <typename T>
double l1(std::span<const T> x) {
  double acc = 0.0;
  for (T v : x) acc += std::fabs(static_cast<double>(v));
  return acc;
}
template <typename T>
double l2(std::span<const T> x) {
  double acc = 0.0;
  for (T v : x) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}
}  // namespace

double norm_l1(std::span<const float> x) { return l1(x); }
double norm_l2(std::span<const float> x) { return l2(x); }
double norm_l1(std::span<const double> x) { return l1(x); }
double norm_l2(std::span<const double> x) { return l2(x); }

#define PARETOFACT_INSTANTIATE_OPS(T)                                                   \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> elementwise(Elementwise, const BasicTensor<T>&,               \
                                      const BasicTensor<T>*, double);                   \
  template Var matmul(BasicGraph<T>&, Var, Var);                                        \
  template Var add_bias(BasicGraph<T>&, Var, Var);                                      \
  template Var add(BasicGraph<T>&, Var, Var);                                           \
  template Var sub(BasicGraph<T>&, Var, Var);                                           \
  template Var mul(BasicGraph<T>&, Var, Var);                                           \
  template Var scale(BasicGraph<T>&, Var, double);                                      \
  template Var leaky_relu(BasicGraph<T>&, Var, double);                                 \
  template Var sigmoid(BasicGraph<T>&, Var);                                            \
  template Var abs(BasicGraph<T>&, Var);                                                \
  template Var softmax(BasicGraph<T>&, Var);                                            \
  template Var concat_cols(BasicGraph<T>&, Var, Var);                                   \
  template Var sum(BasicGraph<T>&, Var);                                                \
  template Var mean(BasicGraph<T>&, Var);                                               \
  template Var norm_l1(BasicGraph<T>&, Var);                                            \
  template Var norm_l2(BasicGraph<T>&, Var);                                            \
  template Var cross_entropy(BasicGraph<T>&, const BasicTensor<T>&, Var);               \
  template Var binary_cross_entropy(BasicGraph<T>&, const BasicTensor<T>&, Var);

PARETOFACT_INSTANTIATE_OPS(float)
PARETOFACT_INSTANTIATE_OPS(double)

#undef PARETOFACT_INSTANTIATE_OPS

}  // namespace paretofact::num
