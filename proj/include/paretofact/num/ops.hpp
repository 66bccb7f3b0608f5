#pragma once

// Differentiable tensor operations recorded on a BasicGraph, plus the plain
// (graph-free) versions used for inference. Reductions accumulate in double.

#include <cmath>
#include <span>
#include <vector>

#include "paretofact/num/graph.hpp"
#include "paretofact/num/tensor.hpp"

namespace paretofact::num {

// Clamp applied to probabilities before every logarithm.
inline constexpr double kLogEpsilon = 1e-7;

inline constexpr double kDefaultLeakySlope = 0.2;

enum class Elementwise { add, sub, mul, leaky_relu, sigmoid };

// ---- graph ops ----------------------------------------------------------

template <typename T>
Var matmul(BasicGraph<T>& g, Var a, Var b);
// x[m x n] + bias[n] broadcast over rows.
template <typename T>
Var add_bias(BasicGraph<T>& g, Var x, Var bias);
template <typename T>
Var add(BasicGraph<T>& g, Var a, Var b);
template <typename T>
Var sub(BasicGraph<T>& g, Var a, Var b);
template <typename T>
Var mul(BasicGraph<T>& g, Var a, Var b);
template <typename T>
Var scale(BasicGraph<T>& g, Var x, double factor);
template <typename T>
Var leaky_relu(BasicGraph<T>& g, Var x, double slope);
template <typename T>
Var sigmoid(BasicGraph<T>& g, Var x);
template <typename T>
Var abs(BasicGraph<T>& g, Var x);
// Row-wise softmax of a [m x L] (or [L]) tensor.
template <typename T>
Var softmax(BasicGraph<T>& g, Var logits);
// [m x p] and [m x q] -> [m x (p + q)]
template <typename T>
Var concat_cols(BasicGraph<T>& g, Var a, Var b);
template <typename T>
Var sum(BasicGraph<T>& g, Var x);
template <typename T>
Var mean(BasicGraph<T>& g, Var x);
template <typename T>
Var norm_l1(BasicGraph<T>& g, Var x);
// Gradient at the origin is taken as zero.
template <typename T>
Var norm_l2(BasicGraph<T>& g, Var x);
// Row-mean of -sum_i t_i ln(clamp(p_i)); `target` rows are distributions.
template <typename T>
Var cross_entropy(BasicGraph<T>& g, const BasicTensor<T>& target, Var pred);
// Row-mean of sum_n H(t_n, p_n) with binary H and clamped p.
template <typename T>
Var binary_cross_entropy(BasicGraph<T>& g, const BasicTensor<T>& target, Var pred);

// ---- plain ops ----------------------------------------------------------

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

// Binary ops take both operands; unary ops ignore `b`. `slope` is used by
// leaky_relu only.
template <typename T>
BasicTensor<T> elementwise(Elementwise op, const BasicTensor<T>& a,
                           const BasicTensor<T>* b = nullptr,
                           double slope = kDefaultLeakySlope);

// Softmax of one logit vector, max-subtracted. Needs at least two entries.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const float> logits);

// -sum_i target_i ln(clamp(pred_i)), both arguments distributions.
double cross_entropy(std::span<const double> target, std::span<const double> pred);

double norm_l1(std::span<const float> x);
double norm_l2(std::span<const float> x);
double norm_l1(std::span<const double> x);
double norm_l2(std::span<const double> x);

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace paretofact::num
