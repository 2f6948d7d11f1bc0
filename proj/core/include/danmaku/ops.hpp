#pragma once

#include <cstddef>

#include "danmaku/autodiff.hpp"

/// Differentiable operations recorded on a Tape. Every op allocates a fresh
/// output; inputs are never modified.
///
/// Layout conventions: convolutions take [batch, channels, length];
/// recurrent layers take [batch, time, features].
namespace danmaku::ops {

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding);
std::size_t conv1d_transpose_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding);

// Elementwise
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var x);
Var tanh(Var x);
Var logistic(Var x);
Var sin(Var x);

// Reductions
Var sum(Var x);
Var mean(Var x);

/// [m, k] x [k, n] -> [m, n]
Var matmul(Var a, Var b);

/// Fully connected layer over the last axis: x[..., in] W[out, in]^T + b[out].
Var linear(Var x, Var weight, Var bias);

/// weight: [out_channels, in_channels, kernel]; bias: [out_channels] or
/// an invalid Var for none.
Var conv1d(Var x, Var weight, Var bias, std::size_t stride, std::size_t padding);

/// weight: [in_channels, out_channels, kernel]. Adjoint of conv1d with the
/// same weights (bias aside).
Var conv1d_transpose(Var x, Var weight, Var bias, std::size_t stride, std::size_t padding);

/// Single LSTM layer, zero initial state, gate order (input, forget, cell, output).
/// x: [B, T, D]; w_ih: [4H, D]; w_hh: [4H, H]; bias: [4H]. Returns [B, T, H].
Var lstm_layer(Var x, Var w_ih, Var w_hh, Var bias);

/// [B, M, N] -> [B, N, M]
Var swap_last_axes(Var x);

/// x[:, begin:end, :] for a rank-3 input.
Var time_slice(Var x, std::size_t begin, std::size_t end);

/// Mean binary cross-entropy of probabilities against fixed targets.
/// Probabilities are clamped to [1e-12, 1 - 1e-12] inside the logarithms.
Var binary_cross_entropy(Var prob, const Tensor& target);

/// binary_cross_entropy(logistic(logits), target), computed stably.
Var bce_with_logits(Var logits, const Tensor& target);

Var mse(Var a, Var b);

/// Global + periodic noise: row i (1-based) of sample b is
/// global[b] ++ sin(i * freq[b] + phase[b]). global: [B, G] (constant),
/// freq and phase: [B, P]. Returns [B, length, G + P].
Var periodic_noise(const Tensor& global, Var freq, Var phase, std::size_t length);

}  // namespace danmaku::ops
