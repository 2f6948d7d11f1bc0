#include "danmaku/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <memory>
#include <cmath>
#include <string>

#include "danmaku/error.hpp"

namespace danmaku::ops {
namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

MapR as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MapR(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
CMapR as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return CMapR(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

std::string dims(const Shape& s) { return shape_string(s); }

void require_rank(const char* op, const char* what, const Var& v, std::size_t rank) {
  if (v.shape().size() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     dims(v.shape()));
  }
}

void require_dim(const char* op, const char* what, std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw ShapeError(std::string(op) + ": " + what + " is " + std::to_string(got) + ", expected " +
                     std::to_string(expected));
  }
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + dims(a.shape()) + " vs " + dims(b.shape()));
  }
}

template <class Fwd, class Deriv>
Var unary(Var x, const char* name, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  const std::uint32_t xi = x.index();
  return x.tape().record(std::move(out), {x},
                         [xi, deriv](Tape& t, std::uint32_t self) {
                           if (!t.requires_grad(xi)) return;
                           const Tensor& gy = t.grad(self);
                           const Tensor& xv = t.value(xi);
                           const Tensor& yv = t.value(self);
                           Tensor& gx = t.grad_buffer(xi);
                           for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * deriv(xv[i], yv[i]);
                         },
                         name);
}

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (stride == 0 || kernel == 0) throw ShapeError("conv1d: kernel and stride must be positive");
  if (length + 2 * padding < kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(length) + " with padding " + std::to_string(padding) +
                     " is shorter than kernel " + std::to_string(kernel));
  }
  return (length + 2 * padding - kernel) / stride + 1;
}

std::size_t conv1d_transpose_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                           std::size_t padding) {
  if (stride == 0 || kernel == 0) throw ShapeError("conv1d_transpose: kernel and stride must be positive");
  if (length == 0) throw ShapeError("conv1d_transpose: input length must be at least 1");
  const long long out = static_cast<long long>(length - 1) * static_cast<long long>(stride) -
                        2 * static_cast<long long>(padding) + static_cast<long long>(kernel);
  if (out <= 0) throw ShapeError("conv1d_transpose: output length " + std::to_string(out) + " is not positive");
  return static_cast<std::size_t>(out);
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  const auto ai = a.index(), bi = b.index();
  return a.tape().record(std::move(out), {a, b},
                         [ai, bi](Tape& t, std::uint32_t self) {
                           const Tensor& gy = t.grad(self);
                           for (auto idx : {ai, bi}) {
                             if (!t.requires_grad(idx)) continue;
                             Tensor& g = t.grad_buffer(idx);
                             for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
                           }
                         },
                         "add");
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  const auto ai = a.index(), bi = b.index();
  return a.tape().record(std::move(out), {a, b},
                         [ai, bi](Tape& t, std::uint32_t self) {
                           const Tensor& gy = t.grad(self);
                           if (t.requires_grad(ai)) {
                             Tensor& g = t.grad_buffer(ai);
                             for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
                           }
                           if (t.requires_grad(bi)) {
                             Tensor& g = t.grad_buffer(bi);
                             for (std::size_t i = 0; i < gy.size(); ++i) g[i] -= gy[i];
                           }
                         },
                         "sub");
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  const auto ai = a.index(), bi = b.index();
  return a.tape().record(std::move(out), {a, b},
                         [ai, bi](Tape& t, std::uint32_t self) {
                           const Tensor& gy = t.grad(self);
                           if (t.requires_grad(ai)) {
                             const Tensor& bv = t.value(bi);
                             Tensor& g = t.grad_buffer(ai);
                             for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i] * bv[i];
                           }
                           if (t.requires_grad(bi)) {
                             const Tensor& av = t.value(ai);
                             Tensor& g = t.grad_buffer(bi);
                             for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i] * av[i];
                           }
                         },
                         "mul");
}

Var scale(Var a, double factor) {
  return unary(
      a, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var relu(Var x) {
  return unary(
      x, "relu", [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var logistic(Var x) {
  return unary(x, "logistic", sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var sin(Var x) {
  return unary(
      x, "sin", [](double v) { return std::sin(v); }, [](double v, double) { return std::cos(v); });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const auto xi = x.index();
  return x.tape().record(Tensor(Shape{}, std::vector<double>{s}), {x},
                         [xi](Tape& t, std::uint32_t self) {
                           if (!t.requires_grad(xi)) return;
                           const double gy = t.grad(self)[0];
                           for (double& g : t.grad_buffer(xi).values()) g += gy;
                         },
                         "sum");
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var matmul(Var a, Var b) {
  require_rank("matmul", "lhs", a, 2);
  require_rank("matmul", "rhs", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  require_dim("matmul", "rhs rows", b.shape()[0], k);
  Tensor out({m, n});
  as_matrix(out, m, n).noalias() = as_matrix(a.value(), m, k) * as_matrix(b.value(), k, n);
  const auto ai = a.index(), bi = b.index();
  return a.tape().record(std::move(out), {a, b},
                         [ai, bi, m, k, n](Tape& t, std::uint32_t self) {
                           auto gy = as_matrix(t.grad(self), m, n);
                           if (t.requires_grad(ai)) {
                             as_matrix(t.grad_buffer(ai), m, k).noalias() +=
                                 gy * as_matrix(t.value(bi), k, n).transpose();
                           }
                           if (t.requires_grad(bi)) {
                             as_matrix(t.grad_buffer(bi), k, n).noalias() +=
                                 as_matrix(t.value(ai), m, k).transpose() * gy;
                           }
                         },
                         "matmul");
}

Var linear(Var x, Var weight, Var bias) {
  if (x.shape().empty()) throw ShapeError("linear: input must have at least one axis");
  require_rank("linear", "weight", weight, 2);
  const std::size_t in = x.shape().back();
  const std::size_t out_dim = weight.shape()[0];
  require_dim("linear", "input features", in, weight.shape()[1]);
  const std::size_t rows = x.value().size() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_dim;
  Tensor out(out_shape);
  auto y = as_matrix(out, rows, out_dim);
  y.noalias() = as_matrix(x.value(), rows, in) * as_matrix(weight.value(), out_dim, in).transpose();
  const bool has_bias = bias.valid();
  if (has_bias) {
    require_rank("linear", "bias", bias, 1);
    require_dim("linear", "bias length", bias.shape()[0], out_dim);
    y.rowwise() += CVec(bias.value().data(), static_cast<Eigen::Index>(out_dim)).transpose();
  }
  const auto xi = x.index(), wi = weight.index(), bi = has_bias ? bias.index() : 0;
  auto fn = [xi, wi, bi, has_bias, rows, in, out_dim](Tape& t, std::uint32_t self) {
    auto gy = as_matrix(t.grad(self), rows, out_dim);
    if (t.requires_grad(xi)) {
      as_matrix(t.grad_buffer(xi), rows, in).noalias() += gy * as_matrix(t.value(wi), out_dim, in);
    }
    if (t.requires_grad(wi)) {
      as_matrix(t.grad_buffer(wi), out_dim, in).noalias() += gy.transpose() * as_matrix(t.value(xi), rows, in);
    }
    if (has_bias && t.requires_grad(bi)) {
      Vec(t.grad_buffer(bi).data(), static_cast<Eigen::Index>(out_dim)) += gy.colwise().sum().transpose();
    }
  };
  if (has_bias) return x.tape().record(std::move(out), {x, weight, bias}, fn, "linear");
  return x.tape().record(std::move(out), {x, weight}, fn, "linear");
}

namespace {

/// Unfolds x [B, C, L] into rows (b, l) x columns (c, k) of the strided,
/// zero-padded receptive fields.
MatR im2col(const Tensor& x, std::size_t lout, std::size_t kernel, std::size_t stride, std::size_t padding) {
  const std::size_t batch = x.dim(0), cin = x.dim(1), lin = x.dim(2);
  MatR cols = MatR::Zero(static_cast<Eigen::Index>(batch * lout), static_cast<Eigen::Index>(cin * kernel));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < lout; ++l) {
      double* row = cols.data() + (b * lout + l) * cin * kernel;
      const long long base = static_cast<long long>(l * stride) - static_cast<long long>(padding);
      for (std::size_t c = 0; c < cin; ++c) {
        const double* xrow = &x.at(b, c, 0);
        for (std::size_t k = 0; k < kernel; ++k) {
          const long long pos = base + static_cast<long long>(k);
          if (pos >= 0 && pos < static_cast<long long>(lin)) row[c * kernel + k] = xrow[pos];
        }
      }
    }
  }
  return cols;
}

/// Adjoint of im2col: scatter-adds column gradients back into gx [B, C, L].
void col2im_add(const MatR& cols, Tensor& gx, std::size_t lout, std::size_t kernel, std::size_t stride,
                std::size_t padding) {
  const std::size_t batch = gx.dim(0), cin = gx.dim(1), lin = gx.dim(2);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < lout; ++l) {
      const double* row = cols.data() + (b * lout + l) * cin * kernel;
      const long long base = static_cast<long long>(l * stride) - static_cast<long long>(padding);
      for (std::size_t c = 0; c < cin; ++c) {
        double* grow = &gx.at(b, c, 0);
        for (std::size_t k = 0; k < kernel; ++k) {
          const long long pos = base + static_cast<long long>(k);
          if (pos >= 0 && pos < static_cast<long long>(lin)) grow[pos] += row[c * kernel + k];
        }
      }
    }
  }
}

/// [B, C, L] -> rows (b, l), columns c.
MatR channels_last(const Tensor& x) {
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  MatR m(static_cast<Eigen::Index>(batch * len), static_cast<Eigen::Index>(ch));
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < ch; ++c)
      for (std::size_t l = 0; l < len; ++l) m(static_cast<Eigen::Index>(b * len + l), static_cast<Eigen::Index>(c)) = x.at(b, c, l);
  return m;
}

void add_bias_grad(const Tensor& gy, Tensor& gb) {
  const std::size_t batch = gy.dim(0), ch = gy.dim(1), len = gy.dim(2);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < ch; ++o) {
      const double* row = &gy.at(b, o, 0);
      double acc = 0.0;
      for (std::size_t l = 0; l < len; ++l) acc += row[l];
      gb[o] += acc;
    }
}

}  // namespace

Var conv1d(Var x, Var weight, Var bias, std::size_t stride, std::size_t padding) {
  require_rank("conv1d", "input", x, 3);
  require_rank("conv1d", "weight", weight, 3);
  const std::size_t batch = x.shape()[0], cin = x.shape()[1], lin = x.shape()[2];
  const std::size_t cout = weight.shape()[0], kernel = weight.shape()[2];
  require_dim("conv1d", "input channels", cin, weight.shape()[1]);
  const std::size_t lout = conv1d_output_length(lin, kernel, stride, padding);
  const bool has_bias = bias.valid();
  if (has_bias) {
    require_rank("conv1d", "bias", bias, 1);
    require_dim("conv1d", "bias length", bias.shape()[0], cout);
  }
  const MatR cols = im2col(x.value(), lout, kernel, stride, padding);
  const MatR y = cols * as_matrix(weight.value(), cout, cin * kernel).transpose();  // [B*lout, cout]
  Tensor out({batch, cout, lout});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < cout; ++o) {
      const double shift = has_bias ? bias.value()[o] : 0.0;
      for (std::size_t l = 0; l < lout; ++l)
        out.at(b, o, l) = y(static_cast<Eigen::Index>(b * lout + l), static_cast<Eigen::Index>(o)) + shift;
    }
  const auto xi = x.index(), wi = weight.index(), bi = has_bias ? bias.index() : 0;
  auto fn = [=](Tape& t, std::uint32_t self) {
    const Tensor& gy = t.grad(self);
    const MatR g = channels_last(gy);  // [B*lout, cout]
    if (t.requires_grad(wi)) {
      const MatR cols = im2col(t.value(xi), lout, kernel, stride, padding);
      as_matrix(t.grad_buffer(wi), cout, cin * kernel).noalias() += g.transpose() * cols;
    }
    if (t.requires_grad(xi)) {
      const MatR gcols = g * as_matrix(t.value(wi), cout, cin * kernel);
      col2im_add(gcols, t.grad_buffer(xi), lout, kernel, stride, padding);
    }
    if (has_bias && t.requires_grad(bi)) add_bias_grad(gy, t.grad_buffer(bi));
  };
  if (has_bias) return x.tape().record(std::move(out), {x, weight, bias}, fn, "conv1d");
  return x.tape().record(std::move(out), {x, weight}, fn, "conv1d");
}

Var conv1d_transpose(Var x, Var weight, Var bias, std::size_t stride, std::size_t padding) {
  require_rank("conv1d_transpose", "input", x, 3);
  require_rank("conv1d_transpose", "weight", weight, 3);
  const std::size_t batch = x.shape()[0], cin = x.shape()[1], lin = x.shape()[2];
  const std::size_t cout = weight.shape()[1], kernel = weight.shape()[2];
  require_dim("conv1d_transpose", "input channels", cin, weight.shape()[0]);
  const std::size_t lout = conv1d_transpose_output_length(lin, kernel, stride, padding);
  const bool has_bias = bias.valid();
  if (has_bias) {
    require_rank("conv1d_transpose", "bias", bias, 1);
    require_dim("conv1d_transpose", "bias length", bias.shape()[0], cout);
  }
  // Each input position contributes a [cout, kernel] patch: z = x^T W, then
  // patches are overlap-added at stride spacing.
  const MatR z = channels_last(x.value()) * as_matrix(weight.value(), cin, cout * kernel);  // [B*lin, cout*K]
  Tensor out({batch, cout, lout});
  const long long pad = static_cast<long long>(padding);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < lin; ++i) {
      const double* patch = z.data() + (b * lin + i) * cout * kernel;
      const long long base = static_cast<long long>(i * stride) - pad;
      for (std::size_t o = 0; o < cout; ++o) {
        double* yrow = &out.at(b, o, 0);
        for (std::size_t k = 0; k < kernel; ++k) {
          const long long pos = base + static_cast<long long>(k);
          if (pos >= 0 && pos < static_cast<long long>(lout)) yrow[pos] += patch[o * kernel + k];
        }
      }
    }
    if (has_bias) {
      for (std::size_t o = 0; o < cout; ++o) {
        double* yrow = &out.at(b, o, 0);
        for (std::size_t l = 0; l < lout; ++l) yrow[l] += bias.value()[o];
      }
    }
  }
  const auto xi = x.index(), wi = weight.index(), bi = has_bias ? bias.index() : 0;
  auto fn = [=](Tape& t, std::uint32_t self) {
    const Tensor& gy = t.grad(self);
    MatR gz = MatR::Zero(static_cast<Eigen::Index>(batch * lin), static_cast<Eigen::Index>(cout * kernel));
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < lin; ++i) {
        double* patch = gz.data() + (b * lin + i) * cout * kernel;
        const long long base = static_cast<long long>(i * stride) - pad;
        for (std::size_t o = 0; o < cout; ++o) {
          const double* grow = &gy.at(b, o, 0);
          for (std::size_t k = 0; k < kernel; ++k) {
            const long long pos = base + static_cast<long long>(k);
            if (pos >= 0 && pos < static_cast<long long>(lout)) patch[o * kernel + k] = grow[pos];
          }
        }
      }
    }
    if (t.requires_grad(wi)) {
      as_matrix(t.grad_buffer(wi), cin, cout * kernel).noalias() += channels_last(t.value(xi)).transpose() * gz;
    }
    if (t.requires_grad(xi)) {
      const MatR gx = gz * as_matrix(t.value(wi), cin, cout * kernel).transpose();  // [B*lin, cin]
      Tensor& gxt = t.grad_buffer(xi);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t i = 0; i < lin; ++i)
            gxt.at(b, c, i) += gx(static_cast<Eigen::Index>(b * lin + i), static_cast<Eigen::Index>(c));
    }
    if (has_bias && t.requires_grad(bi)) add_bias_grad(gy, t.grad_buffer(bi));
  };
  if (has_bias) return x.tape().record(std::move(out), {x, weight, bias}, fn, "conv1d_transpose");
  return x.tape().record(std::move(out), {x, weight}, fn, "conv1d_transpose");
}

namespace {

/// Forward activations of one LSTM layer, stored time-major.
struct LstmCache {
  std::size_t batch = 0, steps = 0, in = 0, hidden = 0;
  Buffer x_tm;   // [T*B, D]
  Buffer gates;  // [T*B, 4H] activated (i, f, g, o)
  Buffer cell;   // [T*B, H]
  Buffer hid;    // [T*B, H]
};

}  // namespace

Var lstm_layer(Var x, Var w_ih, Var w_hh, Var bias) {
  require_rank("lstm", "input", x, 3);
  require_rank("lstm", "w_ih", w_ih, 2);
  require_rank("lstm", "w_hh", w_hh, 2);
  require_rank("lstm", "bias", bias, 1);
  const std::size_t B = x.shape()[0], T = x.shape()[1], D = x.shape()[2];
  const std::size_t H4 = w_ih.shape()[0];
  if (H4 % 4 != 0) throw ShapeError("lstm: w_ih rows " + std::to_string(H4) + " not divisible by 4");
  const std::size_t H = H4 / 4;
  require_dim("lstm", "w_ih columns", w_ih.shape()[1], D);
  require_dim("lstm", "w_hh rows", w_hh.shape()[0], H4);
  require_dim("lstm", "w_hh columns", w_hh.shape()[1], H);
  require_dim("lstm", "bias length", bias.shape()[0], H4);

  auto cache = std::make_shared<LstmCache>();
  cache->batch = B;
  cache->steps = T;
  cache->in = D;
  cache->hidden = H;
  cache->x_tm.resize(T * B * D);
  cache->gates.resize(T * B * H4);
  cache->cell.resize(T * B * H);
  cache->hid.resize(T * B * H);

  const Tensor& xv = x.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t)
      std::copy_n(&xv.at(b, t, 0), D, &cache->x_tm[(t * B + b) * D]);

  const auto TB = static_cast<Eigen::Index>(T * B);
  const auto eB = static_cast<Eigen::Index>(B), eD = static_cast<Eigen::Index>(D),
             eH = static_cast<Eigen::Index>(H), eH4 = static_cast<Eigen::Index>(H4);
  CMapR wih(w_ih.value().data(), eH4, eD);
  CMapR whh(w_hh.value().data(), eH4, eH);
  CVec bv(bias.value().data(), eH4);
  MapR pre(cache->gates.data(), TB, eH4);
  pre.noalias() = CMapR(cache->x_tm.data(), TB, eD) * wih.transpose();
  pre.rowwise() += bv.transpose();

  for (std::size_t t = 0; t < T; ++t) {
    MapR g(&cache->gates[t * B * H4], eB, eH4);
    if (t > 0) g.noalias() += CMapR(&cache->hid[(t - 1) * B * H], eB, eH) * whh.transpose();
    for (std::size_t b = 0; b < B; ++b) {
      double* row = &cache->gates[(t * B + b) * H4];
      double* c = &cache->cell[(t * B + b) * H];
      double* h = &cache->hid[(t * B + b) * H];
      const double* c_prev = t > 0 ? &cache->cell[((t - 1) * B + b) * H] : nullptr;
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = sigmoid(row[j]);
        const double fg = sigmoid(row[H + j]);
        const double gg = std::tanh(row[2 * H + j]);
        const double og = sigmoid(row[3 * H + j]);
        row[j] = ig;
        row[H + j] = fg;
        row[2 * H + j] = gg;
        row[3 * H + j] = og;
        c[j] = (c_prev ? fg * c_prev[j] : 0.0) + ig * gg;
        h[j] = og * std::tanh(c[j]);
      }
    }
  }

  Tensor out({B, T, H});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) std::copy_n(&cache->hid[(t * B + b) * H], H, &out.at(b, t, 0));

  const auto xi = x.index(), wii = w_ih.index(), whi = w_hh.index(), bi = bias.index();
  auto fn = [cache, xi, wii, whi, bi](Tape& tp, std::uint32_t self) {
    const std::size_t B = cache->batch, T = cache->steps, D = cache->in, H = cache->hidden, H4 = 4 * H;
    const auto eB = static_cast<Eigen::Index>(B), eD = static_cast<Eigen::Index>(D),
               eH = static_cast<Eigen::Index>(H), eH4 = static_cast<Eigen::Index>(H4);
    const Tensor& gy = tp.grad(self);
    CMapR whh(tp.value(whi).data(), eH4, eH);
    Buffer dpre(T * B * H4);
    Buffer dh_next(B * H, 0.0), dc_next(B * H, 0.0);
    for (std::size_t t = T; t-- > 0;) {
      for (std::size_t b = 0; b < B; ++b) {
        const double* a = &cache->gates[(t * B + b) * H4];
        const double* c = &cache->cell[(t * B + b) * H];
        const double* c_prev = t > 0 ? &cache->cell[((t - 1) * B + b) * H] : nullptr;
        double* d = &dpre[(t * B + b) * H4];
        for (std::size_t j = 0; j < H; ++j) {
          const double ig = a[j], fg = a[H + j], gg = a[2 * H + j], og = a[3 * H + j];
          const double dh = gy.at(b, t, j) + dh_next[b * H + j];
          const double tc = std::tanh(c[j]);
          const double dc = dh * og * (1.0 - tc * tc) + dc_next[b * H + j];
          const double cp = c_prev ? c_prev[j] : 0.0;
          d[j] = dc * gg * ig * (1.0 - ig);
          d[H + j] = dc * cp * fg * (1.0 - fg);
          d[2 * H + j] = dc * ig * (1.0 - gg * gg);
          d[3 * H + j] = dh * tc * og * (1.0 - og);
          dc_next[b * H + j] = dc * fg;
        }
      }
      MapR dhn(dh_next.data(), eB, eH);
      dhn.noalias() = CMapR(&dpre[t * B * H4], eB, eH4) * whh;
    }
    const auto TB = static_cast<Eigen::Index>(T * B);
    CMapR dP(dpre.data(), TB, eH4);
    if (tp.requires_grad(wii)) {
      as_matrix(tp.grad_buffer(wii), H4, D).noalias() += dP.transpose() * CMapR(cache->x_tm.data(), TB, eD);
    }
    if (tp.requires_grad(whi) && T > 1) {
      const auto rows = static_cast<Eigen::Index>((T - 1) * B);
      as_matrix(tp.grad_buffer(whi), H4, H).noalias() +=
          CMapR(&dpre[B * H4], rows, eH4).transpose() * CMapR(cache->hid.data(), rows, eH);
    }
    if (tp.requires_grad(bi)) {
      Vec(tp.grad_buffer(bi).data(), eH4) += dP.colwise().sum().transpose();
    }
    if (tp.requires_grad(xi)) {
      MatR dx = dP * CMapR(tp.value(wii).data(), eH4, eD);
      Tensor& gx = tp.grad_buffer(xi);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t k = 0; k < D; ++k) gx.at(b, t, k) += dx(static_cast<Eigen::Index>(t * B + b), k);
    }
  };
  return x.tape().record(std::move(out), {x, w_ih, w_hh, bias}, fn, "lstm");
}

Var swap_last_axes(Var x) {
  require_rank("swap_last_axes", "input", x, 3);
  const std::size_t B = x.shape()[0], M = x.shape()[1], N = x.shape()[2];
  Tensor out({B, N, M});
  const Tensor& xv = x.value();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < N; ++j) out.at(b, j, i) = xv.at(b, i, j);
  const auto xi = x.index();
  return x.tape().record(std::move(out), {x},
                         [xi, B, M, N](Tape& t, std::uint32_t self) {
                           if (!t.requires_grad(xi)) return;
                           const Tensor& gy = t.grad(self);
                           Tensor& gx = t.grad_buffer(xi);
                           for (std::size_t b = 0; b < B; ++b)
                             for (std::size_t i = 0; i < M; ++i)
                               for (std::size_t j = 0; j < N; ++j) gx.at(b, i, j) += gy.at(b, j, i);
                         },
                         "swap_last_axes");
}

Var time_slice(Var x, std::size_t begin, std::size_t end) {
  require_rank("time_slice", "input", x, 3);
  const std::size_t B = x.shape()[0], T = x.shape()[1], D = x.shape()[2];
  if (begin >= end || end > T) {
    throw ShapeError("time_slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for time axis " + std::to_string(T));
  }
  const std::size_t n = end - begin;
  Tensor out({B, n, D});
  for (std::size_t b = 0; b < B; ++b) std::copy_n(&x.value().at(b, begin, 0), n * D, &out.at(b, 0, 0));
  const auto xi = x.index();
  return x.tape().record(std::move(out), {x},
                         [xi, B, n, D, begin](Tape& t, std::uint32_t self) {
                           if (!t.requires_grad(xi)) return;
                           const Tensor& gy = t.grad(self);
                           Tensor& gx = t.grad_buffer(xi);
                           for (std::size_t b = 0; b < B; ++b)
                             for (std::size_t i = 0; i < n * D; ++i) (&gx.at(b, begin, 0))[i] += (&gy.at(b, 0, 0))[i];
                         },
                         "time_slice");
}

Var binary_cross_entropy(Var prob, const Tensor& target) {
  if (prob.shape() != target.shape()) {
    throw ShapeError("binary_cross_entropy: prediction " + dims(prob.shape()) + " vs target " + dims(target.shape()));
  }
  constexpr double kEps = 1e-12;
  const Tensor& p = prob.value();
  const double n = static_cast<double>(p.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kEps, 1.0 - kEps);
    loss -= target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q);
  }
  const auto pi = prob.index();
  return prob.tape().record(Tensor(Shape{}, std::vector<double>{loss / n}), {prob},
                            [pi, target, n, kEps](Tape& t, std::uint32_t self) {
                              if (!t.requires_grad(pi)) return;
                              const double gy = t.grad(self)[0];
                              const Tensor& p = t.value(pi);
                              Tensor& gp = t.grad_buffer(pi);
                              for (std::size_t i = 0; i < p.size(); ++i) {
                                const double q = std::clamp(p[i], kEps, 1.0 - kEps);
                                gp[i] += gy * (-(target[i] / q) + (1.0 - target[i]) / (1.0 - q)) / n;
                              }
                            },
                            "binary_cross_entropy");
}

Var bce_with_logits(Var logits, const Tensor& target) {
  if (logits.shape() != target.shape()) {
    throw ShapeError("bce_with_logits: logits " + dims(logits.shape()) + " vs target " + dims(target.shape()));
  }
  const Tensor& x = logits.value();
  const double n = static_cast<double>(x.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    loss += std::max(x[i], 0.0) - x[i] * target[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const auto li = logits.index();
  return logits.tape().record(Tensor(Shape{}, std::vector<double>{loss / n}), {logits},
                              [li, target, n](Tape& t, std::uint32_t self) {
                                if (!t.requires_grad(li)) return;
                                const double gy = t.grad(self)[0];
                                const Tensor& x = t.value(li);
                                Tensor& gx = t.grad_buffer(li);
                                for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy * (sigmoid(x[i]) - target[i]) / n;
                              },
                              "bce_with_logits");
}

Var mse(Var a, Var b) {
  require_same_shape("mse", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const double n = static_cast<double>(av.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    loss += d * d;
  }
  const auto ai = a.index(), bi = b.index();
  return a.tape().record(Tensor(Shape{}, std::vector<double>{loss / n}), {a, b},
                         [ai, bi, n](Tape& t, std::uint32_t self) {
                           const double gy = t.grad(self)[0];
                           const Tensor& av = t.value(ai);
                           const Tensor& bv = t.value(bi);
                           if (t.requires_grad(ai)) {
                             Tensor& g = t.grad_buffer(ai);
                             for (std::size_t i = 0; i < av.size(); ++i) g[i] += gy * 2.0 * (av[i] - bv[i]) / n;
                           }
                           if (t.requires_grad(bi)) {
                             Tensor& g = t.grad_buffer(bi);
                             for (std::size_t i = 0; i < av.size(); ++i) g[i] -= gy * 2.0 * (av[i] - bv[i]) / n;
                           }
                         },
                         "mse");
}

Var periodic_noise(const Tensor& global, Var freq, Var phase, std::size_t length) {
  if (global.rank() != 2) throw ShapeError("periodic_noise: global noise must be [batch, dims]");
  require_rank("periodic_noise", "frequency", freq, 2);
  require_same_shape("periodic_noise", freq, phase);
  if (length == 0) throw ShapeError("periodic_noise: spatial length must be at least 1");
  const std::size_t B = global.dim(0), G = global.dim(1), P = freq.shape()[1];
  require_dim("periodic_noise", "frequency batch", freq.shape()[0], B);
  Tensor out({B, length, G + P});
  const Tensor& fv = freq.value();
  const Tensor& pv = phase.value();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < length; ++i) {
      double* row = &out.at(b, i, 0);
      std::copy_n(&global.at(b, 0), G, row);
      const double pos = static_cast<double>(i + 1);
      for (std::size_t j = 0; j < P; ++j) row[G + j] = std::sin(pos * fv.at(b, j) + pv.at(b, j));
    }
  }
  const auto fi = freq.index(), pi = phase.index();
  return freq.tape().record(std::move(out), {freq, phase},
                            [fi, pi, B, G, P, length](Tape& t, std::uint32_t self) {
                              const Tensor& gy = t.grad(self);
                              const Tensor& fv = t.value(fi);
                              const Tensor& pv = t.value(pi);
                              const bool gf_on = t.requires_grad(fi), gp_on = t.requires_grad(pi);
                              Tensor* gf = gf_on ? &t.grad_buffer(fi) : nullptr;
                              Tensor* gp = gp_on ? &t.grad_buffer(pi) : nullptr;
                              for (std::size_t b = 0; b < B; ++b) {
                                for (std::size_t i = 0; i < length; ++i) {
                                  const double pos = static_cast<double>(i + 1);
                                  for (std::size_t j = 0; j < P; ++j) {
                                    const double d =
                                        gy.at(b, i, G + j) * std::cos(pos * fv.at(b, j) + pv.at(b, j));
                                    if (gf_on) gf->at(b, j) += d * pos;
                                    if (gp_on) gp->at(b, j) += d;
                                  }
                                }
                              }
                            },
                            "periodic_noise");
}

}  // namespace danmaku::ops
