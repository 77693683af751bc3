#include "lcr/numerics/ops.hpp"

#include <algorithm>
#include <cstring>

#include "lcr/errors.hpp"

namespace lcr::numerics {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                         to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  double* d = dst.raw();
  const double* s = src.raw();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

// Eight and four doubles as GCC/Clang vector-extension types.
typedef double v8d __attribute__((vector_size(64)));
typedef double v4d __attribute__((vector_size(32)));

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, v8d v) { std::memcpy(p, &v, sizeof v); }

inline v4d load4(const double* p) {
  v4d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, v4d v) { std::memcpy(p, &v, sizeof v); }

// c[m x n] += a[m x k] * b[k x n], all row-major with leading dimensions. Every
// element of c receives its k products in increasing-k order, so the result equals
// the naive triple loop bit for bit.
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  constexpr std::size_t mb = 4, nb = 16;
  std::size_t i = 0;
  for (; i + mb <= m; i += mb) {
    const double* a0 = a + i * lda;
    std::size_t j = 0;
    for (; j + nb <= n; j += nb) {
      v8d acc[mb][2];
      for (std::size_t ii = 0; ii < mb; ++ii) {
        acc[ii][0] = load8(c + (i + ii) * ldc + j);
        acc[ii][1] = load8(c + (i + ii) * ldc + j + 8);
      }
      for (std::size_t p = 0; p < k; ++p) {
        const v8d b0 = load8(b + p * ldb + j);
        const v8d b1 = load8(b + p * ldb + j + 8);
        for (std::size_t ii = 0; ii < mb; ++ii) {
          const double av = a0[ii * lda + p];
          acc[ii][0] += av * b0;
          acc[ii][1] += av * b1;
        }
      }
      for (std::size_t ii = 0; ii < mb; ++ii) {
        store8(c + (i + ii) * ldc + j, acc[ii][0]);
        store8(c + (i + ii) * ldc + j + 8, acc[ii][1]);
      }
    }
    for (; j + 4 <= n; j += 4) {
      v4d acc[mb];
      for (std::size_t ii = 0; ii < mb; ++ii) acc[ii] = load4(c + (i + ii) * ldc + j);
      for (std::size_t p = 0; p < k; ++p) {
        const v4d b0 = load4(b + p * ldb + j);
        for (std::size_t ii = 0; ii < mb; ++ii) acc[ii] += a0[ii * lda + p] * b0;
      }
      for (std::size_t ii = 0; ii < mb; ++ii) store4(c + (i + ii) * ldc + j, acc[ii]);
    }
    for (; j < n; ++j) {
      for (std::size_t ii = 0; ii < mb; ++ii) {
        double s = c[(i + ii) * ldc + j];
        for (std::size_t p = 0; p < k; ++p) s += a0[ii * lda + p] * b[p * ldb + j];
        c[(i + ii) * ldc + j] = s;
      }
    }
  }
  for (; i < m; ++i) {
    double* ci = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

// Geometry shared by the convolution forward and backward passes.
struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t filters, k;
  std::size_t out_h, out_w;
  std::size_t patch() const { return channels * k * k; }
  std::size_t positions() const { return out_h * out_w; }
  std::size_t chunk() const { return std::clamp<std::size_t>(1024 / positions(), 1, batch); }
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& kernel) {
  const Shape out = kernels::conv2d_output_shape(x.shape(), kernel.shape());
  return ConvGeometry{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernel.dim(0), kernel.dim(2), out[2], out[3]};
}

// Unfolds `count` samples starting at `first` into col[patch row][sample * positions + p].
void im2col(const ConvGeometry& g, const double* x, std::size_t first, std::size_t count, double* col) {
  const std::size_t cols = count * g.positions();
  for (std::size_t bl = 0; bl < count; ++bl) {
    const double* sample = x + (first + bl) * g.channels * g.height * g.width;
    for (std::size_t c = 0; c < g.channels; ++c) {
      for (std::size_t ki = 0; ki < g.k; ++ki) {
        for (std::size_t kj = 0; kj < g.k; ++kj) {
          const std::size_t row = (c * g.k + ki) * g.k + kj;
          double* dst = col + row * cols + bl * g.positions();
          for (std::size_t i = 0; i < g.out_h; ++i) {
            const double* src = sample + (c * g.height + i + ki) * g.width + kj;
            std::memcpy(dst + i * g.out_w, src, g.out_w * sizeof(double));
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* col, std::size_t first, std::size_t count, double* dx) {
  const std::size_t cols = count * g.positions();
  for (std::size_t bl = 0; bl < count; ++bl) {
    double* sample = dx + (first + bl) * g.channels * g.height * g.width;
    for (std::size_t c = 0; c < g.channels; ++c) {
      for (std::size_t ki = 0; ki < g.k; ++ki) {
        for (std::size_t kj = 0; kj < g.k; ++kj) {
          const std::size_t row = (c * g.k + ki) * g.k + kj;
          const double* src = col + row * cols + bl * g.positions();
          for (std::size_t i = 0; i < g.out_h; ++i) {
            double* dst = sample + (c * g.height + i + ki) * g.width + kj;
            for (std::size_t j = 0; j < g.out_w; ++j) dst[j] += src[i * g.out_w + j];
          }
        }
      }
    }
  }
}

}  // namespace

namespace kernels {

void dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias, Tensor& out) {
  require_rank(x, 2, "dense", "input");
  require_rank(weights, 2, "dense", "weights");
  require_rank(bias, 1, "dense", "bias");
  const std::size_t batch = x.dim(0), in = x.dim(1), outs = weights.dim(1);
  if (weights.dim(0) != in || bias.dim(0) != outs) {
    throw DimensionError("dense: input " + to_string(x.shape()) + ", weights " + to_string(weights.shape()) +
                         ", bias " + to_string(bias.shape()) + " are inconsistent");
  }
  if (out.shape() != Shape{batch, outs}) out = Tensor({batch, outs});
  for (std::size_t b = 0; b < batch; ++b) std::memcpy(out.raw() + b * outs, bias.raw(), outs * sizeof(double));
  gemm_accumulate(batch, outs, in, x.raw(), in, weights.raw(), outs, out.raw(), outs);
}

Shape conv2d_output_shape(const Shape& x, const Shape& kernel) {
  if (x.size() != 4) throw DimensionError("conv2d: input must be [B,C,H,W], got " + to_string(x));
  if (kernel.size() != 4 || kernel[2] != kernel[3]) {
    throw DimensionError("conv2d: kernel must be [F,C,k,k], got " + to_string(kernel));
  }
  if (kernel[1] != x[1]) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(kernel[1]) + " channels, input has " +
                         std::to_string(x[1]));
  }
  const std::size_t k = kernel[2];
  if (k > x[2] || k > x[3]) {
    throw DimensionError("conv2d: kernel " + std::to_string(k) + "x" + std::to_string(k) + " larger than input " +
                         to_string(x));
  }
  return {x[0], kernel[0], x[2] - k + 1, x[3] - k + 1};
}

void conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias, Tensor& out) {
  const Shape out_shape = conv2d_output_shape(x.shape(), kernel.shape());
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0)) {
    throw DimensionError("conv2d: bias " + to_string(bias.shape()) + " does not match " +
                         std::to_string(kernel.dim(0)) + " filters");
  }
  if (out.shape() != out_shape) out = Tensor(out_shape);
  const ConvGeometry g = conv_geometry(x, kernel);
  const std::size_t chunk = g.chunk(), patch = g.patch(), positions = g.positions();
  std::vector<double> col(patch * chunk * positions);
  std::vector<double> acc(g.filters * chunk * positions);
  for (std::size_t first = 0; first < g.batch; first += chunk) {
    const std::size_t count = std::min(chunk, g.batch - first);
    const std::size_t cols = count * positions;
    im2col(g, x.raw(), first, count, col.data());
    for (std::size_t f = 0; f < g.filters; ++f) std::fill_n(acc.data() + f * cols, cols, bias[f]);
    gemm_accumulate(g.filters, cols, patch, kernel.raw(), patch, col.data(), cols, acc.data(), cols);
    for (std::size_t f = 0; f < g.filters; ++f) {
      for (std::size_t bl = 0; bl < count; ++bl) {
        std::memcpy(out.raw() + ((first + bl) * g.filters + f) * positions, acc.data() + f * cols + bl * positions,
                    positions * sizeof(double));
      }
    }
  }
}

Shape maxpool2d_output_shape(const Shape& x) {
  if (x.size() != 4) throw DimensionError("maxpool2d: input must be [B,C,H,W], got " + to_string(x));
  if (x[2] < 2 || x[3] < 2) throw DimensionError("maxpool2d: spatial size must be at least 2x2, got " + to_string(x));
  return {x[0], x[1], x[2] / 2, x[3] / 2};
}

void maxpool2d_forward(const Tensor& x, Tensor& out, std::vector<std::size_t>* argmax) {
  const Shape out_shape = maxpool2d_output_shape(x.shape());
  if (out.shape() != out_shape) out = Tensor(out_shape);
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = out_shape[2], ow = out_shape[3];
  if (argmax) argmax->resize(out.size());
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < planes; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++o) {
        std::size_t best = base + (2 * i) * w + 2 * j;
        for (std::size_t di = 0; di < 2; ++di) {
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const std::size_t idx = base + (2 * i + di) * w + 2 * j + dj;
            if (x[idx] > x[best]) best = idx;
          }
        }
        out[o] = x[best];
        if (argmax) (*argmax)[o] = best;
      }
    }
  }
}

}  // namespace kernels

Var dense(Var x, Var weights, Var bias) {
  Graph& graph = *x.graph();
  Tensor out;
  kernels::dense_forward(x.value(), weights.value(), bias.value(), out);
  return graph.record(std::move(out), {x, weights, bias}, [](const BackwardContext& ctx) {
    const Tensor& xv = *ctx.inputs[0];
    const Tensor& wv = *ctx.inputs[1];
    const Tensor& g = ctx.output_grad;
    const std::size_t batch = xv.dim(0), in = xv.dim(1), outs = wv.dim(1);
    if (Tensor* dw = ctx.input_grads[1]) {
      std::vector<double> xt(in * batch);
      transpose(batch, in, xv.raw(), xt.data());
      gemm_accumulate(in, outs, batch, xt.data(), batch, g.raw(), outs, dw->raw(), outs);
    }
    if (Tensor* db = ctx.input_grads[2]) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < outs; ++o) (*db)[o] += g[b * outs + o];
      }
    }
    if (Tensor* dx = ctx.input_grads[0]) {
      std::vector<double> wt(outs * in);
      transpose(in, outs, wv.raw(), wt.data());
      gemm_accumulate(batch, in, outs, g.raw(), outs, wt.data(), in, dx->raw(), in);
    }
  });
}

Var conv2d(Var x, Var kernel, Var bias) {
  Graph& graph = *x.graph();
  Tensor out;
  kernels::conv2d_forward(x.value(), kernel.value(), bias.value(), out);
  return graph.record(std::move(out), {x, kernel, bias}, [](const BackwardContext& ctx) {
    const Tensor& xv = *ctx.inputs[0];
    const Tensor& kv = *ctx.inputs[1];
    Tensor* dx = ctx.input_grads[0];
    Tensor* dk = ctx.input_grads[1];
    Tensor* db = ctx.input_grads[2];
    const ConvGeometry g = conv_geometry(xv, kv);
    const std::size_t chunk = g.chunk(), patch = g.patch(), positions = g.positions();
    const double* grad = ctx.output_grad.raw();

    if (db) {
      for (std::size_t b = 0; b < g.batch; ++b) {
        for (std::size_t f = 0; f < g.filters; ++f) {
          const double* src = grad + (b * g.filters + f) * positions;
          double s = 0.0;
          for (std::size_t p = 0; p < positions; ++p) s += src[p];
          (*db)[f] += s;
        }
      }
    }
    if (!dx && !dk) return;

    std::vector<double> col(patch * chunk * positions);
    std::vector<double> colt(dk ? patch * chunk * positions : 0);
    std::vector<double> gch(g.filters * chunk * positions);
    std::vector<double> dcol(dx ? patch * chunk * positions : 0);
    std::vector<double> kt;
    if (dx) {
      kt.resize(patch * g.filters);
      transpose(g.filters, patch, kv.raw(), kt.data());
    }
    for (std::size_t first = 0; first < g.batch; first += chunk) {
      const std::size_t count = std::min(chunk, g.batch - first);
      const std::size_t cols = count * positions;
      for (std::size_t f = 0; f < g.filters; ++f) {
        for (std::size_t bl = 0; bl < count; ++bl) {
          std::memcpy(gch.data() + f * cols + bl * positions, grad + ((first + bl) * g.filters + f) * positions,
                      positions * sizeof(double));
        }
      }
      if (dk) {
        im2col(g, xv.raw(), first, count, col.data());
        transpose(patch, cols, col.data(), colt.data());
        gemm_accumulate(g.filters, patch, cols, gch.data(), cols, colt.data(), patch, dk->raw(), patch);
      }
      if (dx) {
        std::fill_n(dcol.data(), patch * cols, 0.0);
        gemm_accumulate(patch, cols, g.filters, kt.data(), g.filters, gch.data(), cols, dcol.data(), cols);
        col2im_add(g, dcol.data(), first, count, dx->raw());
      }
    }
  });
}

Var maxpool2d(Var x) {
  Graph& graph = *x.graph();
  Tensor out;
  std::vector<std::size_t> argmax;
  kernels::maxpool2d_forward(x.value(), out, graph.recording() ? &argmax : nullptr);
  return graph.record(std::move(out), {x}, [argmax = std::move(argmax)](const BackwardContext& ctx) {
    Tensor* dx = ctx.input_grads[0];
    if (!dx) return;
    for (std::size_t o = 0; o < argmax.size(); ++o) (*dx)[argmax[o]] += ctx.output_grad[o];
  });
}

Var relu(Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return x.graph()->record(std::move(out), {x}, [](const BackwardContext& ctx) {
    Tensor* dx = ctx.input_grads[0];
    if (!dx) return;
    const Tensor& xv = *ctx.inputs[0];
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > 0.0) (*dx)[i] += ctx.output_grad[i];
    }
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.graph()->record(std::move(out), {x}, [](const BackwardContext& ctx) {
    if (Tensor* dx = ctx.input_grads[0]) {
      for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += ctx.output_grad[i];
    }
  });
}

Var flatten(Var x) {
  const Shape& s = x.shape();
  return reshape(x, {s[0], x.value().size() / s[0]});
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank(av, 2, "matmul", "lhs");
  require_rank(bv, 2, "matmul", "rhs");
  if (av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul: " + to_string(av.shape()) + " x " + to_string(bv.shape()));
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += s * bv[p * n + j];
    }
  }
  return a.graph()->record(std::move(out), {a, b}, [m, k, n](const BackwardContext& ctx) {
    const Tensor& av = *ctx.inputs[0];
    const Tensor& bv = *ctx.inputs[1];
    const Tensor& g = ctx.output_grad;
    if (Tensor* da = ctx.input_grads[0]) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * bv[p * n + j];
          (*da)[i * k + p] += s;
        }
    }
    if (Tensor* db = ctx.input_grads[1]) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double s = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*db)[p * n + j] += s * g[i * n + j];
        }
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  return a.graph()->record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    for (Tensor* d : ctx.input_grads)
      if (d) accumulate(*d, ctx.output_grad);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.graph()->record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    if (Tensor* da = ctx.input_grads[0]) accumulate(*da, ctx.output_grad);
    if (Tensor* db = ctx.input_grads[1]) {
      for (std::size_t i = 0; i < db->size(); ++i) (*db)[i] -= ctx.output_grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.graph()->record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    const Tensor& g = ctx.output_grad;
    if (Tensor* da = ctx.input_grads[0])
      for (std::size_t i = 0; i < da->size(); ++i) (*da)[i] += g[i] * (*ctx.inputs[1])[i];
    if (Tensor* db = ctx.input_grads[1])
      for (std::size_t i = 0; i < db->size(); ++i) (*db)[i] += g[i] * (*ctx.inputs[0])[i];
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  return x.graph()->record(std::move(out), {x}, [factor](const BackwardContext& ctx) {
    if (Tensor* dx = ctx.input_grads[0])
      for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += factor * ctx.output_grad[i];
  });
}

Var square(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= v;
  return x.graph()->record(std::move(out), {x}, [](const BackwardContext& ctx) {
    if (Tensor* dx = ctx.input_grads[0])
      for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += 2.0 * (*ctx.inputs[0])[i] * ctx.output_grad[i];
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.graph()->record(Tensor::scalar(s), {x}, [](const BackwardContext& ctx) {
    if (Tensor* dx = ctx.input_grads[0])
      for (double& v : dx->data()) v += ctx.output_grad[0];
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.graph()->record(Tensor::scalar(s / n), {x}, [n](const BackwardContext& ctx) {
    if (Tensor* dx = ctx.input_grads[0])
      for (double& v : dx->data()) v += ctx.output_grad[0] / n;
  });
}

Var select_columns(Var q, std::span<const int> columns) {
  const Tensor& qv = q.value();
  require_rank(qv, 2, "select_columns", "input");
  const std::size_t batch = qv.dim(0), width = qv.dim(1);
  if (columns.size() != batch) {
    throw DimensionError("select_columns: " + std::to_string(columns.size()) + " indices for batch of " +
                         std::to_string(batch));
  }
  std::vector<std::size_t> flat(batch);
  Tensor out({batch});
  for (std::size_t b = 0; b < batch; ++b) {
    if (columns[b] < 0 || static_cast<std::size_t>(columns[b]) >= width) {
      throw DimensionError("select_columns: index " + std::to_string(columns[b]) + " out of range");
    }
    flat[b] = b * width + static_cast<std::size_t>(columns[b]);
    out[b] = qv[flat[b]];
  }
  return q.graph()->record(std::move(out), {q}, [flat = std::move(flat)](const BackwardContext& ctx) {
    if (Tensor* dq = ctx.input_grads[0])
      for (std::size_t b = 0; b < flat.size(); ++b) (*dq)[flat[b]] += ctx.output_grad[b];
  });
}

}  // namespace lcr::numerics
