#include "tcft/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "tcft/errors.hpp"
#include "tcft/rng.hpp"

namespace tcft {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;

Map view(std::vector<double>& v, std::size_t r, std::size_t c) {
  return Map(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

detail::Node& in(detail::Node& n, std::size_t i) { return *n.inputs[i]; }

void require_matrix(const Tensor& t, const char* what) {
  if (t.dim() != 2) {
    throw DimensionError(std::string(what) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

enum class Broadcast { none, left_scalar, right_scalar };

Broadcast check_binary(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (b.size() == 1) return Broadcast::right_scalar;
  if (a.size() == 1) return Broadcast::left_scalar;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

// Shared machinery for elementwise binary ops. `f` computes the value, `da`/`db`
// the local partial derivatives at (x, y).
template <class F, class DA, class DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f, DA da, DB db) {
  const auto mode = check_binary(a, b, op);
  const Shape shape = mode == Broadcast::left_scalar ? b.shape() : a.shape();
  const std::size_t n = shape_size(shape);
  const auto av = a.values();
  const auto bv = b.values();
  auto ai = [&, mode](std::size_t i) { return mode == Broadcast::left_scalar ? av[0] : av[i]; };
  auto bi = [&, mode](std::size_t i) { return mode == Broadcast::right_scalar ? bv[0] : bv[i]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(ai(i), bi(i));
  return Tensor::make_result(shape, std::move(out), {a, b}, op, [mode, da, db](detail::Node& self) {
    auto& A = in(self, 0);
    auto& B = in(self, 1);
    const std::size_t n = self.value.size();
    auto x = [&](std::size_t i) { return mode == Broadcast::left_scalar ? A.value[0] : A.value[i]; };
    auto y = [&](std::size_t i) { return mode == Broadcast::right_scalar ? B.value[0] : B.value[i]; };
    if (A.requires_grad) {
      auto& g = A.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        g[mode == Broadcast::left_scalar ? 0 : i] += self.grad[i] * da(x(i), y(i));
      }
    }
    if (B.requires_grad) {
      auto& g = B.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        g[mode == Broadcast::right_scalar ? 0 : i] += self.grad[i] * db(x(i), y(i));
      }
    }
  });
}

// Elementwise unary op whose derivative is expressed through input x and output y.
template <class F, class D>
Tensor unary(const Tensor& x, const char* op, F f, D d) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return Tensor::make_result(x.shape(), std::move(out), {x}, op, [d](detail::Node& self) {
    auto& X = in(self, 0);
    auto& g = X.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * d(X.value[i], self.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n);
  view(out, m, n).noalias() = view(a.node()->value, m, k) * view(b.node()->value, k, n);
  return Tensor::make_result({m, n}, std::move(out), {a, b}, "matmul",
                             [m, k, n](detail::Node& self) {
    auto& A = in(self, 0);
    auto& B = in(self, 1);
    const auto G = view(self.grad, m, n);
    if (A.requires_grad) {
      view(A.grad_buffer(), m, k).noalias() += G * view(B.value, k, n).transpose();
    }
    if (B.requires_grad) {
      view(B.grad_buffer(), k, n).noalias() += view(A.value, m, k).transpose() * G;
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  view(out, n, m) = view(a.node()->value, m, n).transpose();
  return Tensor::make_result({n, m}, std::move(out), {a}, "transpose", [m, n](detail::Node& self) {
    view(in(self, 0).grad_buffer(), m, n) += view(self.grad, n, m).transpose();
  });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(x, "affine");
  require_matrix(weight, "affine");
  const std::size_t m = x.rows(), k = x.cols(), n = weight.cols();
  if (weight.rows() != k) {
    throw DimensionError("affine: input " + shape_string(x.shape()) + " does not match weight " +
                         shape_string(weight.shape()));
  }
  if (bias.size() != n) {
    throw DimensionError("affine: bias " + shape_string(bias.shape()) + " does not match " +
                         std::to_string(n) + " outputs");
  }
  std::vector<double> out(m * n);
  auto Y = view(out, m, n);
  Y.noalias() = view(x.node()->value, m, k) * view(weight.node()->value, k, n);
  Y.rowwise() += view(bias.node()->value, 1, n).row(0);
  return Tensor::make_result({m, n}, std::move(out), {x, weight, bias}, "affine",
                             [m, k, n](detail::Node& self) {
    auto& X = in(self, 0);
    auto& W = in(self, 1);
    auto& B = in(self, 2);
    const auto G = view(self.grad, m, n);
    if (X.requires_grad) view(X.grad_buffer(), m, k).noalias() += G * view(W.value, k, n).transpose();
    if (W.requires_grad) view(W.grad_buffer(), k, n).noalias() += view(X.value, m, k).transpose() * G;
    if (B.requires_grad) view(B.grad_buffer(), 1, n) += G.colwise().sum();
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(a, b, "add", [](double x, double y) { return x + y; },
                [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(a, b, "sub", [](double x, double y) { return x - y; },
                [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(a, b, "mul", [](double x, double y) { return x * y; },
                [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, "scale", [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid",
               [](double v) {
                 if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
                 const double e = std::exp(v);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, "tanh", [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& x) {
  // Written so NaN passes through rather than being clamped to 0.
  return unary(x, "relu", [](double v) { return v < 0 ? 0.0 : v; },
               [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor elu(const Tensor& x) {
  return unary(x, "elu", [](double v) { return v > 0 ? v : std::expm1(v); },
               [](double v, double y) { return v > 0 ? 1.0 : y + 1.0; });
}

Tensor sum(const Tensor& x) {
  const auto xv = x.values();
  double s = 0.0;
  for (double v : xv) s += v;
  return Tensor::make_result({1}, {s}, {x}, "sum", [](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto& shape = x.shape();
  if (axis >= shape.size()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) {
      const std::size_t base = o * n * inner + j;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, xv[base + i * inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(xv[base + i * inner] - mx);
        out[base + i * inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < n; ++i) out[base + i * inner] /= z;
    }
  }
  return Tensor::make_result(shape, std::move(out), {x}, "softmax",
                             [outer, inner, n](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    const auto& y = self.value;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t j = 0; j < inner; ++j) {
        const std::size_t base = o * n * inner + j;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += self.grad[base + i * inner] * y[base + i * inner];
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t p = base + i * inner;
          g[p] += y[p] * (self.grad[p] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double epsilon) {
  if (x.dim() == 0) throw DimensionError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gain.size() != d || bias.size() != d) {
    throw DimensionError("layer_norm: feature size " + std::to_string(d) + " but gain " +
                         shape_string(gain.shape()) + ", bias " + shape_string(bias.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> out(xv.size());
  std::vector<double> x_hat(xv.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t i = 0; i < d; ++i) mu += row[i];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (row[i] - mu) * (row[i] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (row[i] - mu) * inv_std[r];
      x_hat[r * d + i] = h;
      out[r * d + i] = gv[i] * h + bv[i];
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), {x, gain, bias}, "layer_norm",
                             [rows, d, x_hat = std::move(x_hat),
                              inv_std = std::move(inv_std)](detail::Node& self) {
    auto& X = in(self, 0);
    auto& G = in(self, 1);
    auto& B = in(self, 2);
    const auto& dy = self.grad;
    if (G.requires_grad) {
      auto& gg = G.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < d; ++i) gg[i] += dy[r * d + i] * x_hat[r * d + i];
    }
    if (B.requires_grad) {
      auto& gb = B.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < d; ++i) gb[i] += dy[r * d + i];
    }
    if (X.requires_grad) {
      auto& gx = X.grad_buffer();
      const double inv_d = 1.0 / static_cast<double>(d);
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_g = 0.0, mean_gh = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double gh = dy[r * d + i] * G.value[i];
          mean_g += gh;
          mean_gh += gh * x_hat[r * d + i];
        }
        mean_g *= inv_d;
        mean_gh *= inv_d;
        for (std::size_t i = 0; i < d; ++i) {
          const double gh = dy[r * d + i] * G.value[i];
          gx[r * d + i] += inv_std[r] * (gh - mean_g - x_hat[r * d + i] * mean_gh);
        }
      }
    }
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::ptrdiff_t> index) {
  require_matrix(x, "gather_rows");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<std::ptrdiff_t> idx(index.begin(), index.end());
  std::vector<double> out(idx.size() * n, 0.0);
  const auto xv = x.values();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0) continue;
    if (static_cast<std::size_t>(idx[r]) >= m) {
      throw DimensionError("gather_rows: row " + std::to_string(idx[r]) + " out of range for " +
                           shape_string(x.shape()));
    }
    std::copy_n(xv.data() + idx[r] * n, n, out.data() + r * n);
  }
  const std::size_t rows = idx.size();  // idx is moved into the closure below
  return Tensor::make_result({rows, n}, std::move(out), {x}, "gather_rows",
                             [n, idx = std::move(idx)](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] < 0) continue;
      double* dst = g.data() + idx[r] * n;
      const double* src = self.grad.data() + r * n;
      for (std::size_t c = 0; c < n; ++c) dst[c] += src[c];
    }
  });
}

Tensor take(const Tensor& x, std::span<const std::size_t> index, Shape shape) {
  if (shape_size(shape) != index.size()) {
    throw DimensionError("take: " + std::to_string(index.size()) + " indices for shape " +
                         shape_string(shape));
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const auto xv = x.values();
  std::vector<double> out(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] >= xv.size()) throw DimensionError("take: index out of range");
    out[j] = xv[idx[j]];
  }
  return Tensor::make_result(std::move(shape), std::move(out), {x}, "take",
                             [idx = std::move(idx)](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    for (std::size_t j = 0; j < idx.size(); ++j) g[idx[j]] += self.grad[j];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row counts differ (" + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()) + ")");
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(m * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pv = parts[k].values();
    for (std::size_t r = 0; r < m; ++r)
      std::copy_n(pv.data() + r * widths[k], widths[k], out.data() + r * total + offset);
    offset += widths[k];
  }
  return Tensor::make_result({m, total}, std::move(out), {parts.begin(), parts.end()},
                             "concat_cols", [m, total, widths = std::move(widths)](detail::Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      auto& P = in(self, k);
      if (P.requires_grad) {
        auto& g = P.grad_buffer();
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c)
            g[r * widths[k] + c] += self.grad[r * total + offset + c];
      }
      offset += widths[k];
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::vector<std::size_t> heights;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column counts differ (" +
                           shape_string(parts[0].shape()) + " vs " + shape_string(p.shape()) + ")");
    }
    heights.push_back(p.rows());
    total += p.rows();
  }
  std::vector<double> out;
  out.reserve(total * n);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return Tensor::make_result({total, n}, std::move(out), {parts.begin(), parts.end()},
                             "concat_rows", [n, heights = std::move(heights)](detail::Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < heights.size(); ++k) {
      auto& P = in(self, k);
      const std::size_t len = heights[k] * n;
      if (P.requires_grad) {
        auto& g = P.grad_buffer();
        for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[offset + i];
      }
      offset += len;
    }
  });
}

Tensor slice(const Tensor& x, std::size_t row0, std::size_t nrows, std::size_t col0,
             std::size_t ncols) {
  require_matrix(x, "slice");
  const std::size_t m = x.rows(), n = x.cols();
  if (row0 + nrows > m || col0 + ncols > n) {
    throw DimensionError("slice: block out of range for " + shape_string(x.shape()));
  }
  std::vector<double> out(nrows * ncols);
  const auto xv = x.values();
  for (std::size_t r = 0; r < nrows; ++r)
    std::copy_n(xv.data() + (row0 + r) * n + col0, ncols, out.data() + r * ncols);
  return Tensor::make_result({nrows, ncols}, std::move(out), {x}, "slice",
                             [=](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    for (std::size_t r = 0; r < nrows; ++r)
      for (std::size_t c = 0; c < ncols; ++c)
        g[(row0 + r) * n + col0 + c] += self.grad[r * ncols + c];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " cannot become " +
                         shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x}, "reshape",
                             [](detail::Node& self) {
    auto& g = in(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng* rng) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be below 1");
  if (!rng) throw ContractError("dropout in training mode needs a generator");
  std::vector<double> mask(x.size());
  const double keep = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = rng->uniform() < rate ? 0.0 : keep;
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

}  // namespace tcft
