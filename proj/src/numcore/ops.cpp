#include "aapl/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aapl/error.hpp"
#include "aapl/numcore/tape.hpp"

namespace aapl::numcore::ops {

namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                   shape_to_string(b.shape()));
}

[[noreturn]] void bad_shape(const char* op, const Tensor& a, const char* expected) {
  throw ShapeError(std::string(op) + ": expected " + expected + ", got " +
                   shape_to_string(a.shape()));
}

void require_vector(const char* op, const Tensor& a) {
  if (a.rank() != 1) bad_shape(op, a, "a vector [d]");
}

// Accumulate into an input's grad buffer if it participates.
inline void acc(TensorImpl& in, std::size_t i, double v) {
  if (in.requires_grad) in.grad[i] += v;
}

Tensor finish(const char* op, Shape shape, std::vector<double> data,
              std::initializer_list<const Tensor*> inputs, Tape::BackwardFn backward) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite output");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  bool needs = false;
  for (const auto* t : inputs) needs = needs || t->requires_grad();
  if (needs && recording_enabled()) {
    impl->requires_grad = true;
    std::vector<ImplPtr> ins;
    ins.reserve(inputs.size());
    for (const auto* t : inputs) ins.push_back(t->impl());
    Tape::current()->record(impl, std::move(ins), std::move(backward));
  }
  return make_tensor(std::move(impl));
}

Tensor finish_many(const char* op, Shape shape, std::vector<double> data,
                   std::span<const Tensor> inputs, Tape::BackwardFn backward) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite output");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  if (needs && recording_enabled()) {
    impl->requires_grad = true;
    std::vector<ImplPtr> ins;
    ins.reserve(inputs.size());
    for (const auto& t : inputs) ins.push_back(t.impl());
    Tape::current()->record(impl, std::move(ins), std::move(backward));
  }
  return make_tensor(std::move(impl));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("add", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  auto pa = a.impl(), pb = b.impl();
  return finish("add", a.shape(), std::move(out), {&a, &b}, [pa, pb](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      acc(*pa, i, o.grad[i]);
      acc(*pb, i, o.grad[i]);
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("sub", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  auto pa = a.impl(), pb = b.impl();
  return finish("sub", a.shape(), std::move(out), {&a, &b}, [pa, pb](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      acc(*pa, i, o.grad[i]);
      acc(*pb, i, -o.grad[i]);
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("mul", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  auto pa = a.impl(), pb = b.impl();
  return finish("mul", a.shape(), std::move(out), {&a, &b}, [pa, pb](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      acc(*pa, i, o.grad[i] * pb->data[i]);
      acc(*pb, i, o.grad[i] * pa->data[i]);
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
  auto pa = a.impl();
  return finish("scale", a.shape(), std::move(out), {&a}, [pa, factor](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) acc(*pa, i, factor * o.grad[i]);
  });
}

Tensor add_scalar(const Tensor& a, double offset) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + offset;
  auto pa = a.impl();
  return finish("add_scalar", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) acc(*pa, i, o.grad[i]);
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) bad_shape("matmul", a, "a matrix [m,k] on the left");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  if (b.rank() == 0 || b.rank() > 2 || b.shape()[0] != k) shape_mismatch("matmul", a, b);
  const std::size_t n = b.rank() == 2 ? b.shape()[1] : 1;
  auto x = a.data(), y = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = x[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * y[p * n + j];
    }
  }
  Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
  auto pa = a.impl(), pb = b.impl();
  return finish("matmul", std::move(shape), std::move(out), {&a, &b},
                [pa, pb, m, k, n](const TensorImpl& o) {
                  for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                      double ga = 0.0;
                      const double av = pa->data[i * k + p];
                      for (std::size_t j = 0; j < n; ++j) {
                        const double g = o.grad[i * n + j];
                        ga += g * pb->data[p * n + j];
                        if (pb->requires_grad) pb->grad[p * n + j] += av * g;
                      }
                      acc(*pa, i * k + p, ga);
                    }
                  }
                });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    KinkProbe::observe(std::abs(x[i]));
    out[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
  auto pa = a.impl();
  return finish("relu", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      if (pa->data[i] > 0.0) acc(*pa, i, o.grad[i]);
    }
  });
}

Tensor max0(const Tensor& a) {
  if (!a.is_scalar()) bad_shape("max0", a, "a scalar");
  return relu(a);
}

Tensor tanh(const Tensor& a) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
  auto pa = a.impl();
  return finish("tanh", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      acc(*pa, i, o.grad[i] * (1.0 - o.data[i] * o.data[i]));
    }
  });
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(x[i] > 0.0)) throw NumericError("log: non-positive input " + std::to_string(x[i]));
    out[i] = std::log(x[i]);
  }
  auto pa = a.impl();
  return finish("log", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) acc(*pa, i, o.grad[i] / pa->data[i]);
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  auto pa = a.impl();
  return finish("sum", {}, {s}, {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < pa->data.size(); ++i) acc(*pa, i, o.grad[0]);
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.data()) s += v;
  auto pa = a.impl();
  return finish("mean", {}, {s / n}, {&a}, [pa, n](const TensorImpl& o) {
    for (std::size_t i = 0; i < pa->data.size(); ++i) acc(*pa, i, o.grad[0] / n);
  });
}

Tensor mean_rows(const Tensor& a) {
  if (a.rank() != 2) bad_shape("mean_rows", a, "a matrix [n,d]");
  const std::size_t rows = a.shape()[0], d = a.shape()[1];
  auto x = a.data();
  std::vector<double> out(d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[j] += x[r * d + j];
  }
  for (auto& v : out) v /= static_cast<double>(rows);
  auto pa = a.impl();
  return finish("mean_rows", {d}, std::move(out), {&a}, [pa, rows, d](const TensorImpl& o) {
    const double inv = 1.0 / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) acc(*pa, r * d + j, o.grad[j] * inv);
    }
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_vector("dot", a);
  if (a.shape() != b.shape()) shape_mismatch("dot", a, b);
  double s = 0.0;
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  auto pa = a.impl(), pb = b.impl();
  return finish("dot", {}, {s}, {&a, &b}, [pa, pb](const TensorImpl& o) {
    for (std::size_t i = 0; i < pa->data.size(); ++i) {
      acc(*pa, i, o.grad[0] * pb->data[i]);
      acc(*pb, i, o.grad[0] * pa->data[i]);
    }
  });
}

Tensor l2_norm(const Tensor& a) {
  require_vector("l2_norm", a);
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  const double norm = std::sqrt(s);
  KinkProbe::observe(norm);
  auto pa = a.impl();
  return finish("l2_norm", {}, {norm}, {&a}, [pa](const TensorImpl& o) {
    const double nrm = o.data[0];
    if (nrm == 0.0) return;  // subgradient 0 at the origin
    for (std::size_t i = 0; i < pa->data.size(); ++i) acc(*pa, i, o.grad[0] * pa->data[i] / nrm);
  });
}

Tensor euclidean_distance(const Tensor& a, const Tensor& b) {
  require_vector("euclidean_distance", a);
  if (a.shape() != b.shape()) shape_mismatch("euclidean_distance", a, b);
  auto x = a.data(), y = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  const double dist = std::sqrt(s);
  KinkProbe::observe(dist);
  auto pa = a.impl(), pb = b.impl();
  return finish("euclidean_distance", {}, {dist}, {&a, &b}, [pa, pb](const TensorImpl& o) {
    const double dd = o.data[0];
    if (dd == 0.0) return;
    for (std::size_t i = 0; i < pa->data.size(); ++i) {
      const double g = o.grad[0] * (pa->data[i] - pb->data[i]) / dd;
      acc(*pa, i, g);
      acc(*pb, i, -g);
    }
  });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  require_vector("cosine_similarity", a);
  if (a.shape() != b.shape()) shape_mismatch("cosine_similarity", a, b);
  auto x = a.data(), y = b.data();
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (nx == 0.0 || ny == 0.0) throw NumericError("cosine_similarity: zero-norm operand");
  const double c = std::clamp(xy / (nx * ny), -1.0, 1.0);
  auto pa = a.impl(), pb = b.impl();
  return finish("cosine_similarity", {}, {c}, {&a, &b},
                [pa, pb, nx, ny](const TensorImpl& o) {
                  const double cv = o.data[0], g = o.grad[0];
                  for (std::size_t i = 0; i < pa->data.size(); ++i) {
                    const double xi = pa->data[i], yi = pb->data[i];
                    acc(*pa, i, g * (yi / (nx * ny) - cv * xi / (nx * nx)));
                    acc(*pb, i, g * (xi / (nx * ny) - cv * yi / (ny * ny)));
                  }
                });
}

Tensor softmax(const Tensor& a) {
  require_vector("softmax", a);
  auto x = a.data();
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  auto pa = a.impl();
  return finish("softmax", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    double gy = 0.0;
    for (std::size_t j = 0; j < o.data.size(); ++j) gy += o.grad[j] * o.data[j];
    for (std::size_t i = 0; i < o.data.size(); ++i) acc(*pa, i, o.data[i] * (o.grad[i] - gy));
  });
}

Tensor log_softmax(const Tensor& a) {
  require_vector("log_softmax", a);
  auto x = a.data();
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double v : x) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
  auto pa = a.impl();
  return finish("log_softmax", a.shape(), std::move(out), {&a}, [pa](const TensorImpl& o) {
    double gs = 0.0;
    for (double g : o.grad) gs += g;
    for (std::size_t i = 0; i < o.data.size(); ++i) {
      acc(*pa, i, o.grad[i] - std::exp(o.data[i]) * gs);
    }
  });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  for (const auto& p : parts) {
    if (p.rank() == 0) bad_shape("concat", p, "rank >= 1 operands");
  }
  Shape trailing(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t lead = 0;
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    Shape t(p.shape().begin() + 1, p.shape().end());
    if (t != trailing) shape_mismatch("concat", parts[0], p);
    lead += p.shape()[0];
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape{lead};
  shape.insert(shape.end(), trailing.begin(), trailing.end());
  std::vector<ImplPtr> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  return finish_many("concat", std::move(shape), std::move(out), parts,
                     [impls, offsets](const TensorImpl& o) {
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         auto& in = *impls[k];
                         for (std::size_t i = 0; i < in.data.size(); ++i) {
                           acc(in, i, o.grad[offsets[k] + i]);
                         }
                       }
                     });
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("stack: no operands");
  const Shape& inner = parts[0].shape();
  std::vector<double> out;
  out.reserve(parts.size() * parts[0].numel());
  for (const auto& p : parts) {
    if (p.shape() != inner) shape_mismatch("stack", parts[0], p);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<ImplPtr> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  const std::size_t block = parts[0].numel();
  return finish_many("stack", std::move(shape), std::move(out), parts,
                     [impls, block](const TensorImpl& o) {
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         for (std::size_t i = 0; i < block; ++i) {
                           acc(*impls[k], i, o.grad[k * block + i]);
                         }
                       }
                     });
}

Tensor slice(const Tensor& a, std::size_t begin, std::size_t end) {
  if (a.rank() == 0) bad_shape("slice", a, "rank >= 1");
  if (begin >= end || end > a.shape()[0]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + shape_to_string(a.shape()));
  }
  const std::size_t row = a.numel() / a.shape()[0];
  auto x = a.data();
  std::vector<double> out(x.begin() + begin * row, x.begin() + end * row);
  Shape shape = a.shape();
  shape[0] = end - begin;
  auto pa = a.impl();
  const std::size_t off = begin * row;
  return finish("slice", std::move(shape), std::move(out), {&a}, [pa, off](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) acc(*pa, off + i, o.grad[i]);
  });
}

Tensor pick(const Tensor& a, std::size_t i) {
  require_vector("pick", a);
  if (i >= a.numel()) {
    throw ShapeError("pick: index " + std::to_string(i) + " out of bounds for " +
                     shape_to_string(a.shape()));
  }
  auto pa = a.impl();
  return finish("pick", {}, {a[i]}, {&a}, [pa, i](const TensorImpl& o) { acc(*pa, i, o.grad[0]); });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_to_string(a.shape()) + " as " +
                     shape_to_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto pa = a.impl();
  return finish("reshape", std::move(shape), std::move(out), {&a}, [pa](const TensorImpl& o) {
    for (std::size_t i = 0; i < o.grad.size(); ++i) acc(*pa, i, o.grad[i]);
  });
}

}  // namespace aapl::numcore::ops
