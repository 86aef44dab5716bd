#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace mlcl {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto ext : shape) {
    if (ext == 0) fail(ErrorCode::kInvalidArgument, "zero extent in shape");
    n *= ext;
  }
  return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_numel(shape_) != values_.size()) {
    fail(ErrorCode::kInvalidArgument, "shape does not match value count");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) fail(ErrorCode::kInvalidArgument, "gradient not populated");
  return grad_;
}

std::span<double> Tensor::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

const Shape& Var::shape() const { return tape_->node(*this).shape; }
std::size_t Var::numel() const { return tape_->node(*this).value.size(); }
std::span<const double> Var::values() const { return tape_->node(*this).value; }

double Var::value() const {
  if (numel() != 1) fail(ErrorCode::kInvalidArgument, "value() on non-scalar node");
  return tape_->node(*this).value[0];
}

Var Tape::push(Shape shape, std::vector<double> value,
               std::function<void(Tape&, std::size_t)> backprop) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tape::Node& Tape::node(Var v) {
  check_owned(v);
  return nodes_[v.id_];
}

const Tape::Node& Tape::node(Var v) const {
  check_owned(v);
  return nodes_[v.id_];
}

void Tape::check_owned(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    fail(ErrorCode::kInvalidArgument, "Var does not belong to this tape");
  }
}

void Tape::check_same_shape(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) fail(ErrorCode::kInvalidArgument, "shape mismatch");
}

Var Tape::leaf(Tensor& param) {
  if (param.numel() == 0) fail(ErrorCode::kInvalidArgument, "empty parameter tensor");
  Var v = push(param.shape(), {param.values().begin(), param.values().end()}, nullptr);
  nodes_.back().bound = &param;
  leaves_.push_back(v.id_);
  return v;
}

Var Tape::constant(const Tensor& t) {
  return push(t.shape(), {t.values().begin(), t.values().end()}, nullptr);
}

Var Tape::constant(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    fail(ErrorCode::kInvalidArgument, "shape does not match value count");
  }
  return push(std::move(shape), std::move(values), nullptr);
}

Var Tape::scalar_constant(double v) { return push({1}, {v}, nullptr); }

Var Tape::add(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  check_same_shape(a, b);
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  return push(a.shape(), std::move(out), [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& ga = t.adj(ia);
    auto& gb = t.adj(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  check_same_shape(a, b);
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return push(a.shape(), std::move(out), [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& ga = t.adj(ia);
    auto& gb = t.adj(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  check_same_shape(a, b);
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  return push(a.shape(), std::move(out), [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    const auto& va2 = t.val(ia);
    const auto& vb2 = t.val(ib);
    auto& ga = t.adj(ia);
    auto& gb = t.adj(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * vb2[i];
      gb[i] += g[i] * va2[i];
    }
  });
}

Var Tape::scale(Var a, double c) {
  check_owned(a);
  const auto& va = val(a.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * c;
  return push(a.shape(), std::move(out), [ia = a.id_, c](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& ga = t.adj(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
  });
}

Var Tape::add_scalar(Var a, double c) {
  check_owned(a);
  const auto& va = val(a.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + c;
  return push(a.shape(), std::move(out), [ia = a.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& ga = t.adj(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var Tape::tanh(Var a) {
  check_owned(a);
  const auto& va = val(a.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(va[i]);
  return push(a.shape(), std::move(out), [ia = a.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    const auto& y = t.val(self);
    auto& ga = t.adj(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::sigmoid(Var a) {
  check_owned(a);
  const auto& va = val(a.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(va[i]);
  return push(a.shape(), std::move(out), [ia = a.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    const auto& y = t.val(self);
    auto& ga = t.adj(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::log(Var a) {
  check_owned(a);
  const auto& va = val(a.id_);
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(va[i] > 0.0)) fail(ErrorCode::kNumeric, "log of non-positive value");
    out[i] = std::log(va[i]);
  }
  return push(a.shape(), std::move(out), [ia = a.id_](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    const auto& x = t.val(ia);
    auto& ga = t.adj(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
  });
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  const auto& sa = node(a).shape;
  const auto& sb = node(b).shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    fail(ErrorCode::kInvalidArgument, "matmul shape mismatch");
  }
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = va[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * vb[p * n + j];
    }
  }
  return push({m, n}, std::move(out),
              [ia = a.id_, ib = b.id_, m, k, n](Tape& t, std::size_t self) {
                const auto& g = t.adj(self);
                const auto& va2 = t.val(ia);
                const auto& vb2 = t.val(ib);
                auto& ga = t.adj(ia);
                auto& gb = t.adj(ib);
                for (std::size_t i = 0; i < m; ++i) {
                  for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * vb2[p * n + j];
                    ga[i * k + p] += acc;
                  }
                }
                for (std::size_t p = 0; p < k; ++p) {
                  for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i) acc += va2[i * k + p] * g[i * n + j];
                    gb[p * n + j] += acc;
                  }
                }
              });
}

Var Tape::vecmat(Var x, Var w) {
  check_owned(x);
  check_owned(w);
  const auto& sx = node(x).shape;
  const auto& sw = node(w).shape;
  if (sx.size() != 1 || sw.size() != 2 || sx[0] != sw[0]) {
    fail(ErrorCode::kInvalidArgument, "vecmat shape mismatch");
  }
  const std::size_t k = sw[0], n = sw[1];
  const auto& vx = val(x.id_);
  const auto& vw = val(w.id_);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double xi = vx[i];
    for (std::size_t j = 0; j < n; ++j) out[j] += xi * vw[i * n + j];
  }
  return push({n}, std::move(out), [ix = x.id_, iw = w.id_, k, n](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    const auto& vx2 = t.val(ix);
    const auto& vw2 = t.val(iw);
    auto& gx = t.adj(ix);
    auto& gw = t.adj(iw);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += g[j] * vw2[i * n + j];
        gw[i * n + j] += vx2[i] * g[j];
      }
      gx[i] += acc;
    }
  });
}

Var Tape::dot(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  const auto& sa = node(a).shape;
  const auto& sb = node(b).shape;
  if (sa.size() != 1 || sb.size() != 1 || sa[0] != sb[0]) {
    fail(ErrorCode::kInvalidArgument, "dot shape mismatch");
  }
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) acc += va[i] * vb[i];
  return push({1}, {acc}, [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const double g = t.adj(self)[0];
    const auto& va2 = t.val(ia);
    const auto& vb2 = t.val(ib);
    auto& ga = t.adj(ia);
    auto& gb = t.adj(ib);
    for (std::size_t i = 0; i < va2.size(); ++i) {
      ga[i] += g * vb2[i];
      gb[i] += g * va2[i];
    }
  });
}

Var Tape::mean_axis(Var a, std::size_t axis) {
  check_owned(a);
  const auto& sa = node(a).shape;
  if (sa.size() != 2 || axis > 1) fail(ErrorCode::kInvalidArgument, "mean_axis expects a matrix");
  const std::size_t r = sa[0], c = sa[1];
  const auto& va = val(a.id_);
  if (axis == 0) {
    std::vector<double> out(c, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[j] += va[i * c + j];
    }
    for (auto& v : out) v /= static_cast<double>(r);
    return push({c}, std::move(out), [ia = a.id_, r, c](Tape& t, std::size_t self) {
      const auto& g = t.adj(self);
      auto& ga = t.adj(ia);
      const double inv = 1.0 / static_cast<double>(r);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * inv;
      }
    });
  }
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i] += va[i * c + j];
    out[i] /= static_cast<double>(c);
  }
  return push({r}, std::move(out), [ia = a.id_, r, c](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& ga = t.adj(ia);
    const double inv = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i] * inv;
    }
  });
}

Var Tape::sum(Var a) {
  check_owned(a);
  const auto& va = val(a.id_);
  double acc = 0.0;
  for (double v : va) acc += v;
  return push({1}, {acc}, [ia = a.id_](Tape& t, std::size_t self) {
    const double g = t.adj(self)[0];
    auto& ga = t.adj(ia);
    for (auto& v : ga) v += g;
  });
}

Var Tape::sum(std::span<const Var> scalars) {
  if (scalars.empty()) return scalar_constant(0.0);
  std::vector<std::size_t> ids;
  ids.reserve(scalars.size());
  double acc = 0.0;
  for (const Var& v : scalars) {
    check_owned(v);
    if (node(v).value.size() != 1) fail(ErrorCode::kInvalidArgument, "sum expects scalar terms");
    acc += node(v).value[0];
    ids.push_back(v.id_);
  }
  return push({1}, {acc}, [ids = std::move(ids)](Tape& t, std::size_t self) {
    const double g = t.adj(self)[0];
    for (auto id : ids) t.adj(id)[0] += g;
  });
}

Var Tape::concat(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  const auto& sa = node(a).shape;
  const auto& sb = node(b).shape;
  if (sa.size() != 1 || sb.size() != 1) fail(ErrorCode::kInvalidArgument, "concat expects vectors");
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  std::vector<double> out;
  out.reserve(va.size() + vb.size());
  out.insert(out.end(), va.begin(), va.end());
  out.insert(out.end(), vb.begin(), vb.end());
  return push({va.size() + vb.size()}, std::move(out),
              [ia = a.id_, ib = b.id_, na = va.size()](Tape& t, std::size_t self) {
                const auto& g = t.adj(self);
                auto& ga = t.adj(ia);
                auto& gb = t.adj(ib);
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
              });
}

Var Tape::row(Var m, std::size_t r) {
  check_owned(m);
  const auto& sm = node(m).shape;
  if (sm.size() != 2) fail(ErrorCode::kInvalidArgument, "row expects a matrix");
  if (r >= sm[0]) fail(ErrorCode::kInvalidArgument, "row index out of range");
  const std::size_t c = sm[1];
  const auto& vm = val(m.id_);
  std::vector<double> out(vm.begin() + static_cast<std::ptrdiff_t>(r * c),
                          vm.begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
  return push({c}, std::move(out), [im = m.id_, r, c](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    auto& gm = t.adj(im);
    for (std::size_t j = 0; j < c; ++j) gm[r * c + j] += g[j];
  });
}

Var Tape::rows(Var m, std::span<const std::uint32_t> indices) {
  check_owned(m);
  const auto& sm = node(m).shape;
  if (sm.size() != 2) fail(ErrorCode::kInvalidArgument, "rows expects a matrix");
  if (indices.empty()) fail(ErrorCode::kInvalidArgument, "rows: empty index list");
  const std::size_t c = sm[1];
  const auto& vm = val(m.id_);
  std::vector<double> out;
  out.reserve(indices.size() * c);
  for (auto r : indices) {
    if (r >= sm[0]) fail(ErrorCode::kInvalidArgument, "rows index out of range");
    out.insert(out.end(), vm.begin() + static_cast<std::ptrdiff_t>(std::size_t{r} * c),
               vm.begin() + static_cast<std::ptrdiff_t>((std::size_t{r} + 1) * c));
  }
  std::vector<std::uint32_t> idx(indices.begin(), indices.end());
  return push({indices.size(), c}, std::move(out),
              [im = m.id_, idx = std::move(idx), c](Tape& t, std::size_t self) {
                const auto& g = t.adj(self);
                auto& gm = t.adj(im);
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  for (std::size_t j = 0; j < c; ++j) gm[std::size_t{idx[i]} * c + j] += g[i * c + j];
                }
              });
}

Var Tape::stack(std::span<const Var> scalars) {
  if (scalars.empty()) fail(ErrorCode::kInvalidArgument, "stack: empty input");
  std::vector<double> out;
  std::vector<std::size_t> ids;
  out.reserve(scalars.size());
  ids.reserve(scalars.size());
  for (const Var& v : scalars) {
    check_owned(v);
    if (node(v).value.size() != 1) fail(ErrorCode::kInvalidArgument, "stack expects scalars");
    out.push_back(node(v).value[0]);
    ids.push_back(v.id_);
  }
  return push({scalars.size()}, std::move(out), [ids = std::move(ids)](Tape& t, std::size_t self) {
    const auto& g = t.adj(self);
    for (std::size_t i = 0; i < ids.size(); ++i) t.adj(ids[i])[0] += g[i];
  });
}

Var Tape::cosine_similarity(Var a, Var b) {
  check_owned(a);
  check_owned(b);
  const auto& sa = node(a).shape;
  const auto& sb = node(b).shape;
  if (sa.size() != 1 || sb.size() != 1 || sa[0] != sb[0] || sa[0] == 0) {
    fail(ErrorCode::kInvalidArgument, "cosine_similarity expects equal-length vectors");
  }
  const auto& va = val(a.id_);
  const auto& vb = val(b.id_);
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na2 += va[i] * va[i];
    nb2 += vb[i] * vb[i];
  }
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  if (na <= kNormEpsilon || nb <= kNormEpsilon) {
    fail(ErrorCode::kNumeric, "cosine_similarity: degenerate vector (norm below 1e-12)");
  }
  const double sim = dot / (na * nb);
  return push({1}, {sim},
              [ia = a.id_, ib = b.id_, na, nb, sim](Tape& t, std::size_t self) {
                const double g = t.adj(self)[0];
                const auto& va2 = t.val(ia);
                const auto& vb2 = t.val(ib);
                auto& ga = t.adj(ia);
                auto& gb = t.adj(ib);
                const double inv = 1.0 / (na * nb);
                for (std::size_t i = 0; i < va2.size(); ++i) {
                  ga[i] += g * (vb2[i] * inv - sim * va2[i] / (na * na));
                  gb[i] += g * (va2[i] * inv - sim * vb2[i] / (nb * nb));
                }
              });
}

Var Tape::log_sum_exp(Var xs) {
  check_owned(xs);
  const auto& s = node(xs).shape;
  if (s.size() != 1 || s[0] == 0) fail(ErrorCode::kInvalidArgument, "log_sum_exp expects a non-empty vector");
  const auto& v = val(xs.id_);
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  const double out = m + std::log(acc);
  return push({1}, {out}, [ix = xs.id_](Tape& t, std::size_t self) {
    const double g = t.adj(self)[0];
    const double y = t.val(self)[0];
    const auto& x = t.val(ix);
    auto& gx = t.adj(ix);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g * std::exp(x[i] - y);
  });
}

void Tape::backward(Var loss) {
  check_owned(loss);
  if (node(loss).value.size() != 1) {
    fail(ErrorCode::kInvalidArgument, "backward requires a scalar loss");
  }
  for (auto& n : nodes_) n.adjoint.assign(n.value.size(), 0.0);
  for (auto id : leaves_) nodes_[id].bound->zero_grad();
  nodes_[loss.id_].adjoint[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    if (nodes_[i].backprop) nodes_[i].backprop(*this, i);
  }
  for (auto id : leaves_) {
    auto g = nodes_[id].bound->grad();
    const auto& a = nodes_[id].adjoint;
    for (std::size_t i = 0; i < a.size(); ++i) g[i] += a[i];
  }
}

std::vector<std::vector<double>> finite_difference_gradient(const std::function<double()>& f,
                                                            std::span<Tensor* const> params,
                                                            double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidArgument, "finite difference step must be positive");
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (Tensor* p : params) {
    std::vector<double> g(p->numel(), 0.0);
    for (std::size_t i = 0; i < p->numel(); ++i) {
      const double saved = p->at(i);
      p->at(i) = saved + step;
      const double fp = f();
      p->at(i) = saved - step;
      const double fm = f();
      p->at(i) = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        fail(ErrorCode::kNumeric, "non-finite value during finite differencing");
      }
      g[i] = (fp - fm) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace mlcl
