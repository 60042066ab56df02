#ifndef FRT_TENSOR_HPP
#define FRT_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "frt/rng.hpp"

namespace frt {

using Shape = std::vector<int>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Dense tensor with reverse-mode autodiff. Layout is contiguous row-major;
// feature maps are N x C x H x W. Forward ops never mutate their inputs.
// Each op records parent references and a backward rule on the result node;
// backward() walks the graph in reverse topological order exactly once.
//
// Gradient semantics: leaf gradients accumulate across backward() calls,
// interior (non-leaf) gradients are transient per call.
template <class T>
class TensorT {
 public:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // allocated lazily; same length as data when present
    bool requires_grad = false;
    std::string name;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;  // reads this->grad, accumulates into parents
  };

  TensorT() = default;
  explicit TensorT(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static TensorT zeros(Shape shape, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->data.assign(size_t(shape_numel(shape)), T(0));
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return TensorT(n);
  }

  static TensorT full(Shape shape, T value, bool requires_grad = false) {
    TensorT t = zeros(std::move(shape), requires_grad);
    std::fill(t.data().begin(), t.data().end(), value);
    return t;
  }

  static TensorT from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (int64_t(values.size()) != shape_numel(shape))
      throw std::invalid_argument("tensor data length does not match shape " + shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(values);
    n->requires_grad = requires_grad;
    return TensorT(n);
  }

  static TensorT scalar(T value) { return from({1}, {value}); }

  static TensorT randn(Shape shape, Rng& rng, T stddev = T(1), bool requires_grad = false) {
    TensorT t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.data()) v = T(rng.normal()) * stddev;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return int(node_->shape.size()); }
  int dim(int i) const { return node_->shape[size_t(i)]; }
  int64_t numel() const { return int64_t(node_->data.size()); }

  std::vector<T>& data() { return node_->data; }
  const std::vector<T>& data() const { return node_->data; }
  T item() const {
    if (numel() != 1) throw std::invalid_argument("item() requires a single-element tensor");
    return node_->data[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  TensorT& set_requires_grad(bool rg) {
    node_->requires_grad = rg;
    return *this;
  }

  bool has_grad() const { return !node_->grad.empty(); }
  std::vector<T>& grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->data.size(), T(0));
    return node_->grad;
  }
  const std::vector<T>& grad() const { return node_->grad; }
  void zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
  }

  const std::string& name() const { return node_->name; }
  TensorT& set_name(std::string n) {
    node_->name = std::move(n);
    return *this;
  }

  // copy of the values, cut off from the graph
  TensorT detach() const {
    auto n = std::make_shared<Node>();
    n->shape = node_->shape;
    n->data = node_->data;
    return TensorT(n);
  }

  bool is_leaf() const { return !node_->backward; }
  std::shared_ptr<Node> node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

namespace detail {

template <class T>
TensorT<T> make_result(Shape shape, std::vector<T> data,
                       std::vector<TensorT<T>> parents,
                       std::function<void(typename TensorT<T>::Node&)> backward) {
  auto n = std::make_shared<typename TensorT<T>::Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  bool rg = false;
  for (const auto& p : parents) rg = rg || p.requires_grad();
  n->requires_grad = rg;
  if (rg) {
    for (const auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return TensorT<T>(n);
}

template <class T>
void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise ops (broadcast limited to scalar-vs-tensor)
// ---------------------------------------------------------------------------

template <class T, class FwdFn, class BwdA, class BwdB>
TensorT<T> binary_op(const char* opname, const TensorT<T>& a, const TensorT<T>& b,
                     FwdFn fwd, BwdA bwd_a, BwdB bwd_b) {
  const bool a_scalar = a.numel() == 1;
  const bool b_scalar = b.numel() == 1;
  if (!(a.shape() == b.shape() || a_scalar || b_scalar))
    throw std::invalid_argument(std::string(opname) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()) +
                                " (only scalar broadcast supported)");
  const Shape& out_shape = a_scalar ? b.shape() : a.shape();
  const int64_t n = std::max(a.numel(), b.numel());
  std::vector<T> out(size_t(n), T(0));
  const auto& ad = a.data();
  const auto& bd = b.data();
  for (int64_t i = 0; i < n; ++i)
    out[size_t(i)] = fwd(ad[a_scalar ? 0 : size_t(i)], bd[b_scalar ? 0 : size_t(i)]);

  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      out_shape, std::move(out), {a, b},
      [an, bn, a_scalar, b_scalar, n, bwd_a, bwd_b](typename TensorT<T>::Node& self) {
        const auto& g = self.grad;
        if (an->requires_grad) {
          auto& ga = TensorT<T>(an).grad();
          for (int64_t i = 0; i < n; ++i) {
            T av = an->data[a_scalar ? 0 : size_t(i)];
            T bv = bn->data[b_scalar ? 0 : size_t(i)];
            ga[a_scalar ? 0 : size_t(i)] += bwd_a(av, bv) * g[size_t(i)];
          }
        }
        if (bn->requires_grad) {
          auto& gb = TensorT<T>(bn).grad();
          for (int64_t i = 0; i < n; ++i) {
            T av = an->data[a_scalar ? 0 : size_t(i)];
            T bv = bn->data[b_scalar ? 0 : size_t(i)];
            gb[b_scalar ? 0 : size_t(i)] += bwd_b(av, bv) * g[size_t(i)];
          }
        }
      });
}

template <class T, class FwdFn, class BwdFn>
TensorT<T> unary_op(const TensorT<T>& x, FwdFn fwd, BwdFn bwd) {
  std::vector<T> out(x.data().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(x.data()[i]);
  auto xn = x.node();
  return detail::make_result<T>(
      x.shape(), std::move(out), {x}, [xn, bwd](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += bwd(xn->data[i]) * self.grad[i];
      });
}

template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>("add", a, b, [](T x, T y) { return x + y; },
                      [](T, T) { return T(1); }, [](T, T) { return T(1); });
}

template <class T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>("sub", a, b, [](T x, T y) { return x - y; },
                      [](T, T) { return T(1); }, [](T, T) { return T(-1); });
}

template <class T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>("mul", a, b, [](T x, T y) { return x * y; },
                      [](T, T y) { return y; }, [](T x, T) { return x; });
}

// y = scale * x + shift with compile-time scalars
template <class T>
TensorT<T> affine(const TensorT<T>& x, T scale, T shift = T(0)) {
  return unary_op<T>(x, [scale, shift](T v) { return scale * v + shift; },
                     [scale](T) { return scale; });
}

template <class T>
TensorT<T> vabs(const TensorT<T>& x) {
  return unary_op<T>(x, [](T v) { return std::abs(v); },
                     [](T v) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <class T>
TensorT<T> leaky_relu(const TensorT<T>& x, T slope = T(0.2)) {
  return unary_op<T>(x, [slope](T v) { return v >= T(0) ? v : slope * v; },
                     [slope](T v) { return v >= T(0) ? T(1) : slope; });
}

template <class T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  auto sig = [](T v) {
    if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
    T e = std::exp(v);
    return e / (T(1) + e);
  };
  return unary_op<T>(x, sig, [sig](T v) {
    T s = sig(v);
    return s * (T(1) - s);
  });
}

template <class T>
TensorT<T> softplus(const TensorT<T>& x) {
  auto fwd = [](T v) {
    if (v > T(30)) return v;
    if (v < T(-30)) return std::exp(v);
    return std::log1p(std::exp(v));
  };
  return unary_op<T>(x, fwd, [](T v) {
    if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
    T e = std::exp(v);
    return e / (T(1) + e);
  });
}

// ln(max(x, eps)); gradient is zero in the clamped region
template <class T>
TensorT<T> vlog(const TensorT<T>& x, T eps = T(0)) {
  return unary_op<T>(x, [eps](T v) { return std::log(std::max(v, eps)); },
                     [eps](T v) { return v > eps ? T(1) / v : T(0); });
}

template <class T>
TensorT<T> vexp(const TensorT<T>& x) {
  return unary_op<T>(x, [](T v) { return std::exp(v); }, [](T v) { return std::exp(v); });
}

template <class T>
TensorT<T> operator+(const TensorT<T>& a, const TensorT<T>& b) { return add(a, b); }
template <class T>
TensorT<T> operator-(const TensorT<T>& a, const TensorT<T>& b) { return sub(a, b); }
template <class T>
TensorT<T> operator*(const TensorT<T>& a, const TensorT<T>& b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// reductions and shape ops
// ---------------------------------------------------------------------------

template <class T>
TensorT<T> sum(const TensorT<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  auto xn = x.node();
  return detail::make_result<T>(
      {1}, {acc}, {x}, [xn](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (auto& g : gx) g += self.grad[0];
      });
}

template <class T>
TensorT<T> mean(const TensorT<T>& x) {
  const T inv = T(1) / T(x.numel());
  T acc = 0;
  for (T v : x.data()) acc += v;
  acc *= inv;
  auto xn = x.node();
  return detail::make_result<T>(
      {1}, {acc}, {x}, [xn, inv](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (auto& g : gx) g += inv * self.grad[0];
      });
}

template <class T>
TensorT<T> reshape(const TensorT<T>& x, Shape new_shape) {
  if (shape_numel(new_shape) != x.numel())
    throw std::invalid_argument("reshape: element count mismatch " + shape_str(x.shape()) +
                                " -> " + shape_str(new_shape));
  auto xn = x.node();
  return detail::make_result<T>(
      std::move(new_shape), x.data(), {x}, [xn](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
      });
}

// concatenate N x Ci x H x W tensors along the channel axis
template <class T>
TensorT<T> concat_channels(const std::vector<TensorT<T>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const int n = parts[0].dim(0), h = parts[0].dim(2), w = parts[0].dim(3);
  int ctot = 0;
  for (const auto& p : parts) {
    if (p.rank() != 4 || p.dim(0) != n || p.dim(2) != h || p.dim(3) != w)
      throw std::invalid_argument("concat_channels: incompatible shapes");
    ctot += p.dim(1);
  }
  std::vector<T> out(size_t(n) * ctot * h * w);
  const int64_t plane = int64_t(h) * w;
  int coff = 0;
  for (const auto& p : parts) {
    const int pc = p.dim(1);
    for (int b = 0; b < n; ++b)
      std::copy_n(p.data().begin() + int64_t(b) * pc * plane, int64_t(pc) * plane,
                  out.begin() + (int64_t(b) * ctot + coff) * plane);
    coff += pc;
  }
  std::vector<std::shared_ptr<typename TensorT<T>::Node>> pnodes;
  std::vector<int> pch;
  for (const auto& p : parts) {
    pnodes.push_back(p.node());
    pch.push_back(p.dim(1));
  }
  return detail::make_result<T>(
      {n, ctot, h, w}, std::move(out), parts,
      [pnodes, pch, n, ctot, plane](typename TensorT<T>::Node& self) {
        int coff = 0;
        for (size_t pi = 0; pi < pnodes.size(); ++pi) {
          const int pc = pch[pi];
          if (pnodes[pi]->requires_grad) {
            auto& gp = TensorT<T>(pnodes[pi]).grad();
            for (int b = 0; b < n; ++b) {
              const T* src = self.grad.data() + (int64_t(b) * ctot + coff) * plane;
              T* dst = gp.data() + int64_t(b) * pc * plane;
              for (int64_t i = 0; i < int64_t(pc) * plane; ++i) dst[i] += src[i];
            }
          }
          coff += pc;
        }
      });
}

// channels [c0, c1) of an N x C x H x W tensor
template <class T>
TensorT<T> slice_channels(const TensorT<T>& x, int c0, int c1) {
  if (x.rank() != 4) throw std::invalid_argument("slice_channels: rank-4 tensor required");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c0 < 0 || c1 > c || c0 >= c1)
    throw std::invalid_argument("slice_channels: bad range [" + std::to_string(c0) + "," +
                                std::to_string(c1) + ") for C=" + std::to_string(c));
  const int sc = c1 - c0;
  const int64_t plane = int64_t(h) * w;
  std::vector<T> out(size_t(n) * sc * plane);
  for (int b = 0; b < n; ++b)
    std::copy_n(x.data().begin() + (int64_t(b) * c + c0) * plane, int64_t(sc) * plane,
                out.begin() + int64_t(b) * sc * plane);
  auto xn = x.node();
  return detail::make_result<T>(
      {n, sc, h, w}, std::move(out), {x},
      [xn, n, c, c0, sc, plane](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int b = 0; b < n; ++b) {
          const T* src = self.grad.data() + int64_t(b) * sc * plane;
          T* dst = gx.data() + (int64_t(b) * c + c0) * plane;
          for (int64_t i = 0; i < int64_t(sc) * plane; ++i) dst[i] += src[i];
        }
      });
}

// ---------------------------------------------------------------------------
// conv2d / linear
// ---------------------------------------------------------------------------

// 2D convolution with odd kernel, "same" padding p=(k-1)/2, stride 1 or 2.
template <class T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride = 1) {
  if (input.rank() != 4 || weight.rank() != 4)
    throw std::invalid_argument("conv2d: rank-4 input and weight required");
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin)
    throw std::invalid_argument("conv2d: channel mismatch, input C=" + std::to_string(cin) +
                                " weight Cin=" + std::to_string(weight.dim(1)));
  if (weight.dim(3) != k || k % 2 == 0)
    throw std::invalid_argument("conv2d: square odd kernel required");
  if (stride != 1 && stride != 2) throw std::invalid_argument("conv2d: stride must be 1 or 2");
  if (bias.numel() != cout) throw std::invalid_argument("conv2d: bias length must equal Cout");
  const int p = (k - 1) / 2;
  const int oh = (h + 2 * p - k) / stride + 1;
  const int ow = (w + 2 * p - k) / stride + 1;

  std::vector<T> out(size_t(n) * cout * oh * ow);
  const T* in = input.data().data();
  const T* wt = weight.data().data();
  const T* bs = bias.data().data();
  for (int b = 0; b < n; ++b) {
    for (int co = 0; co < cout; ++co) {
      T* oplane = out.data() + (int64_t(b) * cout + co) * oh * ow;
      std::fill_n(oplane, int64_t(oh) * ow, bs[co]);
      for (int ci = 0; ci < cin; ++ci) {
        const T* iplane = in + (int64_t(b) * cin + ci) * h * w;
        const T* wk = wt + (int64_t(co) * cin + ci) * k * k;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const T wv = wk[ky * k + kx];
            if (wv == T(0)) continue;
            const int dy = ky - p, dx = kx - p;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride + dy;
              if (iy < 0 || iy >= h) continue;
              // valid ox range so that ix = ox*stride + dx stays in [0, w)
              int ox0 = 0, ox1 = ow;
              if (dx < 0) ox0 = (-dx + stride - 1) / stride;
              if (dx > 0) ox1 = std::min(ow, (w - dx + stride - 1) / stride);
              const T* irow = iplane + int64_t(iy) * w + dx;
              T* orow = oplane + int64_t(oy) * ow;
              if (stride == 1) {
                for (int ox = ox0; ox < ox1; ++ox) orow[ox] += wv * irow[ox];
              } else {
                for (int ox = ox0; ox < ox1; ++ox) orow[ox] += wv * irow[2 * ox];
              }
            }
          }
        }
      }
    }
  }

  auto in_n = input.node();
  auto w_n = weight.node();
  auto b_n = bias.node();
  auto bw = [in_n, w_n, b_n, n, cin, h, w, cout, k, p, stride, oh,
             ow](typename TensorT<T>::Node& self) {
    const T* g = self.grad.data();
    if (b_n->requires_grad) {
      auto& gb = TensorT<T>(b_n).grad();
      for (int b = 0; b < n; ++b)
        for (int co = 0; co < cout; ++co) {
          const T* gp = g + (int64_t(b) * cout + co) * oh * ow;
          T acc = 0;
          for (int64_t i = 0; i < int64_t(oh) * ow; ++i) acc += gp[i];
          gb[size_t(co)] += acc;
        }
    }
    if (w_n->requires_grad) {
      auto& gw = TensorT<T>(w_n).grad();
      for (int b = 0; b < n; ++b)
        for (int co = 0; co < cout; ++co) {
          const T* gp = g + (int64_t(b) * cout + co) * oh * ow;
          for (int ci = 0; ci < cin; ++ci) {
            const T* iplane = in_n->data.data() + (int64_t(b) * cin + ci) * h * w;
            T* wk = gw.data() + (int64_t(co) * cin + ci) * k * k;
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int dy = ky - p, dx = kx - p;
                T acc = 0;
                for (int oy = 0; oy < oh; ++oy) {
                  const int iy = oy * stride + dy;
                  if (iy < 0 || iy >= h) continue;
                  int ox0 = 0, ox1 = ow;
                  if (dx < 0) ox0 = (-dx + stride - 1) / stride;
                  if (dx > 0) ox1 = std::min(ow, (w - dx + stride - 1) / stride);
                  const T* irow = iplane + int64_t(iy) * w + dx;
                  const T* grow = gp + int64_t(oy) * ow;
                  if (stride == 1) {
                    for (int ox = ox0; ox < ox1; ++ox) acc += grow[ox] * irow[ox];
                  } else {
                    for (int ox = ox0; ox < ox1; ++ox) acc += grow[ox] * irow[2 * ox];
                  }
                }
                wk[ky * k + kx] += acc;
              }
          }
        }
    }
    if (in_n->requires_grad) {
      auto& gi = TensorT<T>(in_n).grad();
      for (int b = 0; b < n; ++b)
        for (int co = 0; co < cout; ++co) {
          const T* gp = g + (int64_t(b) * cout + co) * oh * ow;
          for (int ci = 0; ci < cin; ++ci) {
            T* iplane = gi.data() + (int64_t(b) * cin + ci) * h * w;
            const T* wk = w_n->data.data() + (int64_t(co) * cin + ci) * k * k;
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const T wv = wk[ky * k + kx];
                if (wv == T(0)) continue;
                const int dy = ky - p, dx = kx - p;
                for (int oy = 0; oy < oh; ++oy) {
                  const int iy = oy * stride + dy;
                  if (iy < 0 || iy >= h) continue;
                  int ox0 = 0, ox1 = ow;
                  if (dx < 0) ox0 = (-dx + stride - 1) / stride;
                  if (dx > 0) ox1 = std::min(ow, (w - dx + stride - 1) / stride);
                  T* irow = iplane + int64_t(iy) * w + dx;
                  const T* grow = gp + int64_t(oy) * ow;
                  if (stride == 1) {
                    for (int ox = ox0; ox < ox1; ++ox) irow[ox] += wv * grow[ox];
                  } else {
                    for (int ox = ox0; ox < ox1; ++ox) irow[2 * ox] += wv * grow[ox];
                  }
                }
              }
          }
        }
    }
  };
  return detail::make_result<T>({n, cout, oh, ow}, std::move(out), {input, weight, bias}, bw);
}

// y = x W^T + b for x: N x D, W: D' x D, b: D'
template <class T>
TensorT<T> linear(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2)
    throw std::invalid_argument("linear: rank-2 input and weight required");
  const int n = x.dim(0), d = x.dim(1), dout = weight.dim(0);
  if (weight.dim(1) != d)
    throw std::invalid_argument("linear: dimension mismatch, input D=" + std::to_string(d) +
                                " weight D=" + std::to_string(weight.dim(1)));
  if (bias.numel() != dout) throw std::invalid_argument("linear: bias length must equal D'");
  std::vector<T> out(size_t(n) * dout);
  for (int b = 0; b < n; ++b)
    for (int o = 0; o < dout; ++o) {
      const T* xr = x.data().data() + int64_t(b) * d;
      const T* wr = weight.data().data() + int64_t(o) * d;
      T acc = bias.data()[size_t(o)];
      for (int i = 0; i < d; ++i) acc += xr[i] * wr[i];
      out[size_t(b) * dout + o] = acc;
    }
  auto xn = x.node();
  auto wn = weight.node();
  auto bn = bias.node();
  return detail::make_result<T>(
      {n, dout}, std::move(out), {x, weight, bias},
      [xn, wn, bn, n, d, dout](typename TensorT<T>::Node& self) {
        const T* g = self.grad.data();
        if (bn->requires_grad) {
          auto& gb = TensorT<T>(bn).grad();
          for (int b = 0; b < n; ++b)
            for (int o = 0; o < dout; ++o) gb[size_t(o)] += g[size_t(b) * dout + o];
        }
        if (wn->requires_grad) {
          auto& gw = TensorT<T>(wn).grad();
          for (int b = 0; b < n; ++b)
            for (int o = 0; o < dout; ++o) {
              const T gv = g[size_t(b) * dout + o];
              const T* xr = xn->data.data() + int64_t(b) * d;
              T* wr = gw.data() + int64_t(o) * d;
              for (int i = 0; i < d; ++i) wr[i] += gv * xr[i];
            }
        }
        if (xn->requires_grad) {
          auto& gx = TensorT<T>(xn).grad();
          for (int b = 0; b < n; ++b)
            for (int o = 0; o < dout; ++o) {
              const T gv = g[size_t(b) * dout + o];
              const T* wr = wn->data.data() + int64_t(o) * d;
              T* xr = gx.data() + int64_t(b) * d;
              for (int i = 0; i < d; ++i) xr[i] += gv * wr[i];
            }
        }
      });
}

// ---------------------------------------------------------------------------
// resampling
// ---------------------------------------------------------------------------

enum class Resample { kNearest, kBilinear, kArea };

// Up (nearest/bilinear) or down (area) sampling by an integer factor.
// Bilinear uses the align-corners-false convention. Area downsampling
// requires H and W divisible by the factor.
template <class T>
TensorT<T> resample2d(const TensorT<T>& x, Resample mode, int factor) {
  if (x.rank() != 4) throw std::invalid_argument("resample2d: rank-4 tensor required");
  if (factor < 1) throw std::invalid_argument("resample2d: factor must be >= 1");
  if (factor == 1) {
    auto xn = x.node();
    return detail::make_result<T>(x.shape(), x.data(), {x},
                                  [xn](typename TensorT<T>::Node& self) {
                                    if (!xn->requires_grad) return;
                                    auto& gx = TensorT<T>(xn).grad();
                                    for (size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                                  });
  }
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t planes = int64_t(n) * c;

  if (mode == Resample::kArea) {
    if (h % factor != 0 || w % factor != 0)
      throw std::invalid_argument("resample2d: area downsample requires divisible extents, got " +
                                  shape_str(x.shape()) + " factor " + std::to_string(factor));
    const int oh = h / factor, ow = w / factor;
    const T inv = T(1) / T(factor * factor);
    std::vector<T> out(size_t(planes) * oh * ow);
    for (int64_t pl = 0; pl < planes; ++pl) {
      const T* ip = x.data().data() + pl * h * w;
      T* op = out.data() + pl * oh * ow;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx)
              acc += ip[(int64_t(oy) * factor + dy) * w + ox * factor + dx];
          op[int64_t(oy) * ow + ox] = acc * inv;
        }
    }
    auto xn = x.node();
    return detail::make_result<T>(
        {n, c, oh, ow}, std::move(out), {x},
        [xn, planes, h, w, oh, ow, factor, inv](typename TensorT<T>::Node& self) {
          if (!xn->requires_grad) return;
          auto& gx = TensorT<T>(xn).grad();
          for (int64_t pl = 0; pl < planes; ++pl) {
            T* ip = gx.data() + pl * h * w;
            const T* op = self.grad.data() + pl * oh * ow;
            for (int oy = 0; oy < oh; ++oy)
              for (int ox = 0; ox < ow; ++ox) {
                const T gv = op[int64_t(oy) * ow + ox] * inv;
                for (int dy = 0; dy < factor; ++dy)
                  for (int dx = 0; dx < factor; ++dx)
                    ip[(int64_t(oy) * factor + dy) * w + ox * factor + dx] += gv;
              }
          }
        });
  }

  const int oh = h * factor, ow = w * factor;
  if (mode == Resample::kNearest) {
    std::vector<T> out(size_t(planes) * oh * ow);
    for (int64_t pl = 0; pl < planes; ++pl) {
      const T* ip = x.data().data() + pl * h * w;
      T* op = out.data() + pl * oh * ow;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          op[int64_t(oy) * ow + ox] = ip[int64_t(oy / factor) * w + ox / factor];
    }
    auto xn = x.node();
    return detail::make_result<T>(
        {n, c, oh, ow}, std::move(out), {x},
        [xn, planes, h, w, oh, ow, factor](typename TensorT<T>::Node& self) {
          if (!xn->requires_grad) return;
          auto& gx = TensorT<T>(xn).grad();
          for (int64_t pl = 0; pl < planes; ++pl) {
            T* ip = gx.data() + pl * h * w;
            const T* op = self.grad.data() + pl * oh * ow;
            for (int oy = 0; oy < oh; ++oy)
              for (int ox = 0; ox < ow; ++ox)
                ip[int64_t(oy / factor) * w + ox / factor] += op[int64_t(oy) * ow + ox];
          }
        });
  }

  // bilinear upsample, align-corners-false: src = (dst + 0.5)/f - 0.5
  struct Tap {
    int i0, i1;
    T w0, w1;
  };
  auto make_taps = [factor](int in_len, int out_len) {
    std::vector<Tap> taps(size_t(out_len), Tap{});
    for (int o = 0; o < out_len; ++o) {
      double s = (o + 0.5) / factor - 0.5;
      double fl = std::floor(s);
      int i0 = int(fl);
      double fr = s - fl;
      int i1 = i0 + 1;
      if (i0 < 0) { i0 = 0; i1 = 0; fr = 0.0; }
      if (i1 >= in_len) { i1 = in_len - 1; i0 = in_len - 1; fr = 0.0; }
      taps[size_t(o)] = {i0, i1, T(1.0 - fr), T(fr)};
    }
    return taps;
  };
  const auto ty = make_taps(h, oh);
  const auto tx = make_taps(w, ow);
  std::vector<T> out(size_t(planes) * oh * ow);
  for (int64_t pl = 0; pl < planes; ++pl) {
    const T* ip = x.data().data() + pl * h * w;
    T* op = out.data() + pl * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      const Tap& y = ty[size_t(oy)];
      for (int ox = 0; ox < ow; ++ox) {
        const Tap& xx = tx[size_t(ox)];
        op[int64_t(oy) * ow + ox] =
            y.w0 * (xx.w0 * ip[int64_t(y.i0) * w + xx.i0] + xx.w1 * ip[int64_t(y.i0) * w + xx.i1]) +
            y.w1 * (xx.w0 * ip[int64_t(y.i1) * w + xx.i0] + xx.w1 * ip[int64_t(y.i1) * w + xx.i1]);
      }
    }
  }
  auto xn = x.node();
  return detail::make_result<T>(
      {n, c, oh, ow}, std::move(out), {x},
      [xn, planes, h, w, oh, ow, ty, tx](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int64_t pl = 0; pl < planes; ++pl) {
          T* ip = gx.data() + pl * h * w;
          const T* op = self.grad.data() + pl * oh * ow;
          for (int oy = 0; oy < oh; ++oy) {
            const Tap& y = ty[size_t(oy)];
            for (int ox = 0; ox < ow; ++ox) {
              const Tap& xx = tx[size_t(ox)];
              const T gv = op[int64_t(oy) * ow + ox];
              ip[int64_t(y.i0) * w + xx.i0] += y.w0 * xx.w0 * gv;
              ip[int64_t(y.i0) * w + xx.i1] += y.w0 * xx.w1 * gv;
              ip[int64_t(y.i1) * w + xx.i0] += y.w1 * xx.w0 * gv;
              ip[int64_t(y.i1) * w + xx.i1] += y.w1 * xx.w1 * gv;
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// specialty ops used by the models
// ---------------------------------------------------------------------------

// y[n,c,h,w] = x[n,c,h,w] * gain[n,c] + shift[n,c]
template <class T>
TensorT<T> channel_affine(const TensorT<T>& x, const TensorT<T>& gain, const TensorT<T>& shift) {
  if (x.rank() != 4 || gain.rank() != 2 || shift.rank() != 2)
    throw std::invalid_argument("channel_affine: expected x rank 4, gain/shift rank 2");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (gain.dim(0) != n || gain.dim(1) != c || shift.dim(0) != n || shift.dim(1) != c)
    throw std::invalid_argument("channel_affine: gain/shift must be N x C");
  const int64_t plane = int64_t(h) * w;
  std::vector<T> out(x.data().size());
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const T g = gain.data()[size_t(b) * c + ch], s = shift.data()[size_t(b) * c + ch];
      const T* ip = x.data().data() + (int64_t(b) * c + ch) * plane;
      T* op = out.data() + (int64_t(b) * c + ch) * plane;
      for (int64_t i = 0; i < plane; ++i) op[i] = ip[i] * g + s;
    }
  auto xn = x.node();
  auto gn = gain.node();
  auto sn = shift.node();
  return detail::make_result<T>(
      x.shape(), std::move(out), {x, gain, shift},
      [xn, gn, sn, n, c, plane](typename TensorT<T>::Node& self) {
        for (int b = 0; b < n; ++b)
          for (int ch = 0; ch < c; ++ch) {
            const T* gping = self.grad.data() + (int64_t(b) * c + ch) * plane;
            if (xn->requires_grad) {
              const T g = gn->data[size_t(b) * c + ch];
              T* gx = TensorT<T>(xn).grad().data() + (int64_t(b) * c + ch) * plane;
              for (int64_t i = 0; i < plane; ++i) gx[i] += gping[i] * g;
            }
            if (gn->requires_grad) {
              const T* ip = xn->data.data() + (int64_t(b) * c + ch) * plane;
              T acc = 0;
              for (int64_t i = 0; i < plane; ++i) acc += gping[i] * ip[i];
              TensorT<T>(gn).grad()[size_t(b) * c + ch] += acc;
            }
            if (sn->requires_grad) {
              T acc = 0;
              for (int64_t i = 0; i < plane; ++i) acc += gping[i];
              TensorT<T>(sn).grad()[size_t(b) * c + ch] += acc;
            }
          }
      });
}

// per-sample Gram matrix: N x C x H x W -> N x C x C, G = F F^T / (H*W)
template <class T>
TensorT<T> gram(const TensorT<T>& x) {
  if (x.rank() != 4) throw std::invalid_argument("gram: rank-4 tensor required");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int64_t plane = int64_t(h) * w;
  if (plane == 0) throw std::invalid_argument("gram: empty feature map");
  const T inv = T(1) / T(plane);
  std::vector<T> out(size_t(n) * c * c);
  for (int b = 0; b < n; ++b) {
    const T* f = x.data().data() + int64_t(b) * c * plane;
    T* g = out.data() + int64_t(b) * c * c;
    for (int i = 0; i < c; ++i)
      for (int j = i; j < c; ++j) {
        T acc = 0;
        const T* fi = f + int64_t(i) * plane;
        const T* fj = f + int64_t(j) * plane;
        for (int64_t t = 0; t < plane; ++t) acc += fi[t] * fj[t];
        g[int64_t(i) * c + j] = acc * inv;
        g[int64_t(j) * c + i] = acc * inv;
      }
  }
  auto xn = x.node();
  return detail::make_result<T>(
      {n, c, c}, std::move(out), {x}, [xn, n, c, plane, inv](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        // dF = (dG + dG^T) F / (H*W)
        for (int b = 0; b < n; ++b) {
          const T* f = xn->data.data() + int64_t(b) * c * plane;
          const T* gg = self.grad.data() + int64_t(b) * c * c;
          T* gf = gx.data() + int64_t(b) * c * plane;
          for (int i = 0; i < c; ++i)
            for (int j = 0; j < c; ++j) {
              const T coeff = (gg[int64_t(i) * c + j] + gg[int64_t(j) * c + i]) * inv;
              if (coeff == T(0)) continue;
              const T* fj = f + int64_t(j) * plane;
              T* gfi = gf + int64_t(i) * plane;
              for (int64_t t = 0; t < plane; ++t) gfi[t] += coeff * fj[t];
            }
        }
      });
}

// N x C x H x W -> N x C spatial mean
template <class T>
TensorT<T> spatial_mean(const TensorT<T>& x) {
  if (x.rank() != 4) throw std::invalid_argument("spatial_mean: rank-4 tensor required");
  const int n = x.dim(0), c = x.dim(1);
  const int64_t plane = int64_t(x.dim(2)) * x.dim(3);
  const T inv = T(1) / T(plane);
  std::vector<T> out(size_t(n) * c);
  for (int64_t pc = 0; pc < int64_t(n) * c; ++pc) {
    const T* ip = x.data().data() + pc * plane;
    T acc = 0;
    for (int64_t i = 0; i < plane; ++i) acc += ip[i];
    out[size_t(pc)] = acc * inv;
  }
  auto xn = x.node();
  return detail::make_result<T>(
      {n, c}, std::move(out), {x}, [xn, n, c, plane, inv](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int64_t pc = 0; pc < int64_t(n) * c; ++pc) {
          const T gv = self.grad[size_t(pc)] * inv;
          T* ip = gx.data() + pc * plane;
          for (int64_t i = 0; i < plane; ++i) ip[i] += gv;
        }
      });
}

// row-wise x / max(||x||, eps) for N x D
template <class T>
TensorT<T> unit_normalize(const TensorT<T>& x, T eps = T(1e-12)) {
  if (x.rank() != 2) throw std::invalid_argument("unit_normalize: rank-2 tensor required");
  const int n = x.dim(0), d = x.dim(1);
  std::vector<T> out(x.data().size());
  std::vector<T> norms(size_t(n), T(0));
  for (int b = 0; b < n; ++b) {
    const T* xr = x.data().data() + int64_t(b) * d;
    T sq = 0;
    for (int i = 0; i < d; ++i) sq += xr[i] * xr[i];
    const T r = std::max(std::sqrt(sq), eps);
    norms[size_t(b)] = r;
    T* orow = out.data() + int64_t(b) * d;
    for (int i = 0; i < d; ++i) orow[i] = xr[i] / r;
  }
  auto xn = x.node();
  return detail::make_result<T>(
      x.shape(), std::move(out), {x}, [xn, n, d, norms](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int b = 0; b < n; ++b) {
          const T r = norms[size_t(b)];
          const T* y = self.data.data() + int64_t(b) * d;
          const T* gy = self.grad.data() + int64_t(b) * d;
          T dot = 0;
          for (int i = 0; i < d; ++i) dot += y[i] * gy[i];
          T* gxr = gx.data() + int64_t(b) * d;
          for (int i = 0; i < d; ++i) gxr[i] += (gy[i] - y[i] * dot) / r;
        }
      });
}

// tile a 1 x C x H x W tensor along the batch axis
template <class T>
TensorT<T> batch_repeat(const TensorT<T>& x, int n) {
  if (x.rank() != 4 || x.dim(0) != 1)
    throw std::invalid_argument("batch_repeat: 1 x C x H x W tensor required");
  if (n < 1) throw std::invalid_argument("batch_repeat: n must be positive");
  const int64_t item = x.numel();
  std::vector<T> out(size_t(item) * n);
  for (int b = 0; b < n; ++b)
    std::copy_n(x.data().begin(), item, out.begin() + int64_t(b) * item);
  auto xn = x.node();
  return detail::make_result<T>(
      {n, x.dim(1), x.dim(2), x.dim(3)}, std::move(out), {x},
      [xn, n, item](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int b = 0; b < n; ++b) {
          const T* src = self.grad.data() + int64_t(b) * item;
          for (int64_t i = 0; i < item; ++i) gx[size_t(i)] += src[i];
        }
      });
}

// Normalized box in [0,1]^2, (x0,y0) top-left, (x1,y1) bottom-right exclusive.
struct BoxF {
  float x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  float width() const { return x1 - x0; }
  float height() const { return y1 - y0; }
  bool valid() const {
    return x0 >= 0 && y0 >= 0 && x1 <= 1 && y1 <= 1 && x1 > x0 && y1 > y0;
  }
};

// Differentiable bilinear crop of per-sample boxes to out_size x out_size.
// Sample positions follow align-corners-false: the patch pixel centers map
// uniformly into the box.
template <class T>
TensorT<T> bilinear_crop(const TensorT<T>& x, const std::vector<BoxF>& boxes, int out_size) {
  if (x.rank() != 4) throw std::invalid_argument("bilinear_crop: rank-4 tensor required");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (int(boxes.size()) != n)
    throw std::invalid_argument("bilinear_crop: need one box per batch item");
  if (out_size < 1) throw std::invalid_argument("bilinear_crop: out_size must be positive");
  for (const auto& b : boxes)
    if (!b.valid()) throw std::invalid_argument("bilinear_crop: degenerate or out-of-range box");

  struct Tap {
    int i0, i1;
    T w0, w1;
  };
  auto taps_for = [out_size](float lo, float hi, int in_len) {
    std::vector<Tap> taps(size_t(out_size), Tap{});
    for (int o = 0; o < out_size; ++o) {
      double u = lo + (o + 0.5) / out_size * double(hi - lo);
      double s = u * in_len - 0.5;
      double fl = std::floor(s);
      int i0 = int(fl);
      double fr = s - fl;
      int i1 = i0 + 1;
      if (i0 < 0) { i0 = 0; i1 = 0; fr = 0.0; }
      if (i1 >= in_len) { i1 = in_len - 1; i0 = in_len - 1; fr = 0.0; }
      taps[size_t(o)] = {i0, i1, T(1.0 - fr), T(fr)};
    }
    return taps;
  };

  std::vector<std::vector<Tap>> ytaps, xtaps;
  ytaps.resize(size_t(n));
  xtaps.resize(size_t(n));
  for (int b = 0; b < n; ++b) {
    ytaps[size_t(b)] = taps_for(boxes[size_t(b)].y0, boxes[size_t(b)].y1, h);
    xtaps[size_t(b)] = taps_for(boxes[size_t(b)].x0, boxes[size_t(b)].x1, w);
  }
  std::vector<T> out(size_t(n) * c * out_size * out_size);
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch) {
      const T* ip = x.data().data() + (int64_t(b) * c + ch) * h * w;
      T* op = out.data() + (int64_t(b) * c + ch) * out_size * out_size;
      for (int oy = 0; oy < out_size; ++oy) {
        const Tap& y = ytaps[size_t(b)][size_t(oy)];
        for (int ox = 0; ox < out_size; ++ox) {
          const Tap& xx = xtaps[size_t(b)][size_t(ox)];
          op[int64_t(oy) * out_size + ox] =
              y.w0 * (xx.w0 * ip[int64_t(y.i0) * w + xx.i0] +
                      xx.w1 * ip[int64_t(y.i0) * w + xx.i1]) +
              y.w1 * (xx.w0 * ip[int64_t(y.i1) * w + xx.i0] +
                      xx.w1 * ip[int64_t(y.i1) * w + xx.i1]);
        }
      }
    }
  auto xn = x.node();
  return detail::make_result<T>(
      {n, c, out_size, out_size}, std::move(out), {x},
      [xn, n, c, h, w, out_size, ytaps, xtaps](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        auto& gx = TensorT<T>(xn).grad();
        for (int b = 0; b < n; ++b)
          for (int ch = 0; ch < c; ++ch) {
            T* ip = gx.data() + (int64_t(b) * c + ch) * h * w;
            const T* op = self.grad.data() + (int64_t(b) * c + ch) * out_size * out_size;
            for (int oy = 0; oy < out_size; ++oy) {
              const Tap& y = ytaps[size_t(b)][size_t(oy)];
              for (int ox = 0; ox < out_size; ++ox) {
                const Tap& xx = xtaps[size_t(b)][size_t(ox)];
                const T gv = op[int64_t(oy) * out_size + ox];
                ip[int64_t(y.i0) * w + xx.i0] += y.w0 * xx.w0 * gv;
                ip[int64_t(y.i0) * w + xx.i1] += y.w0 * xx.w1 * gv;
                ip[int64_t(y.i1) * w + xx.i0] += y.w1 * xx.w0 * gv;
                ip[int64_t(y.i1) * w + xx.i1] += y.w1 * xx.w1 * gv;
              }
            }
          }
      });
}

// ---------------------------------------------------------------------------
// backward pass
// ---------------------------------------------------------------------------

// Reverse-topological evaluation order over the recorded graph.
template <class T>
struct Tape {
  std::vector<typename TensorT<T>::Node*> order;  // forward topological order
};

template <class T>
Tape<T> build_tape(const TensorT<T>& root) {
  Tape<T> tape;
  std::unordered_set<typename TensorT<T>::Node*> seen;
  // iterative post-order DFS
  std::vector<std::pair<typename TensorT<T>::Node*, size_t>> stack;
  if (root.node()->requires_grad) stack.emplace_back(root.node().get(), 0);
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx == 0 && seen.count(node)) {
      stack.pop_back();
      continue;
    }
    if (idx < node->parents.size()) {
      auto* p = node->parents[idx].get();
      ++idx;
      if (p->requires_grad && !seen.count(p)) stack.emplace_back(p, 0);
    } else {
      seen.insert(node);
      tape.order.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

// Populates gradients of every reachable requires_grad tensor. Leaf grads
// accumulate across calls; interior grads are reset per call.
template <class T>
void backward(const TensorT<T>& loss) {
  if (loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss.shape()));
  if (!loss.requires_grad()) return;
  Tape<T> tape = build_tape(loss);
  for (auto* n : tape.order) {
    if (n->backward) {
      n->grad.assign(n->data.size(), T(0));  // interior: fresh per pass
    } else if (n->grad.empty()) {
      n->grad.assign(n->data.size(), T(0));  // leaf: allocate once, accumulate
    }
  }
  loss.node()->grad[0] = T(1);
  for (auto it = tape.order.rbegin(); it != tape.order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <class T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

template <class T>
class Adam {
 public:
  Adam(std::vector<TensorT<T>> params, AdamConfig<T> cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    if (!(cfg_.lr > T(0))) throw std::invalid_argument("adam: lr must be positive");
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].data().size(), T(0));
      v_[i].assign(params_[i].data().size(), T(0));
    }
  }

  void set_lr(T lr) { cfg_.lr = lr; }
  T lr() const { return cfg_.lr; }
  int64_t step_count() const { return t_; }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step() {
    ++t_;
    const T bc1 = T(1) - std::pow(cfg_.beta1, T(t_));
    const T bc2 = T(1) - std::pow(cfg_.beta2, T(t_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
      auto& p = params_[pi];
      if (!p.has_grad()) continue;  // zero gradient: moments stay zero
      const auto& g = p.grad();
      auto& m = m_[pi];
      auto& v = v_[pi];
      auto& d = p.data();
      for (size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(g[i]))
          throw std::runtime_error("adam: non-finite gradient in parameter '" +
                                   (p.name().empty() ? std::string("<unnamed>") : p.name()) +
                                   "'");
        m[i] = cfg_.beta1 * m[i] + (T(1) - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (T(1) - cfg_.beta2) * g[i] * g[i];
        const T mhat = m[i] / bc1;
        const T vhat = v[i] / bc2;
        d[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  std::vector<TensorT<T>> params_;
  AdamConfig<T> cfg_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

// ---------------------------------------------------------------------------
// gradient check harness
// ---------------------------------------------------------------------------

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_err);
    return m;
  }
  bool pass(double tol) const { return worst() < tol; }
};

// Compares analytic gradients of a scalar-valued forward function against
// central finite differences, per checked tensor. The forward closure must
// rebuild the graph from the current tensor contents on every call.
inline GradCheckReport gradcheck(const std::function<Tensor64()>& forward,
                                 std::vector<Tensor64> checked, double h = 1e-5) {
  GradCheckReport report;
  for (auto& p : checked) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  Tensor64 loss = forward();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& p : checked)
    analytic.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.data().size(), 0.0));

  for (size_t pi = 0; pi < checked.size(); ++pi) {
    auto& p = checked[pi];
    GradCheckEntry entry;
    entry.name = p.name().empty() ? "param" + std::to_string(pi) : p.name();
    for (size_t i = 0; i < p.data().size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double fp = forward().item();
      p.data()[i] = saved - h;
      const double fm = forward().item();
      p.data()[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-2});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace frt

#endif  // FRT_TENSOR_HPP
