#include "fastusct/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <thread>

#include "fastusct/container.hpp"
#include "fastusct/errors.hpp"
#include "fastusct/rng.hpp"

namespace fastusct {

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kNormMomentum = 0.1;

void parallel_for_items(int count, int n_threads,
                        const std::function<void(int)>& fn) {
  n_threads = std::min(n_threads, count);
  if (n_threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < count; i += n_threads) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

// c (M x N) += a (M x K) * b (K x N), N-blocked for cache residency.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m_rows, int k_len, int n_cols) {
  constexpr int kBlock = 4096;
  for (int n0 = 0; n0 < n_cols; n0 += kBlock) {
    const int nn = std::min(kBlock, n_cols - n0);
    for (int m = 0; m < m_rows; ++m) {
      T* crow = c + static_cast<std::size_t>(m) * n_cols + n0;
      const T* arow = a + static_cast<std::size_t>(m) * k_len;
      for (int k = 0; k < k_len; ++k) {
        const T av = arow[k];
        const T* brow = b + static_cast<std::size_t>(k) * n_cols + n0;
        for (int j = 0; j < nn; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

// c (M x K) += a (M x N) * b^T where b is (K x N). The dot products use a
// fixed 8-lane partial-sum split so the reduction order is defined (and the
// loop vectorizes) independent of the surrounding build flags.
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m_rows, int k_len, int n_cols) {
  constexpr int kLanes = 8;
  for (int m = 0; m < m_rows; ++m) {
    const T* arow = a + static_cast<std::size_t>(m) * n_cols;
    for (int k = 0; k < k_len; ++k) {
      const T* brow = b + static_cast<std::size_t>(k) * n_cols;
      T lane[kLanes] = {};
      int j = 0;
      for (; j + kLanes <= n_cols; j += kLanes)
        for (int v = 0; v < kLanes; ++v) lane[v] += arow[j + v] * brow[j + v];
      T acc = T(0);
      for (; j < n_cols; ++j) acc += arow[j] * brow[j];
      for (int v = 0; v < kLanes; ++v) acc += lane[v];
      c[static_cast<std::size_t>(m) * k_len + k] += acc;
    }
  }
}

// c (K x N) += a^T * b where a is (M x K), b is (M x N).
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m_rows, int k_len, int n_cols) {
  constexpr int kBlock = 4096;
  for (int n0 = 0; n0 < n_cols; n0 += kBlock) {
    const int nn = std::min(kBlock, n_cols - n0);
    for (int k = 0; k < k_len; ++k) {
      T* crow = c + static_cast<std::size_t>(k) * n_cols + n0;
      for (int m = 0; m < m_rows; ++m) {
        const T av = a[static_cast<std::size_t>(m) * k_len + k];
        const T* brow = b + static_cast<std::size_t>(m) * n_cols + n0;
        for (int j = 0; j < nn; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

// Column matrix rows ordered (channel, ky, kx); circular in h, zero in w.
template <typename T>
void im2col(const Tensor4<T>& x, int item, int kernel, int dil_h, int dil_w,
            T* col) {
  const int h = x.h, w = x.w;
  const int kc = kernel / 2;
  const std::size_t plane = x.plane();
  std::size_t row = 0;
  for (int ci = 0; ci < x.c; ++ci) {
    const T* src = x.plane_ptr(item, ci);
    for (int ky = 0; ky < kernel; ++ky) {
      const int dy = (ky - kc) * dil_h;
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        const int dxo = (kx - kc) * dil_w;
        T* dst = col + row * plane;
        const int x_lo = std::max(0, -dxo);
        const int x_hi = std::min(w, w - dxo);
        for (int y = 0; y < h; ++y) {
          const int sy = ((y + dy) % h + h) % h;
          const T* srow = src + static_cast<std::size_t>(sy) * w;
          T* drow = dst + static_cast<std::size_t>(y) * w;
          std::fill(drow, drow + x_lo, T(0));
          std::copy(srow + x_lo + dxo, srow + x_hi + dxo, drow + x_lo);
          std::fill(drow + std::max(x_lo, x_hi), drow + w, T(0));
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
template <typename T>
void col2im_add(const T* col, int channels, int h, int w, int kernel,
                int dil_h, int dil_w, T* dst) {
  const int kc = kernel / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::size_t row = 0;
  for (int ci = 0; ci < channels; ++ci) {
    T* dplane = dst + ci * plane;
    for (int ky = 0; ky < kernel; ++ky) {
      const int dy = (ky - kc) * dil_h;
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        const int dxo = (kx - kc) * dil_w;
        const T* srcrow = col + row * plane;
        const int x_lo = std::max(0, -dxo);
        const int x_hi = std::min(w, w - dxo);
        for (int y = 0; y < h; ++y) {
          const int sy = ((y + dy) % h + h) % h;
          T* drow = dplane + static_cast<std::size_t>(sy) * w + dxo;
          const T* srow = srcrow + static_cast<std::size_t>(y) * w;
          for (int xx = x_lo; xx < x_hi; ++xx) drow[xx] += srow[xx];
        }
      }
    }
  }
}

template <typename T>
void conv_forward(Layer<T>& l, const Tensor4<T>& x, int kernel, int dil_h,
                  int dil_w, int n_threads) {
  if (x.c != l.in_ch) throw ShapeError("convolution input channel mismatch");
  l.out = Tensor4<T>(x.n, l.out_ch, x.h, x.w);
  const int k_len = l.in_ch * kernel * kernel;
  const std::size_t plane = x.plane();
  parallel_for_items(x.n, n_threads, [&](int item) {
    std::vector<T> col(static_cast<std::size_t>(k_len) * plane);
    im2col(x, item, kernel, dil_h, dil_w, col.data());
    T* out = l.out.plane_ptr(item, 0);
    gemm(l.weight.data(), col.data(), out, l.out_ch, k_len,
         static_cast<int>(plane));
    for (int co = 0; co < l.out_ch; ++co) {
      T* orow = out + co * plane;
      const T b = l.bias[co];
      for (std::size_t j = 0; j < plane; ++j) orow[j] += b;
    }
  });
}

template <typename T>
void conv_backward(Layer<T>& l, const Tensor4<T>& x, const Tensor4<T>& g,
                   Tensor4<T>& gx, int kernel, int dil_h, int dil_w,
                   int n_threads) {
  const int k_len = l.in_ch * kernel * kernel;
  const std::size_t plane = x.plane();
  // Per-item weight/bias contributions, reduced in item order afterwards so
  // the result does not depend on the thread count.
  std::vector<std::vector<T>> wg(x.n), bg(x.n);
  parallel_for_items(x.n, n_threads, [&](int item) {
    std::vector<T> col(static_cast<std::size_t>(k_len) * plane);
    im2col(x, item, kernel, dil_h, dil_w, col.data());
    const T* gout = g.plane_ptr(item, 0);
    wg[item].assign(static_cast<std::size_t>(l.out_ch) * k_len, T(0));
    bg[item].assign(l.out_ch, T(0));
    gemm_nt(gout, col.data(), wg[item].data(), l.out_ch, k_len,
            static_cast<int>(plane));
    for (int co = 0; co < l.out_ch; ++co) {
      double acc = 0.0;
      const T* grow = gout + co * plane;
      for (std::size_t j = 0; j < plane; ++j) acc += grow[j];
      bg[item][co] = static_cast<T>(acc);
    }
    std::vector<T> gcol(static_cast<std::size_t>(k_len) * plane, T(0));
    gemm_tn(l.weight.data(), gout, gcol.data(), l.out_ch, k_len,
            static_cast<int>(plane));
    col2im_add(gcol.data(), l.in_ch, x.h, x.w, kernel, dil_h, dil_w,
               gx.plane_ptr(item, 0));
  });
  for (int item = 0; item < x.n; ++item) {
    for (std::size_t i = 0; i < l.wgrad.size(); ++i) l.wgrad[i] += wg[item][i];
    for (std::size_t i = 0; i < l.bgrad.size(); ++i) l.bgrad[i] += bg[item][i];
  }
}

template <typename T>
void norm_forward(Layer<T>& l, const Tensor4<T>& x, bool training) {
  const int ch = static_cast<int>(l.gamma.size());
  if (x.c != ch) throw ShapeError("normalization channel mismatch");
  l.out = Tensor4<T>(x.n, x.c, x.h, x.w);
  const std::size_t plane = x.plane();
  const std::size_t count = static_cast<std::size_t>(x.n) * plane;
  for (int c = 0; c < ch; ++c) {
    double mean, inv_std;
    if (training) {
      double sum = 0.0;
      for (int item = 0; item < x.n; ++item) {
        const T* p = x.plane_ptr(item, c);
        for (std::size_t j = 0; j < plane; ++j) sum += p[j];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (int item = 0; item < x.n; ++item) {
        const T* p = x.plane_ptr(item, c);
        for (std::size_t j = 0; j < plane; ++j) {
          const double d = p[j] - mean;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(count);
      inv_std = 1.0 / std::sqrt(var + kNormEps);
      // Unbiased variance feeds the running estimate (biased normalizes).
      const double unbiased =
          count > 1 ? var * static_cast<double>(count) / (count - 1) : var;
      l.run_mean[c] = static_cast<T>((1.0 - kNormMomentum) * l.run_mean[c] +
                                     kNormMomentum * mean);
      l.run_var[c] = static_cast<T>((1.0 - kNormMomentum) * l.run_var[c] +
                                    kNormMomentum * unbiased);
    } else {
      mean = l.run_mean[c];
      inv_std = 1.0 / std::sqrt(static_cast<double>(l.run_var[c]) + kNormEps);
    }
    l.saved_mean[c] = mean;
    l.saved_inv_std[c] = inv_std;
    const double scale = l.gamma[c] * inv_std;
    const double shift = l.beta[c] - scale * mean;
    for (int item = 0; item < x.n; ++item) {
      const T* p = x.plane_ptr(item, c);
      T* o = l.out.plane_ptr(item, c);
      for (std::size_t j = 0; j < plane; ++j)
        o[j] = static_cast<T>(scale * p[j] + shift);
    }
  }
}

template <typename T>
void norm_backward(Layer<T>& l, const Tensor4<T>& x, const Tensor4<T>& g,
                   Tensor4<T>& gx, bool training) {
  const int ch = static_cast<int>(l.gamma.size());
  const std::size_t plane = x.plane();
  const double count = static_cast<double>(x.n) * static_cast<double>(plane);
  for (int c = 0; c < ch; ++c) {
    const double mean = l.saved_mean[c];
    const double inv = l.saved_inv_std[c];
    double s1 = 0.0, s2 = 0.0;
    for (int item = 0; item < x.n; ++item) {
      const T* xp = x.plane_ptr(item, c);
      const T* gp = g.plane_ptr(item, c);
      for (std::size_t j = 0; j < plane; ++j) {
        s1 += gp[j];
        s2 += gp[j] * (xp[j] - mean) * inv;
      }
    }
    l.ggrad[c] += static_cast<T>(s2);
    l.bgrad_n[c] += static_cast<T>(s1);
    const double gscale = l.gamma[c] * inv;
    for (int item = 0; item < x.n; ++item) {
      const T* xp = x.plane_ptr(item, c);
      const T* gp = g.plane_ptr(item, c);
      T* op = gx.plane_ptr(item, c);
      if (training) {
        for (std::size_t j = 0; j < plane; ++j) {
          const double xhat = (xp[j] - mean) * inv;
          op[j] += static_cast<T>(gscale *
                                  (gp[j] - s1 / count - xhat * s2 / count));
        }
      } else {
        for (std::size_t j = 0; j < plane; ++j)
          op[j] += static_cast<T>(gscale * gp[j]);
      }
    }
  }
}

}  // namespace

ArchDescriptor parse_arch(const std::string& text) {
  ArchDescriptor arch;
  arch.channels.clear();
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      arch.channels.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ArchitectureError("bad architecture descriptor: " + text);
    }
  }
  if (arch.channels.empty())
    throw ArchitectureError("architecture descriptor has no levels");
  return arch;
}

std::string format_arch(const ArchDescriptor& arch) {
  std::string out;
  for (std::size_t i = 0; i < arch.channels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(arch.channels[i]);
  }
  return out;
}

template <typename T>
int UNet<T>::pool_factor() const {
  int f = 1;
  for (std::size_t i = 1; i < arch.channels.size(); ++i) f *= 2;
  return f;
}

template <typename T>
Tensor4<T> UNet<T>::forward(const Tensor4<T>& input, bool training) {
  const int factor = pool_factor();
  if (input.h % factor != 0 || input.w % factor != 0)
    throw ShapeError("input extents must divide by the pooling factor " +
                     std::to_string(factor));
  last_training_ = training;
  const auto src_of = [&](int idx) -> const Tensor4<T>& {
    return idx < 0 ? input : layers[idx].out;
  };
  for (Layer<T>& l : layers) {
    const Tensor4<T>& x = src_of(l.src0);
    switch (l.kind) {
      case OpKind::conv:
        conv_forward(l, x, kernel, dil_h, dil_w, n_threads);
        break;
      case OpKind::norm:
        norm_forward(l, x, training);
        break;
      case OpKind::relu: {
        l.out = Tensor4<T>(x.n, x.c, x.h, x.w);
        for (std::size_t i = 0; i < x.size(); ++i)
          l.out.v[i] = x.v[i] > T(0) ? x.v[i] : T(0);
        break;
      }
      case OpKind::tanh_act: {
        l.out = Tensor4<T>(x.n, x.c, x.h, x.w);
        for (std::size_t i = 0; i < x.size(); ++i)
          l.out.v[i] = std::tanh(x.v[i]);
        break;
      }
      case OpKind::pool: {
        if (x.h % 2 != 0 || x.w % 2 != 0)
          throw ShapeError("pooling needs even extents");
        l.out = Tensor4<T>(x.n, x.c, x.h / 2, x.w / 2);
        l.pool_src.assign(l.out.size(), 0);
        std::size_t o = 0;
        for (int item = 0; item < x.n; ++item) {
          for (int c = 0; c < x.c; ++c) {
            const T* p = x.plane_ptr(item, c);
            for (int y = 0; y < l.out.h; ++y) {
              for (int xx = 0; xx < l.out.w; ++xx, ++o) {
                int best = (2 * y) * x.w + 2 * xx;
                T bv = p[best];
                const int cand[3] = {(2 * y) * x.w + 2 * xx + 1,
                                     (2 * y + 1) * x.w + 2 * xx,
                                     (2 * y + 1) * x.w + 2 * xx + 1};
                for (int idx : cand) {
                  if (p[idx] > bv) {
                    bv = p[idx];
                    best = idx;
                  }
                }
                l.out.v[o] = bv;
                l.pool_src[o] = best;
              }
            }
          }
        }
        break;
      }
      case OpKind::upsample: {
        l.out = Tensor4<T>(x.n, x.c, x.h * 2, x.w * 2);
        for (int item = 0; item < x.n; ++item) {
          for (int c = 0; c < x.c; ++c) {
            const T* p = x.plane_ptr(item, c);
            T* op = l.out.plane_ptr(item, c);
            for (int y = 0; y < l.out.h; ++y) {
              const T* srow = p + static_cast<std::size_t>(y / 2) * x.w;
              T* drow = op + static_cast<std::size_t>(y) * l.out.w;
              for (int xx = 0; xx < l.out.w; ++xx) drow[xx] = srow[xx / 2];
            }
          }
        }
        break;
      }
      case OpKind::concat: {
        const Tensor4<T>& y = src_of(l.src1);
        if (x.n != y.n || x.h != y.h || x.w != y.w)
          throw ShapeError("concat inputs disagree in shape");
        l.out = Tensor4<T>(x.n, x.c + y.c, x.h, x.w);
        for (int item = 0; item < x.n; ++item) {
          std::copy(x.plane_ptr(item, 0), x.plane_ptr(item, 0) + x.c * x.plane(),
                    l.out.plane_ptr(item, 0));
          std::copy(y.plane_ptr(item, 0), y.plane_ptr(item, 0) + y.c * y.plane(),
                    l.out.plane_ptr(item, x.c));
        }
        break;
      }
    }
  }
  return layers.back().out;
}

template <typename T>
Tensor4<T> UNet<T>::backward(const Tensor4<T>& input,
                             const Tensor4<T>& grad_out) {
  const Tensor4<T>& final_out = layers.back().out;
  if (grad_out.n != final_out.n || grad_out.c != final_out.c ||
      grad_out.h != final_out.h || grad_out.w != final_out.w)
    throw ShapeError("output gradient shape mismatch");

  std::vector<Tensor4<T>> gact(layers.size());
  Tensor4<T> ginput(input.n, input.c, input.h, input.w);
  gact.back() = grad_out;

  const auto src_of = [&](int idx) -> const Tensor4<T>& {
    return idx < 0 ? input : layers[idx].out;
  };
  const auto grad_of = [&](int idx) -> Tensor4<T>& {
    if (idx < 0) return ginput;
    Tensor4<T>& g = gact[idx];
    const Tensor4<T>& o = layers[idx].out;
    if (g.v.empty()) g = Tensor4<T>(o.n, o.c, o.h, o.w);
    return g;
  };

  for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
    Layer<T>& l = layers[i];
    if (gact[i].v.empty()) {
      l.out = Tensor4<T>();
      continue;
    }
    const Tensor4<T>& g = gact[i];
    const Tensor4<T>& x = src_of(l.src0);
    Tensor4<T>& gx = grad_of(l.src0);
    switch (l.kind) {
      case OpKind::conv:
        conv_backward(l, x, g, gx, kernel, dil_h, dil_w, n_threads);
        break;
      case OpKind::norm:
        norm_backward(l, x, g, gx, last_training_);
        break;
      case OpKind::relu:
        for (std::size_t j = 0; j < g.size(); ++j)
          if (l.out.v[j] > T(0)) gx.v[j] += g.v[j];
        break;
      case OpKind::tanh_act:
        for (std::size_t j = 0; j < g.size(); ++j)
          gx.v[j] += g.v[j] * (T(1) - l.out.v[j] * l.out.v[j]);
        break;
      case OpKind::pool: {
        std::size_t o = 0;
        for (int item = 0; item < g.n; ++item) {
          for (int c = 0; c < g.c; ++c) {
            T* dst = gx.plane_ptr(item, c);
            for (std::size_t j = 0; j < g.plane(); ++j, ++o)
              dst[l.pool_src[o]] += g.v[o];
          }
        }
        break;
      }
      case OpKind::upsample: {
        for (int item = 0; item < g.n; ++item) {
          for (int c = 0; c < g.c; ++c) {
            const T* gp = g.plane_ptr(item, c);
            T* dst = gx.plane_ptr(item, c);
            for (int y = 0; y < g.h; ++y) {
              const T* grow = gp + static_cast<std::size_t>(y) * g.w;
              T* drow = dst + static_cast<std::size_t>(y / 2) * x.w;
              for (int xx = 0; xx < g.w; ++xx) drow[xx / 2] += grow[xx];
            }
          }
        }
        break;
      }
      case OpKind::concat: {
        const Tensor4<T>& y = src_of(l.src1);
        Tensor4<T>& gy = grad_of(l.src1);
        for (int item = 0; item < g.n; ++item) {
          const T* gp = g.plane_ptr(item, 0);
          T* dx = gx.plane_ptr(item, 0);
          for (std::size_t j = 0; j < x.c * x.plane(); ++j) dx[j] += gp[j];
          const T* gp2 = g.plane_ptr(item, x.c);
          T* dy = gy.plane_ptr(item, 0);
          for (std::size_t j = 0; j < y.c * y.plane(); ++j) dy[j] += gp2[j];
        }
        break;
      }
    }
    l.out = Tensor4<T>();
    gact[i] = Tensor4<T>();
  }
  return ginput;
}

template <typename T>
void UNet<T>::zero_grad() {
  for (Layer<T>& l : layers) {
    std::fill(l.wgrad.begin(), l.wgrad.end(), T(0));
    std::fill(l.bgrad.begin(), l.bgrad.end(), T(0));
    std::fill(l.ggrad.begin(), l.ggrad.end(), T(0));
    std::fill(l.bgrad_n.begin(), l.bgrad_n.end(), T(0));
  }
}

template <typename T>
std::vector<ParamView<T>> UNet<T>::trainable_params() {
  std::vector<ParamView<T>> out;
  for (Layer<T>& l : layers) {
    if (l.kind == OpKind::conv) {
      out.push_back({l.weight.data(), l.wgrad.data(), l.weight.size()});
      out.push_back({l.bias.data(), l.bgrad.data(), l.bias.size()});
    } else if (l.kind == OpKind::norm) {
      out.push_back({l.gamma.data(), l.ggrad.data(), l.gamma.size()});
      out.push_back({l.beta.data(), l.bgrad_n.data(), l.beta.size()});
    }
  }
  return out;
}

template <typename T>
std::vector<ParamView<T>> UNet<T>::state_views() {
  std::vector<ParamView<T>> out;
  for (Layer<T>& l : layers) {
    if (l.kind == OpKind::conv) {
      out.push_back({l.weight.data(), l.wgrad.data(), l.weight.size()});
      out.push_back({l.bias.data(), l.bgrad.data(), l.bias.size()});
    } else if (l.kind == OpKind::norm) {
      out.push_back({l.gamma.data(), l.ggrad.data(), l.gamma.size()});
      out.push_back({l.beta.data(), l.bgrad_n.data(), l.beta.size()});
      out.push_back({l.run_mean.data(), nullptr, l.run_mean.size()});
      out.push_back({l.run_var.data(), nullptr, l.run_var.size()});
    }
  }
  return out;
}

template <typename T>
std::size_t UNet<T>::parameter_count() {
  std::size_t total = 0;
  for (const ParamView<T>& p : trainable_params()) total += p.count;
  return total;
}

template <typename T>
UNet<T> build_model(const ArchDescriptor& arch, int outputs,
                    std::uint64_t seed) {
  if (arch.channels.empty())
    throw ArchitectureError("architecture needs at least one level");
  for (int c : arch.channels)
    if (c <= 0) throw ArchitectureError("channel widths must be positive");
  if (arch.kernel < 1 || arch.kernel % 2 == 0)
    throw ArchitectureError("kernel size must be odd");
  if (outputs < 1) throw ArchitectureError("output channel count must be >= 1");

  UNet<T> net;
  net.arch = arch;
  net.outputs = outputs;
  net.kernel = arch.kernel;
  Rng rng(seed, "weights");

  const auto add_conv = [&](int src, int cin, int cout) {
    Layer<T> l;
    l.kind = OpKind::conv;
    l.src0 = src;
    l.in_ch = cin;
    l.out_ch = cout;
    const std::size_t wc =
        static_cast<std::size_t>(cout) * cin * arch.kernel * arch.kernel;
    l.weight.resize(wc);
    const double stddev =
        std::sqrt(2.0 / (static_cast<double>(cin) * arch.kernel * arch.kernel));
    for (T& v : l.weight) v = static_cast<T>(rng.normal() * stddev);
    l.bias.assign(cout, T(0));
    l.wgrad.assign(wc, T(0));
    l.bgrad.assign(cout, T(0));
    net.layers.push_back(std::move(l));
    return static_cast<int>(net.layers.size()) - 1;
  };
  const auto add_norm = [&](int src, int ch) {
    Layer<T> l;
    l.kind = OpKind::norm;
    l.src0 = src;
    l.gamma.assign(ch, T(1));
    l.beta.assign(ch, T(0));
    l.run_mean.assign(ch, T(0));
    l.run_var.assign(ch, T(1));
    l.ggrad.assign(ch, T(0));
    l.bgrad_n.assign(ch, T(0));
    l.saved_mean.assign(ch, 0.0);
    l.saved_inv_std.assign(ch, 1.0);
    net.layers.push_back(std::move(l));
    return static_cast<int>(net.layers.size()) - 1;
  };
  const auto add_simple = [&](OpKind kind, int src) {
    Layer<T> l;
    l.kind = kind;
    l.src0 = src;
    net.layers.push_back(std::move(l));
    return static_cast<int>(net.layers.size()) - 1;
  };
  const auto add_concat = [&](int a, int b) {
    Layer<T> l;
    l.kind = OpKind::concat;
    l.src0 = a;
    l.src1 = b;
    net.layers.push_back(std::move(l));
    return static_cast<int>(net.layers.size()) - 1;
  };
  const auto conv_block = [&](int src, int cin, int cout) {
    int cur = add_conv(src, cin, cout);
    cur = add_norm(cur, cout);
    return add_simple(OpKind::relu, cur);
  };

  const int levels = static_cast<int>(arch.channels.size());
  std::vector<int> skips;
  int cur = -1;
  int cur_ch = 1;
  for (int level = 0; level < levels; ++level) {
    if (level > 0) cur = add_simple(OpKind::pool, cur);
    cur = conv_block(cur, cur_ch, arch.channels[level]);
    cur = conv_block(cur, arch.channels[level], arch.channels[level]);
    cur_ch = arch.channels[level];
    if (level < levels - 1) skips.push_back(cur);
  }
  for (int level = levels - 2; level >= 0; --level) {
    cur = add_simple(OpKind::upsample, cur);
    cur = add_concat(cur, skips[level]);
    cur = conv_block(cur, cur_ch + arch.channels[level], arch.channels[level]);
    cur = conv_block(cur, arch.channels[level], arch.channels[level]);
    cur_ch = arch.channels[level];
  }
  cur = add_conv(cur, cur_ch, outputs);
  add_simple(OpKind::tanh_act, cur);
  return net;
}

template <typename T>
Tensor4<T> frame_to_tensor(const RfFrame& frame) {
  Tensor4<T> t(1, 1, frame.n_receivers, frame.n_samples);
  for (std::size_t i = 0; i < frame.samples.size(); ++i) {
    if (!(frame.samples[i] >= -1.0f && frame.samples[i] <= 1.0f))
      throw InputError("network input must be normalized to [-1, 1]");
    t.v[i] = static_cast<T>(frame.samples[i]);
  }
  return t;
}

template <typename T>
std::vector<RfFrame> forward_frame(UNet<T>& model, const RfFrame& frame,
                                   bool training) {
  const Tensor4<T> in = frame_to_tensor<T>(frame);
  const Tensor4<T> out = model.forward(in, training);
  std::vector<RfFrame> frames(model.outputs);
  for (int p = 0; p < model.outputs; ++p) {
    RfFrame& f = frames[p];
    f.n_receivers = frame.n_receivers;
    f.n_samples = frame.n_samples;
    f.sampling_rate = frame.sampling_rate;
    f.t0 = frame.t0;
    f.samples.resize(static_cast<std::size_t>(f.n_receivers) * f.n_samples);
    const T* src = out.plane_ptr(0, p);
    for (std::size_t i = 0; i < f.samples.size(); ++i)
      f.samples[i] = static_cast<float>(src[i]);
  }
  return frames;
}

template <typename T>
std::vector<RfFrame> separate_acquisition(UNet<T>& model,
                                          const std::vector<RfFrame>& frames,
                                          const FiringPlan& plan) {
  if (model.outputs != plan.parallelism)
    throw ArchitectureError("model output count does not match plan P");
  if (frames.size() != plan.groups.size())
    throw ShapeError("frame count does not match plan group count");
  std::vector<RfFrame> out;
  for (std::size_t gi = 0; gi < frames.size(); ++gi) {
    std::vector<int> group = plan.groups[gi];
    std::sort(group.begin(), group.end());
    if (!frames[gi].tx_set.empty()) {
      std::vector<int> got = frames[gi].tx_set;
      std::sort(got.begin(), got.end());
      if (got != group)
        throw InputError("frame tx_set disagrees with the firing plan");
    }
    std::vector<RfFrame> separated = forward_frame(model, frames[gi], false);
    for (std::size_t p = 0; p < separated.size(); ++p) {
      separated[p].tx_set = {group[p]};
      out.push_back(std::move(separated[p]));
    }
  }
  return out;
}

template <typename T>
void save_model(const std::string& path, UNet<T>& model) {
  Container c;
  c.kind = PayloadKind::model;
  c.meta["channels"] = format_arch(model.arch);
  c.meta["kernel"] = std::to_string(model.kernel);
  c.meta["outputs"] = std::to_string(model.outputs);
  std::size_t total = 0;
  const auto views = model.state_views();
  for (const auto& v : views) total += v.count;
  c.dims = {static_cast<std::uint32_t>(total)};
  c.data.reserve(total);
  for (const auto& v : views)
    for (std::size_t i = 0; i < v.count; ++i)
      c.data.push_back(static_cast<float>(v.value[i]));
  save_container(path, c);
}

template <typename T>
UNet<T> load_model(const std::string& path) {
  const Container c = load_container(path);
  if (c.kind != PayloadKind::model)
    throw IoError("container does not hold a model: " + path);
  ArchDescriptor arch = parse_arch(c.meta.at("channels"));
  arch.kernel = std::stoi(c.meta.at("kernel"));
  const int outputs = std::stoi(c.meta.at("outputs"));
  UNet<T> model = build_model<T>(arch, outputs, 0);
  std::size_t offset = 0;
  for (const auto& v : model.state_views()) {
    if (offset + v.count > c.data.size())
      throw TruncationError("model payload shorter than architecture needs");
    for (std::size_t i = 0; i < v.count; ++i)
      v.value[i] = static_cast<T>(c.data[offset + i]);
    offset += v.count;
  }
  if (offset != c.data.size())
    throw ShapeError("model payload longer than architecture needs");
  return model;
}

template class UNet<float>;
template class UNet<double>;
template UNet<float> build_model<float>(const ArchDescriptor&, int,
                                        std::uint64_t);
template UNet<double> build_model<double>(const ArchDescriptor&, int,
                                          std::uint64_t);
template Tensor4<float> frame_to_tensor<float>(const RfFrame&);
template Tensor4<double> frame_to_tensor<double>(const RfFrame&);
template std::vector<RfFrame> forward_frame<float>(UNet<float>&,
                                                   const RfFrame&, bool);
template std::vector<RfFrame> forward_frame<double>(UNet<double>&,
                                                    const RfFrame&, bool);
template std::vector<RfFrame> separate_acquisition<float>(
    UNet<float>&, const std::vector<RfFrame>&, const FiringPlan&);
template std::vector<RfFrame> separate_acquisition<double>(
    UNet<double>&, const std::vector<RfFrame>&, const FiringPlan&);
template void save_model<float>(const std::string&, UNet<float>&);
template void save_model<double>(const std::string&, UNet<double>&);
template UNet<float> load_model<float>(const std::string&);
template UNet<double> load_model<double>(const std::string&);

}  // namespace fastusct
