#include "fastusct/loss.hpp"

#include <cmath>
#include <cstddef>

#include "fastusct/errors.hpp"
#include "fastusct/fft.hpp"

namespace fastusct {

namespace {

constexpr double kAmpFloor = 1e-12;

// cos/sin of the analytic-signal phase with the zero-amplitude convention.
void unit_phase(const std::vector<double>& y, const std::vector<double>& h,
                std::vector<double>& c, std::vector<double>& s) {
  const std::size_t n = y.size();
  c.resize(n);
  s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double amp = std::sqrt(y[i] * y[i] + h[i] * h[i]);
    if (amp < kAmpFloor) {
      c[i] = 1.0;
      s[i] = 0.0;
    } else {
      c[i] = y[i] / amp;
      s[i] = h[i] / amp;
    }
  }
}

}  // namespace

std::vector<double> phase(const std::vector<double>& trace) {
  const std::vector<double> h = hilbert(trace);
  std::vector<double> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] == 0.0 && h[i] == 0.0)
      out[i] = 0.0;
    else
      out[i] = std::atan2(h[i], trace[i]);
  }
  return out;
}

template <typename T>
LossGrad<T> loss_and_grad(const Tensor4<T>& pred, const Tensor4<T>& label,
                          double alpha) {
  if (pred.n != label.n || pred.c != label.c || pred.h != label.h ||
      pred.w != label.w)
    throw ShapeError("loss operands disagree in shape");
  if (alpha < 0.0) throw ConfigError("loss alpha must be non-negative");

  LossGrad<T> result;
  result.grad = Tensor4<T>(pred.n, pred.c, pred.h, pred.w);
  const int w = pred.w;
  const double total = static_cast<double>(pred.size());
  double mse = 0.0;
  double pmse = 0.0;

  std::vector<double> y(w), lab(w), cy, sy, cl, sl, u(w), gy(w);
  for (int item = 0; item < pred.n; ++item) {
    for (int ch = 0; ch < pred.c; ++ch) {
      for (int row = 0; row < pred.h; ++row) {
        const T* prow =
            pred.plane_ptr(item, ch) + static_cast<std::size_t>(row) * w;
        const T* lrow =
            label.plane_ptr(item, ch) + static_cast<std::size_t>(row) * w;
        for (int i = 0; i < w; ++i) {
          y[i] = prow[i];
          lab[i] = lrow[i];
        }
        const std::vector<double> hy = hilbert(y);
        const std::vector<double> hl = hilbert(lab);
        unit_phase(y, hy, cy, sy);
        unit_phase(lab, hl, cl, sl);

        for (int i = 0; i < w; ++i) {
          const double diff = y[i] - lab[i];
          mse += diff * diff;
          const double dc = cl[i] - cy[i];
          const double ds = sl[i] - sy[i];
          pmse += dc * dc + ds * ds;
          gy[i] = 2.0 * diff / total;

          const double amp = std::sqrt(y[i] * y[i] + hy[i] * hy[i]);
          if (amp < kAmpFloor || alpha == 0.0) {
            u[i] = 0.0;
            continue;
          }
          const double gc = alpha * 2.0 * (cy[i] - cl[i]) / total;
          const double gs = alpha * 2.0 * (sy[i] - sl[i]) / total;
          const double a3 = amp * amp * amp;
          const double dcy_dy = hy[i] * hy[i] / a3;
          const double cross = -y[i] * hy[i] / a3;
          const double dsy_dh = y[i] * y[i] / a3;
          gy[i] += gc * dcy_dy + gs * cross;
          u[i] = gc * cross + gs * dsy_dh;
        }
        if (alpha > 0.0) {
          const std::vector<double> back = hilbert_adjoint(u);
          for (int i = 0; i < w; ++i) gy[i] += back[i];
        }
        T* grow = result.grad.plane_ptr(item, ch) +
                  static_cast<std::size_t>(row) * w;
        for (int i = 0; i < w; ++i) grow[i] = static_cast<T>(gy[i]);
      }
    }
  }
  result.value = mse / total + alpha * pmse / total;
  return result;
}

double loss(const std::vector<RfFrame>& pred,
            const std::vector<RfFrame>& label, double alpha) {
  if (pred.size() != label.size() || pred.empty())
    throw ShapeError("loss needs matching non-empty frame stacks");
  const int r = pred[0].n_receivers;
  const int t = pred[0].n_samples;
  Tensor4<double> p(1, static_cast<int>(pred.size()), r, t);
  Tensor4<double> l(1, static_cast<int>(pred.size()), r, t);
  for (std::size_t f = 0; f < pred.size(); ++f) {
    if (pred[f].n_receivers != r || pred[f].n_samples != t ||
        label[f].n_receivers != r || label[f].n_samples != t)
      throw ShapeError("loss frames disagree in shape");
    double* pd = p.plane_ptr(0, static_cast<int>(f));
    double* ld = l.plane_ptr(0, static_cast<int>(f));
    for (std::size_t i = 0; i < pred[f].samples.size(); ++i) {
      pd[i] = pred[f].samples[i];
      ld[i] = label[f].samples[i];
    }
  }
  return loss_and_grad(p, l, alpha).value;
}

template LossGrad<float> loss_and_grad<float>(const Tensor4<float>&,
                                              const Tensor4<float>&, double);
template LossGrad<double> loss_and_grad<double>(const Tensor4<double>&,
                                                const Tensor4<double>&,
                                                double);

}  // namespace fastusct
