#pragma once
// Phase-aware separation loss: MSE plus alpha times the phase MSE
// mean((cos t - cos t')^2 + (sin t - sin t')^2), phases from the analytic
// signal per receiver trace. The gradient flows through the Hilbert
// transform via its exact adjoint.

#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/tensor.hpp"

namespace fastusct {

// theta_i = atan2(hilbert(x)_i, x_i) in (-pi, pi]; 0/0 maps to 0.
std::vector<double> phase(const std::vector<double>& trace);

// Frame-level loss over matching stacks of frames.
double loss(const std::vector<RfFrame>& pred,
            const std::vector<RfFrame>& label, double alpha);

template <typename T>
struct LossGrad {
  double value = 0.0;
  Tensor4<T> grad;  // d loss / d pred
};

// Loss and gradient over (n, c, h, w) stacks; each (n, c, h) row along w is
// one trace. Samples with analytic amplitude below 1e-12 use the
// cos = 1, sin = 0 convention and contribute no phase gradient.
template <typename T>
LossGrad<T> loss_and_grad(const Tensor4<T>& pred, const Tensor4<T>& label,
                          double alpha);

}  // namespace fastusct
