#pragma once
// Dense batched (n, c, h, w) tensor in row-major order. h is the receiver
// axis and w the time axis throughout the separation network.

#include <cstddef>
#include <vector>

namespace fastusct {

template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  T& at(int in, int ic, int ih, int iw) {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
  }
  const T& at(int in, int ic, int ih, int iw) const {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
  }
  // Start of the (n, c) plane.
  T* plane_ptr(int in, int ic) {
    return v.data() + (static_cast<std::size_t>(in) * c + ic) * plane();
  }
  const T* plane_ptr(int in, int ic) const {
    return v.data() + (static_cast<std::size_t>(in) * c + ic) * plane();
  }
};

}  // namespace fastusct
