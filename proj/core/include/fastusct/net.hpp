#pragma once
// Convolutional encoder-decoder for blind RF separation, with hand-rolled
// reverse-mode gradients over a fixed layer vocabulary. Every convolution is
// kernel x kernel with dilation 1 along receivers and 4 along time, circular
// padding along receivers and zero padding along time. Hidden activations
// are norm -> ReLU; the output layer is a convolution followed by tanh.
//
// The class is templated on the scalar type: float for production training,
// double for finite-difference gradient checks.

#include <cstdint>
#include <string>
#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/tensor.hpp"

namespace fastusct {

struct ArchDescriptor {
  std::vector<int> channels = {16, 32, 64};  // widths per resolution level
  int kernel = 3;
};

// "16,32,64" <-> descriptor; used by configs and model checkpoints.
ArchDescriptor parse_arch(const std::string& text);
std::string format_arch(const ArchDescriptor& arch);

enum class OpKind : std::uint8_t {
  conv,
  norm,
  relu,
  tanh_act,
  pool,
  upsample,
  concat,
};

template <typename T>
struct ParamView {
  T* value = nullptr;
  T* grad = nullptr;  // null for non-trainable state (running statistics)
  std::size_t count = 0;
};

template <typename T>
struct Layer {
  OpKind kind;
  int src0 = -1;  // producing layer index, -1 = network input
  int src1 = -1;  // second input (concat only)
  // conv
  int in_ch = 0, out_ch = 0;
  std::vector<T> weight, bias, wgrad, bgrad;
  // norm (batch normalization, eps 1e-5, running momentum 0.1)
  std::vector<T> gamma, beta, run_mean, run_var, ggrad, bgrad_n;
  std::vector<double> saved_mean, saved_inv_std;  // batch stats of last forward
  // pool: flat argmax into the source plane, per output element
  std::vector<int> pool_src;
  // forward activation of this layer
  Tensor4<T> out;
};

template <typename T>
class UNet {
 public:
  ArchDescriptor arch;
  int outputs = 1;
  int kernel = 3;
  int dil_h = 1, dil_w = 4;
  int n_threads = 1;
  std::vector<Layer<T>> layers;

  // 2^(levels-1): both input extents must divide by this.
  int pool_factor() const;

  // Runs the graph; keeps activations for a following backward().
  // training=true uses batch statistics and updates running statistics.
  Tensor4<T> forward(const Tensor4<T>& input, bool training);

  // Accumulates parameter gradients; frees stored activations as it goes.
  // Returns the gradient with respect to the network input.
  Tensor4<T> backward(const Tensor4<T>& input, const Tensor4<T>& grad_out);

  void zero_grad();
  std::vector<ParamView<T>> trainable_params();
  // All persistent state in serialization order (params + running stats).
  std::vector<ParamView<T>> state_views();
  std::size_t parameter_count();

 private:
  bool last_training_ = false;
};

// Fan-in-scaled normal init (std = sqrt(2 / fan_in)), zero biases, identity
// norm, deterministic per seed. Throws ArchitectureError on a bad descriptor.
template <typename T>
UNet<T> build_model(const ArchDescriptor& arch, int outputs,
                    std::uint64_t seed);

// (1, 1, R, T) tensor from a frame; values must already lie in [-1, 1].
template <typename T>
Tensor4<T> frame_to_tensor(const RfFrame& frame);

// Inference (or training-mode) forward of one mixed frame into P frames.
// Output frames copy sampling_rate/t0; tx_set is left for the caller.
template <typename T>
std::vector<RfFrame> forward_frame(UNet<T>& model, const RfFrame& frame,
                                   bool training);

// Inference over a full acquisition: one P-mixed frame per firing group,
// outputs ordered (group, ascending transmitter within group) with tx_set
// filled in per output frame.
template <typename T>
std::vector<RfFrame> separate_acquisition(UNet<T>& model,
                                          const std::vector<RfFrame>& frames,
                                          const FiringPlan& plan);

// Checkpoints through the binary container (f32 payload, arch in metadata).
template <typename T>
void save_model(const std::string& path, UNet<T>& model);
template <typename T>
UNet<T> load_model(const std::string& path);

extern template class UNet<float>;
extern template class UNet<double>;

}  // namespace fastusct
