/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Small deterministic tensor engine with reverse-mode differentiation.
// Tensors are single-sample (no batch dimension); trainers loop over batches
// and accumulate parameter gradients in sample order, which keeps results
// bitwise reproducible. Compute is float in production; the double
// instantiation exists for the finite-difference test oracles.

#ifndef ACTIREP_NNCORE_HPP_
#define ACTIREP_NNCORE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace actirep::nn {

// Worker cap for the deterministic kernel-level parallelism. Any value
// yields bitwise-identical results; 1 disables threading.
void set_max_threads(int n);
int max_threads();

template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until touched by backward()
  bool requires_grad = false;

  // Producer bookkeeping for DetachedGraph detection.
  const void* producer_tape = nullptr;

  std::int64_t size() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
};

template <typename T>
using TensorPtr = std::shared_ptr<TensorT<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad = false);

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> data,
                         bool requires_grad = false);

enum class Padding { Same, Valid };
enum class Activation { Relu, Sigmoid, Tanh, Linear };
enum class LayerKind { Conv2d, Conv2dTranspose, Conv1d, Dense, Lstm, Activation };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int filters = 1;  // filters for convs, units for dense/lstm
  int kernel = 1;
  int stride = 1;
  Padding padding = Padding::Same;
  Activation activation = Activation::Linear;
  // Input sizing, needed by seeded_init: channels for convs, vector width
  // for dense/lstm.
  int input_channels = 1;
  int input_units = 1;
};

// Spatial size produced by a convolution.
int conv_output_size(int input, int kernel, int stride, Padding padding);

template <typename T>
class TapeT {
 public:
  explicit TapeT(bool recording = true) : recording_(recording) {}

  // Elementwise and shape ops.
  TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b);
  TensorPtr<T> scale(const TensorPtr<T>& x, T factor);
  TensorPtr<T> sum(const TensorPtr<T>& x);
  TensorPtr<T> relu(const TensorPtr<T>& x);
  TensorPtr<T> sigmoid(const TensorPtr<T>& x);
  TensorPtr<T> tanh_act(const TensorPtr<T>& x);
  TensorPtr<T> clamp(const TensorPtr<T>& x, T lo, T hi);
  TensorPtr<T> reshape(const TensorPtr<T>& x, std::vector<int> shape);
  TensorPtr<T> slice_row(const TensorPtr<T>& x, int row);  // [R,L] -> [L]
  TensorPtr<T> global_avg_pool(const TensorPtr<T>& x);     // [C,L] -> [C]

  // Layers. Weight layouts: dense w[out,in]; conv2d w[f,c,k,k];
  // conv2d_transpose w[c,f,k,k]; conv1d w[f,c,k]; lstm W[4h,in], U[4h,h],
  // b[4h] with gate order (input, forget, cell, output).
  TensorPtr<T> dense(const TensorPtr<T>& x, const TensorPtr<T>& w,
                     const TensorPtr<T>& b);
  TensorPtr<T> conv2d(const TensorPtr<T>& x, const TensorPtr<T>& w,
                      const TensorPtr<T>& b, int stride, Padding padding);
  TensorPtr<T> conv2d_transpose(const TensorPtr<T>& x, const TensorPtr<T>& w,
                                const TensorPtr<T>& b, int stride);
  TensorPtr<T> conv1d(const TensorPtr<T>& x, const TensorPtr<T>& w,
                      const TensorPtr<T>& b, int stride, Padding padding);
  std::pair<TensorPtr<T>, TensorPtr<T>> lstm_cell(
      const TensorPtr<T>& x, const TensorPtr<T>& h, const TensorPtr<T>& c,
      const TensorPtr<T>& w_input, const TensorPtr<T>& w_recurrent,
      const TensorPtr<T>& bias);

  // Losses and the latent-space ops.
  TensorPtr<T> reparameterize(const TensorPtr<T>& mu,
                              const TensorPtr<T>& log_var,
                              const std::vector<T>& noise);
  TensorPtr<T> bce_with_logits_sum(const TensorPtr<T>& logits,
                                   const TensorPtr<T>& target);
  TensorPtr<T> kl_std_normal_sum(const TensorPtr<T>& mu,
                                 const TensorPtr<T>& log_var);

  // Populates .grad on every tensor that participated in the recorded
  // graph, then releases the graph. Throws NotScalarLoss / DetachedGraph.
  void backward(const TensorPtr<T>& loss);

  void clear();
  std::size_t node_count() const { return nodes_.size(); }
  bool recording() const { return recording_; }

 private:
  struct Node {
    std::vector<TensorPtr<T>> tensors;  // inputs and outputs
    std::function<void()> backward_fn;
  };

  TensorPtr<T> make_output(std::vector<int> shape, bool needs_grad,
                           const char* op_name);
  void record(std::vector<TensorPtr<T>> tensors, std::function<void()> fn);
  TensorPtr<T> conv_generic(const TensorPtr<T>& x, const TensorPtr<T>& w,
                            const TensorPtr<T>& b, int channels, int h,
                            int w_dim, int filters, int kh, int kw, int sh,
                            int sw, Padding padding,
                            std::vector<int> out_shape);

  bool recording_;
  std::vector<Node> nodes_;
};

// Applies one layer per its spec. For Lstm the input is a [steps, in] matrix
// and the output is the final hidden state.
template <typename T>
TensorPtr<T> forward(TapeT<T>& tape, const LayerSpec& spec,
                     const std::vector<TensorPtr<T>>& params,
                     const TensorPtr<T>& input);

// Fan-based uniform initialization, bounds +-sqrt(6/(fan_in+fan_out));
// biases zero. Deterministic per (spec, seed). Returns [w, b] or
// [W, U, b] for lstm.
template <typename T>
std::vector<TensorPtr<T>> seeded_init(const LayerSpec& spec,
                                      std::uint64_t seed);

template <typename T>
struct AdamStateT {
  T learning_rate = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);
  std::int64_t step_count = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// Adaptive-moment update with bias correction. Moment buffers are created
// lazily on the first step and must match parameter shapes afterwards.
template <typename T>
void adam_step(AdamStateT<T>& state, const std::vector<TensorPtr<T>>& params,
               const std::vector<std::vector<T>>& grads);

using Tensor = TensorT<float>;
using Tape = TapeT<float>;
using AdamState = AdamStateT<float>;

// `NNCK` checkpoint format: magic, version u16 LE, tensor_count u32 LE; per
// tensor: name_len u16 + UTF-8 name, ndims u8, each dim u32 LE, f32 LE data.
void save_checkpoint(const std::map<std::string, TensorPtr<float>>& tensors,
                     const std::filesystem::path& path);
std::map<std::string, TensorPtr<float>> load_checkpoint(
    const std::filesystem::path& path);

extern template struct TensorT<float>;
extern template struct TensorT<double>;
extern template class TapeT<float>;
extern template class TapeT<double>;

}  // namespace actirep::nn

#endif  // ACTIREP_NNCORE_HPP_
