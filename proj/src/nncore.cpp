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

#include "actirep/nncore.hpp"

#include <malloc.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "actirep/common.hpp"
#include "actirep/rng.hpp"

namespace actirep::nn {

namespace {

// ---------------------------------------------------------------------------
// Deterministic parallel-for. Work is split into contiguous chunks whose
// boundaries depend only on the range, and every output element is written by
// exactly one chunk, so results are bitwise independent of the worker count.
// ---------------------------------------------------------------------------

class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  void set_workers(int n) {
    n = std::max(1, n);
    std::unique_lock guard(api_mutex_);
    shutdown();
    target_workers_ = n;
  }

  int workers() {
    std::unique_lock guard(api_mutex_);
    return target_workers_;
  }

  // fn(begin, end) over [0, n) in `parts` chunks.
  void parallel_for(std::int64_t n,
                    const std::function<void(std::int64_t, std::int64_t)>& fn) {
    std::unique_lock guard(api_mutex_);
    const int parts = static_cast<int>(
        std::min<std::int64_t>(target_workers_, std::max<std::int64_t>(n, 1)));
    if (parts <= 1) {
      fn(0, n);
      return;
    }
    ensure_started();
    auto chunk = [n, parts](int p) {
      return std::pair<std::int64_t, std::int64_t>(n * p / parts,
                                                   n * (p + 1) / parts);
    };
    {
      std::lock_guard lock(mutex_);
      job_ = [&fn, chunk, parts](int worker_index) {
        const int part = worker_index + 1;
        if (part < parts) {
          auto [begin, end] = chunk(part);
          fn(begin, end);
        }
      };
      pending_ = static_cast<int>(threads_.size());
      ++job_id_;
    }
    work_ready_.notify_all();
    auto [begin, end] = chunk(0);
    fn(begin, end);
    std::unique_lock lock(mutex_);
    job_done_.wait(lock, [this] { return pending_ == 0; });
  }

 private:
  Pool() {
    const unsigned hw = std::thread::hardware_concurrency();
    target_workers_ = static_cast<int>(std::clamp(hw, 1u, 8u));
  }

  ~Pool() {
    std::unique_lock guard(api_mutex_);
    shutdown();
  }

  void ensure_started() {
    if (!threads_.empty() || target_workers_ <= 1) return;
    stop_ = false;
    for (int i = 0; i < target_workers_ - 1; ++i) {
      threads_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  void shutdown() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++job_id_;
    }
    work_ready_.notify_all();
    for (auto& thread : threads_) thread.join();
    threads_.clear();
  }

  void worker_loop(int worker_index) {
    std::uint64_t seen = 0;
    for (;;) {
      std::function<void(int)> job;
      {
        std::unique_lock lock(mutex_);
        work_ready_.wait(lock, [&] { return stop_ || job_id_ != seen; });
        if (stop_) return;
        seen = job_id_;
        job = job_;
      }
      if (job) job(worker_index);
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) job_done_.notify_all();
      }
    }
  }

  std::mutex api_mutex_;  // serializes parallel_for entry and reconfig
  std::mutex mutex_;
  std::condition_variable work_ready_;
  std::condition_variable job_done_;
  std::vector<std::thread> threads_;
  std::function<void(int)> job_;
  std::uint64_t job_id_ = 0;
  int pending_ = 0;
  int target_workers_ = 1;
  bool stop_ = false;
};

constexpr std::int64_t kSerialFlopCutoff = 1 << 17;

// Keeps big freed blocks inside the heap instead of unmapping them; the tape
// allocates and frees multi-megabyte activations per sample and fresh mmap
// pages would be kernel-zeroed every time.
const bool kMallocTuned = [] {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return true;
}();

// ---------------------------------------------------------------------------
// GEMM kernels in saxpy form (no reductions), so gcc vectorizes them without
// -ffast-math and each C row is produced by one thread. Matrix-vector shapes
// (n == 1) take a multi-accumulator dot path instead.
// ---------------------------------------------------------------------------

template <typename T>
void axpy(std::int64_t n, T a, const T* __restrict__ x, T* __restrict__ y) {
  for (std::int64_t j = 0; j < n; ++j) y[j] += a * x[j];
}

// y[i] += dot(A[i,:], x); fixed four-lane accumulation so the reduction
// order is deterministic.
template <typename T>
void gemv_rows(const T* a, const T* x, T* y, std::int64_t m, std::int64_t k) {
  for (std::int64_t i = 0; i < m; ++i) {
    const T* row = a + i * k;
    T acc0 = T(0), acc1 = T(0), acc2 = T(0), acc3 = T(0);
    std::int64_t p = 0;
    for (; p + 4 <= k; p += 4) {
      acc0 += row[p] * x[p];
      acc1 += row[p + 1] * x[p + 1];
      acc2 += row[p + 2] * x[p + 2];
      acc3 += row[p + 3] * x[p + 3];
    }
    T acc = (acc0 + acc1) + (acc2 + acc3);
    for (; p < k; ++p) acc += row[p] * x[p];
    y[i] += acc;
  }
}

// C[m x n] += A[m x k] * B[k x n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k,
             std::int64_t n) {
  if (n == 1) {
    gemv_rows(a, b, c, m, k);
    return;
  }
  auto rows = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      T* c_row = c + i * n;
      const T* a_row = a + i * k;
      for (std::int64_t p = 0; p < k; ++p) {
        axpy(n, a_row[p], b + p * n, c_row);
      }
    }
  };
  if (m * k * n < kSerialFlopCutoff) {
    rows(0, m);
  } else {
    Pool::instance().parallel_for(m, rows);
  }
}

// C[m x n] += A^T * B where A is [k x m], B is [k x n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k,
             std::int64_t n) {
  if (n == 1) {
    // c[i] += dot(A[:, i], b): stride-m loads, accumulate per column.
    auto columns = [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i) {
        T acc = T(0);
        for (std::int64_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p];
        c[i] += acc;
      }
    };
    if (m * k < kSerialFlopCutoff) {
      columns(0, m);
    } else {
      Pool::instance().parallel_for(m, columns);
    }
    return;
  }
  auto rows = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      T* c_row = c + i * n;
      for (std::int64_t p = 0; p < k; ++p) {
        const T value = a[p * m + i];
        if (value != T(0)) axpy(n, value, b + p * n, c_row);
      }
    }
  };
  if (m * k * n < kSerialFlopCutoff) {
    rows(0, m);
  } else {
    Pool::instance().parallel_for(m, rows);
  }
}

template <typename T>
std::vector<T> transpose(const T* src, std::int64_t rows, std::int64_t cols) {
  std::vector<T> out(static_cast<std::size_t>(rows * cols));
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      out[c * rows + r] = src[r * cols + c];
    }
  }
  return out;
}

template <typename T>
void check_finite(const TensorPtr<T>& tensor, const char* op_name) {
  for (T value : tensor->data) {
    require(std::isfinite(static_cast<double>(value)), ErrorCode::NonFinite,
            std::string(op_name) + " produced a non-finite value");
  }
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) {
    return T(1) / (T(1) + std::exp(-x));
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

struct ConvGeometry {
  int out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;
};

ConvGeometry conv_geometry(int h, int w, int kh, int kw, int sh, int sw,
                           Padding padding) {
  ConvGeometry g;
  if (padding == Padding::Same) {
    g.out_h = (h + sh - 1) / sh;
    g.out_w = (w + sw - 1) / sw;
    const int pad_h = std::max((g.out_h - 1) * sh + kh - h, 0);
    const int pad_w = std::max((g.out_w - 1) * sw + kw - w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    require(h >= kh && w >= kw, ErrorCode::ShapeMismatch,
            "valid padding needs input >= kernel");
    g.out_h = (h - kh) / sh + 1;
    g.out_w = (w - kw) / sw + 1;
  }
  return g;
}

// cols[(c*kh+ky)*kw+kx][oy*out_w+ox] = x[c][oy*sh+ky-pad_top][ox*sw+kx-pad_left]
template <typename T>
std::vector<T> im2col(const T* x, int channels, int h, int w, int kh, int kw,
                      int sh, int sw, const ConvGeometry& g) {
  const std::int64_t positions =
      static_cast<std::int64_t>(g.out_h) * g.out_w;
  std::vector<T> cols(
      static_cast<std::size_t>(channels) * kh * kw * positions, T(0));
  auto fill_channel = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t c = begin; c < end; ++c) {
      const T* x_plane = x + c * h * w;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          T* row = cols.data() + ((c * kh + ky) * kw + kx) * positions;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * sh + ky - g.pad_top;
            if (iy < 0 || iy >= h) continue;
            const T* x_row = x_plane + static_cast<std::int64_t>(iy) * w;
            T* out_row = row + static_cast<std::int64_t>(oy) * g.out_w;
            for (int ox = 0; ox < g.out_w; ++ox) {
              const int ix = ox * sw + kx - g.pad_left;
              if (ix >= 0 && ix < w) out_row[ox] = x_row[ix];
            }
          }
        }
      }
    }
  };
  const std::int64_t work =
      static_cast<std::int64_t>(channels) * kh * kw * positions;
  if (work < kSerialFlopCutoff) {
    fill_channel(0, channels);
  } else {
    Pool::instance().parallel_for(channels, fill_channel);
  }
  return cols;
}

// Adjoint of im2col: scatter-add column gradients back into the input plane.
template <typename T>
void col2im_add(const T* cols, int channels, int h, int w, int kh, int kw,
                int sh, int sw, const ConvGeometry& g, T* x_grad) {
  const std::int64_t positions = static_cast<std::int64_t>(g.out_h) * g.out_w;
  for (int c = 0; c < channels; ++c) {
    T* grad_plane = x_grad + static_cast<std::int64_t>(c) * h * w;
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const T* row = cols + ((static_cast<std::int64_t>(c) * kh + ky) * kw +
                               kx) * positions;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * sh + ky - g.pad_top;
          if (iy < 0 || iy >= h) continue;
          T* grad_row = grad_plane + static_cast<std::int64_t>(iy) * w;
          const T* src_row = row + static_cast<std::int64_t>(oy) * g.out_w;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * sw + kx - g.pad_left;
            if (ix >= 0 && ix < w) grad_row[ix] += src_row[ox];
          }
        }
      }
    }
  }
}

}  // namespace

void set_max_threads(int n) { Pool::instance().set_workers(n); }
int max_threads() { return Pool::instance().workers(); }

int conv_output_size(int input, int kernel, int stride, Padding padding) {
  const ConvGeometry g =
      conv_geometry(input, 1, kernel, 1, stride, 1, padding);
  return g.out_h;
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad) {
  auto tensor = std::make_shared<TensorT<T>>();
  tensor->shape = std::move(shape);
  tensor->requires_grad = requires_grad;
  tensor->data.assign(static_cast<std::size_t>(tensor->size()), T(0));
  return tensor;
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> data,
                         bool requires_grad) {
  auto tensor = std::make_shared<TensorT<T>>();
  tensor->shape = std::move(shape);
  tensor->requires_grad = requires_grad;
  require(static_cast<std::int64_t>(data.size()) == tensor->size(),
          ErrorCode::ShapeMismatch, "data length does not match shape");
  tensor->data = std::move(data);
  return tensor;
}

template <typename T>
TensorPtr<T> TapeT<T>::make_output(std::vector<int> shape, bool needs_grad,
                                   const char* op_name) {
  (void)op_name;
  auto tensor = make_tensor<T>(std::move(shape), needs_grad);
  tensor->producer_tape = recording_ ? this : nullptr;
  return tensor;
}

template <typename T>
void TapeT<T>::record(std::vector<TensorPtr<T>> tensors,
                      std::function<void()> fn) {
  if (!recording_) return;
  nodes_.push_back(Node{std::move(tensors), std::move(fn)});
}

template <typename T>
void TapeT<T>::clear() {
  nodes_.clear();
}

template <typename T>
void TapeT<T>::backward(const TensorPtr<T>& loss) {
  require(loss != nullptr && loss->size() == 1, ErrorCode::NotScalarLoss,
          "backward expects a scalar loss");
  require(loss->producer_tape == this && !nodes_.empty(),
          ErrorCode::DetachedGraph,
          "loss was not produced by this tape's recorded operations");

  for (Node& node : nodes_) {
    for (const TensorPtr<T>& tensor : node.tensors) {
      tensor->grad.assign(tensor->data.size(), T(0));
    }
  }
  loss->grad.assign(1, T(1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    it->backward_fn();
  }
  clear();
}

// ---------------------------------------------------------------------------
// Elementwise / shape ops
// ---------------------------------------------------------------------------

template <typename T>
TensorPtr<T> TapeT<T>::add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require(a->shape == b->shape, ErrorCode::ShapeMismatch,
          "add expects matching shapes");
  auto out = make_output(a->shape, a->requires_grad || b->requires_grad, "add");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = a->data[i] + b->data[i];
  }
  check_finite(out, "add");
  record({a, b, out}, [a, b, out] {
    axpy<T>(out->grad.size(), T(1), out->grad.data(), a->grad.data());
    axpy<T>(out->grad.size(), T(1), out->grad.data(), b->grad.data());
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::scale(const TensorPtr<T>& x, T factor) {
  auto out = make_output(x->shape, x->requires_grad, "scale");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = factor * x->data[i];
  }
  check_finite(out, "scale");
  record({x, out}, [x, out, factor] {
    axpy<T>(out->grad.size(), factor, out->grad.data(), x->grad.data());
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::sum(const TensorPtr<T>& x) {
  auto out = make_output({1}, x->requires_grad, "sum");
  double acc = 0.0;
  for (T value : x->data) acc += static_cast<double>(value);
  out->data[0] = static_cast<T>(acc);
  check_finite(out, "sum");
  record({x, out}, [x, out] {
    const T g = out->grad[0];
    for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::relu(const TensorPtr<T>& x) {
  auto out = make_output(x->shape, x->requires_grad, "relu");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = x->data[i] > T(0) ? x->data[i] : T(0);
  }
  check_finite(out, "relu");
  record({x, out}, [x, out] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      if (x->data[i] > T(0)) x->grad[i] += out->grad[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::sigmoid(const TensorPtr<T>& x) {
  auto out = make_output(x->shape, x->requires_grad, "sigmoid");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = stable_sigmoid(x->data[i]);
  }
  check_finite(out, "sigmoid");
  record({x, out}, [x, out] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      const T s = out->data[i];
      x->grad[i] += out->grad[i] * s * (T(1) - s);
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::tanh_act(const TensorPtr<T>& x) {
  auto out = make_output(x->shape, x->requires_grad, "tanh");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = std::tanh(x->data[i]);
  }
  check_finite(out, "tanh");
  record({x, out}, [x, out] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      const T t = out->data[i];
      x->grad[i] += out->grad[i] * (T(1) - t * t);
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::clamp(const TensorPtr<T>& x, T lo, T hi) {
  auto out = make_output(x->shape, x->requires_grad, "clamp");
  for (std::size_t i = 0; i < out->data.size(); ++i) {
    out->data[i] = std::min(std::max(x->data[i], lo), hi);
  }
  record({x, out}, [x, out, lo, hi] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      if (x->data[i] > lo && x->data[i] < hi) x->grad[i] += out->grad[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::reshape(const TensorPtr<T>& x, std::vector<int> shape) {
  auto out = make_output(std::move(shape), x->requires_grad, "reshape");
  require(out->size() == x->size(), ErrorCode::ShapeMismatch,
          "reshape must preserve element count");
  out->data = x->data;
  record({x, out}, [x, out] {
    axpy<T>(out->grad.size(), T(1), out->grad.data(), x->grad.data());
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::slice_row(const TensorPtr<T>& x, int row) {
  require(x->shape.size() == 2, ErrorCode::ShapeMismatch,
          "slice_row expects a matrix");
  require(row >= 0 && row < x->shape[0], ErrorCode::ShapeMismatch,
          "row out of range");
  const int width = x->shape[1];
  auto out = make_output({width}, x->requires_grad, "slice_row");
  std::copy_n(x->data.begin() + static_cast<std::size_t>(row) * width, width,
              out->data.begin());
  record({x, out}, [x, out, row, width] {
    axpy<T>(width, T(1), out->grad.data(),
            x->grad.data() + static_cast<std::size_t>(row) * width);
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::global_avg_pool(const TensorPtr<T>& x) {
  require(x->shape.size() == 2, ErrorCode::ShapeMismatch,
          "global_avg_pool expects [channels, length]");
  const int channels = x->shape[0];
  const int length = x->shape[1];
  auto out = make_output({channels}, x->requires_grad, "global_avg_pool");
  for (int c = 0; c < channels; ++c) {
    double acc = 0.0;
    const T* row = x->data.data() + static_cast<std::size_t>(c) * length;
    for (int i = 0; i < length; ++i) acc += static_cast<double>(row[i]);
    out->data[c] = static_cast<T>(acc / length);
  }
  check_finite(out, "global_avg_pool");
  record({x, out}, [x, out, channels, length] {
    for (int c = 0; c < channels; ++c) {
      const T g = out->grad[c] / static_cast<T>(length);
      T* row = x->grad.data() + static_cast<std::size_t>(c) * length;
      for (int i = 0; i < length; ++i) row[i] += g;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

template <typename T>
TensorPtr<T> TapeT<T>::dense(const TensorPtr<T>& x, const TensorPtr<T>& w,
                             const TensorPtr<T>& b) {
  require(x->shape.size() == 1 && w->shape.size() == 2 &&
              w->shape[1] == x->shape[0] && b->shape.size() == 1 &&
              b->shape[0] == w->shape[0],
          ErrorCode::ShapeMismatch, "dense expects w[out,in], x[in], b[out]");
  const int out_dim = w->shape[0];
  const int in_dim = w->shape[1];
  auto out = make_output(
      {out_dim}, x->requires_grad || w->requires_grad || b->requires_grad,
      "dense");
  std::copy(b->data.begin(), b->data.end(), out->data.begin());
  gemm_nn<T>(w->data.data(), x->data.data(), out->data.data(), out_dim, in_dim,
             1);
  check_finite(out, "dense");
  record({x, w, b, out}, [x, w, b, out, out_dim, in_dim] {
    // dW += dy x^T ; dx += W^T dy ; db += dy
    gemm_nn<T>(out->grad.data(), x->data.data(), w->grad.data(), out_dim, 1,
               in_dim);
    gemm_tn<T>(w->data.data(), out->grad.data(), x->grad.data(), in_dim,
               out_dim, 1);
    axpy<T>(out_dim, T(1), out->grad.data(), b->grad.data());
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::conv2d(const TensorPtr<T>& x, const TensorPtr<T>& w,
                              const TensorPtr<T>& b, int stride,
                              Padding padding) {
  require(x->shape.size() == 3 && w->shape.size() == 4 &&
              w->shape[1] == x->shape[0] && w->shape[2] == w->shape[3] &&
              b->shape.size() == 1 && b->shape[0] == w->shape[0],
          ErrorCode::ShapeMismatch,
          "conv2d expects x[c,h,w], w[f,c,k,k], b[f]");
  const int kernel = w->shape[2];
  const ConvGeometry g = conv_geometry(x->shape[1], x->shape[2], kernel,
                                       kernel, stride, stride, padding);
  return conv_generic(x, w, b, x->shape[0], x->shape[1], x->shape[2],
                      w->shape[0], kernel, kernel, stride, stride, padding,
                      {w->shape[0], g.out_h, g.out_w});
}

template <typename T>
TensorPtr<T> TapeT<T>::conv1d(const TensorPtr<T>& x, const TensorPtr<T>& w,
                              const TensorPtr<T>& b, int stride,
                              Padding padding) {
  require(x->shape.size() == 2 && w->shape.size() == 3 &&
              w->shape[1] == x->shape[0] && b->shape.size() == 1 &&
              b->shape[0] == w->shape[0],
          ErrorCode::ShapeMismatch, "conv1d expects x[c,l], w[f,c,k], b[f]");
  const int kernel = w->shape[2];
  const ConvGeometry g =
      conv_geometry(1, x->shape[1], 1, kernel, 1, stride, padding);
  return conv_generic(x, w, b, x->shape[0], 1, x->shape[1], w->shape[0], 1,
                      kernel, 1, stride, padding, {w->shape[0], g.out_w});
}

template <typename T>
TensorPtr<T> TapeT<T>::conv_generic(const TensorPtr<T>& x,
                                    const TensorPtr<T>& w,
                                    const TensorPtr<T>& b, int channels, int h,
                                    int w_dim, int filters, int kh, int kw,
                                    int sh, int sw, Padding padding,
                                    std::vector<int> out_shape) {
  const ConvGeometry g = conv_geometry(h, w_dim, kh, kw, sh, sw, padding);
  const std::int64_t positions = static_cast<std::int64_t>(g.out_h) * g.out_w;
  const std::int64_t patch = static_cast<std::int64_t>(channels) * kh * kw;

  std::vector<T> cols =
      im2col(x->data.data(), channels, h, w_dim, kh, kw, sh, sw, g);

  const bool needs_grad =
      x->requires_grad || w->requires_grad || b->requires_grad;
  auto out = make_output(std::move(out_shape), needs_grad, "conv");
  for (int f = 0; f < filters; ++f) {
    std::fill_n(out->data.begin() + f * positions, positions, b->data[f]);
  }
  gemm_nn<T>(w->data.data(), cols.data(), out->data.data(), filters, patch,
             positions);
  check_finite(out, "conv");

  if (!recording_) return out;
  auto saved_cols = std::make_shared<std::vector<T>>(std::move(cols));
  record({x, w, b, out}, [x, w, b, out, saved_cols, channels, h, w_dim, kh, kw,
                          sh, sw, g, filters, positions, patch] {
    // db
    for (int f = 0; f < filters; ++f) {
      double acc = 0.0;
      const T* grad_row = out->grad.data() + f * positions;
      for (std::int64_t p = 0; p < positions; ++p) {
        acc += static_cast<double>(grad_row[p]);
      }
      b->grad[f] += static_cast<T>(acc);
    }
    // dW += dY * cols^T
    std::vector<T> cols_t = transpose(saved_cols->data(), patch, positions);
    gemm_nn<T>(out->grad.data(), cols_t.data(), w->grad.data(), filters,
               positions, patch);
    // dx += col2im(W^T * dY)
    std::vector<T> dcols(static_cast<std::size_t>(patch * positions), T(0));
    gemm_tn<T>(w->data.data(), out->grad.data(), dcols.data(), patch, filters,
               positions);
    col2im_add(dcols.data(), channels, h, w_dim, kh, kw, sh, sw, g,
               x->grad.data());
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::conv2d_transpose(const TensorPtr<T>& x,
                                        const TensorPtr<T>& w,
                                        const TensorPtr<T>& b, int stride) {
  require(x->shape.size() == 3 && w->shape.size() == 4 &&
              w->shape[0] == x->shape[0] && w->shape[2] == w->shape[3] &&
              b->shape.size() == 1 && b->shape[0] == w->shape[1],
          ErrorCode::ShapeMismatch,
          "conv2d_transpose expects x[c,h,w], w[c,f,k,k], b[f]");
  const int channels = x->shape[0];
  const int in_h = x->shape[1];
  const int in_w = x->shape[2];
  const int filters = w->shape[1];
  const int kernel = w->shape[2];
  const int out_h = in_h * stride;
  const int out_w = in_w * stride;
  // Geometry of the convolution this op is the adjoint of.
  const ConvGeometry g = conv_geometry(out_h, out_w, kernel, kernel, stride,
                                       stride, Padding::Same);
  const std::int64_t positions = static_cast<std::int64_t>(in_h) * in_w;
  const std::int64_t patch =
      static_cast<std::int64_t>(filters) * kernel * kernel;

  // Wt[(f,ky,kx)][c] = w[c][f][ky][kx]
  std::vector<T> w_t(static_cast<std::size_t>(patch) * channels);
  for (int c = 0; c < channels; ++c) {
    const T* src = w->data.data() +
                   static_cast<std::size_t>(c) * filters * kernel * kernel;
    for (std::int64_t r = 0; r < patch; ++r) {
      w_t[r * channels + c] = src[r];
    }
  }

  std::vector<T> tcols(static_cast<std::size_t>(patch) * positions, T(0));
  gemm_nn<T>(w_t.data(), x->data.data(), tcols.data(), patch, channels,
             positions);

  const bool needs_grad =
      x->requires_grad || w->requires_grad || b->requires_grad;
  auto out = make_output({filters, out_h, out_w}, needs_grad,
                         "conv2d_transpose");
  for (int f = 0; f < filters; ++f) {
    std::fill_n(out->data.begin() + static_cast<std::size_t>(f) * out_h * out_w,
                static_cast<std::size_t>(out_h) * out_w, b->data[f]);
  }
  col2im_add(tcols.data(), filters, out_h, out_w, kernel, kernel, stride,
             stride, g, out->data.data());
  check_finite(out, "conv2d_transpose");

  if (!recording_) return out;
  auto saved_wt = std::make_shared<std::vector<T>>(std::move(w_t));
  const int kk = kernel;
  const int s = stride;
  record({x, w, b, out}, [x, w, b, out, saved_wt, channels, filters, out_h,
                          out_w, kk, s, g, positions, patch] {
    // db
    const std::int64_t plane = static_cast<std::int64_t>(out_h) * out_w;
    for (int f = 0; f < filters; ++f) {
      double acc = 0.0;
      const T* grad_plane = out->grad.data() + f * plane;
      for (std::int64_t p = 0; p < plane; ++p) {
        acc += static_cast<double>(grad_plane[p]);
      }
      b->grad[f] += static_cast<T>(acc);
    }
    // dtcols = im2col(dOut) with the equivalent conv geometry
    std::vector<T> dtcols = im2col(out->grad.data(), filters, out_h, out_w, kk,
                                   kk, s, s, g);
    // dx += Wt^T * dtcols
    gemm_tn<T>(saved_wt->data(), dtcols.data(), x->grad.data(), channels,
               patch, positions);
    // dWt = dtcols * x^T, scattered back into w's layout
    std::vector<T> x_t = transpose(x->data.data(), channels, positions);
    std::vector<T> dwt(static_cast<std::size_t>(patch) * channels, T(0));
    gemm_nn<T>(dtcols.data(), x_t.data(), dwt.data(), patch, positions,
               channels);
    for (int c = 0; c < channels; ++c) {
      T* dst = w->grad.data() + static_cast<std::size_t>(c) * patch;
      for (std::int64_t r = 0; r < patch; ++r) {
        dst[r] += dwt[r * channels + c];
      }
    }
  });
  return out;
}

template <typename T>
std::pair<TensorPtr<T>, TensorPtr<T>> TapeT<T>::lstm_cell(
    const TensorPtr<T>& x, const TensorPtr<T>& h, const TensorPtr<T>& c,
    const TensorPtr<T>& w_input, const TensorPtr<T>& w_recurrent,
    const TensorPtr<T>& bias) {
  const int in_dim = x->shape.empty() ? 0 : x->shape.back();
  require(h->shape.size() == 1 && c->shape == h->shape, ErrorCode::ShapeMismatch,
          "lstm_cell state shapes");
  const int units = h->shape[0];
  require(w_input->shape == std::vector<int>({4 * units, in_dim}) &&
              w_recurrent->shape == std::vector<int>({4 * units, units}) &&
              bias->shape == std::vector<int>({4 * units}),
          ErrorCode::ShapeMismatch, "lstm_cell weight shapes");

  std::vector<T> pre(bias->data.begin(), bias->data.end());
  gemm_nn<T>(w_input->data.data(), x->data.data(), pre.data(), 4 * units,
             in_dim, 1);
  gemm_nn<T>(w_recurrent->data.data(), h->data.data(), pre.data(), 4 * units,
             units, 1);

  auto gates = std::make_shared<std::vector<T>>(4 * units);
  std::vector<T>& gv = *gates;
  for (int u = 0; u < units; ++u) {
    gv[u] = stable_sigmoid(pre[u]);                        // input gate
    gv[units + u] = stable_sigmoid(pre[units + u]);        // forget gate
    gv[2 * units + u] = std::tanh(pre[2 * units + u]);     // cell candidate
    gv[3 * units + u] = stable_sigmoid(pre[3 * units + u]);  // output gate
  }

  const bool needs_grad = x->requires_grad || h->requires_grad ||
                          c->requires_grad || w_input->requires_grad ||
                          w_recurrent->requires_grad || bias->requires_grad;
  auto c_out = make_output({units}, needs_grad, "lstm_cell");
  auto h_out = make_output({units}, needs_grad, "lstm_cell");
  auto tanh_c = std::make_shared<std::vector<T>>(units);
  for (int u = 0; u < units; ++u) {
    c_out->data[u] = gv[units + u] * c->data[u] + gv[u] * gv[2 * units + u];
    (*tanh_c)[u] = std::tanh(c_out->data[u]);
    h_out->data[u] = gv[3 * units + u] * (*tanh_c)[u];
  }
  check_finite(h_out, "lstm_cell");
  check_finite(c_out, "lstm_cell");

  record({x, h, c, w_input, w_recurrent, bias, c_out, h_out},
         [x, h, c, w_input, w_recurrent, bias, c_out, h_out, gates, tanh_c,
          units_ = units, in_ = in_dim] {
    const std::vector<T>& gate = *gates;
    std::vector<T> dpre(4 * units_);
    for (int u = 0; u < units_; ++u) {
      const T gate_i = gate[u];
      const T gate_f = gate[units_ + u];
      const T gate_g = gate[2 * units_ + u];
      const T gate_o = gate[3 * units_ + u];
      const T tc = (*tanh_c)[u];
      const T dh = h_out->grad[u];
      const T dc_total = c_out->grad[u] + dh * gate_o * (T(1) - tc * tc);
      const T di = dc_total * gate_g;
      const T df = dc_total * c->data[u];
      const T dg = dc_total * gate_i;
      const T d_o = dh * tc;
      c->grad[u] += dc_total * gate_f;
      dpre[u] = di * gate_i * (T(1) - gate_i);
      dpre[units_ + u] = df * gate_f * (T(1) - gate_f);
      dpre[2 * units_ + u] = dg * (T(1) - gate_g * gate_g);
      dpre[3 * units_ + u] = d_o * gate_o * (T(1) - gate_o);
    }
    // dW += dpre x^T ; dU += dpre h^T ; db += dpre
    gemm_nn<T>(dpre.data(), x->data.data(), w_input->grad.data(), 4 * units_,
               1, in_);
    gemm_nn<T>(dpre.data(), h->data.data(), w_recurrent->grad.data(),
               4 * units_, 1, units_);
    axpy<T>(4 * units_, T(1), dpre.data(), bias->grad.data());
    // dx += W^T dpre ; dh += U^T dpre
    gemm_tn<T>(w_input->data.data(), dpre.data(), x->grad.data(), in_,
               4 * units_, 1);
    gemm_tn<T>(w_recurrent->data.data(), dpre.data(), h->grad.data(), units_,
               4 * units_, 1);
  });
  return {h_out, c_out};
}

// ---------------------------------------------------------------------------
// Latent ops and losses
// ---------------------------------------------------------------------------

template <typename T>
TensorPtr<T> TapeT<T>::reparameterize(const TensorPtr<T>& mu,
                                      const TensorPtr<T>& log_var,
                                      const std::vector<T>& noise) {
  require(mu->shape == log_var->shape, ErrorCode::ShapeMismatch,
          "mu and log_var shapes differ");
  require(noise.size() == mu->data.size(), ErrorCode::LengthMismatch,
          "noise length must equal latent_dim");
  auto out = make_output(mu->shape,
                         mu->requires_grad || log_var->requires_grad,
                         "reparameterize");
  auto sigma = std::make_shared<std::vector<T>>(mu->data.size());
  for (std::size_t i = 0; i < mu->data.size(); ++i) {
    (*sigma)[i] = std::exp(T(0.5) * log_var->data[i]);
    out->data[i] = mu->data[i] + (*sigma)[i] * noise[i];
  }
  check_finite(out, "reparameterize");
  auto noise_copy = std::make_shared<std::vector<T>>(noise);
  record({mu, log_var, out}, [mu, log_var, out, sigma, noise_copy] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      mu->grad[i] += out->grad[i];
      log_var->grad[i] +=
          out->grad[i] * T(0.5) * (*sigma)[i] * (*noise_copy)[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::bce_with_logits_sum(const TensorPtr<T>& logits,
                                           const TensorPtr<T>& target) {
  require(logits->shape == target->shape ||
              logits->size() == target->size(),
          ErrorCode::ShapeMismatch, "bce shapes differ");
  auto out = make_output({1}, logits->requires_grad, "bce_with_logits_sum");
  double acc = 0.0;
  for (std::size_t i = 0; i < logits->data.size(); ++i) {
    const T l = logits->data[i];
    const T t = target->data[i];
    // max(l,0) - l*t + log1p(exp(-|l|))
    const T mx = l > T(0) ? l : T(0);
    acc += static_cast<double>(mx - l * t +
                               std::log1p(std::exp(-std::abs(l))));
  }
  out->data[0] = static_cast<T>(acc);
  check_finite(out, "bce_with_logits_sum");
  record({logits, target, out}, [logits, target, out] {
    const T g = out->grad[0];
    for (std::size_t i = 0; i < logits->data.size(); ++i) {
      logits->grad[i] +=
          g * (stable_sigmoid(logits->data[i]) - target->data[i]);
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> TapeT<T>::kl_std_normal_sum(const TensorPtr<T>& mu,
                                         const TensorPtr<T>& log_var) {
  require(mu->shape == log_var->shape, ErrorCode::ShapeMismatch,
          "mu and log_var shapes differ");
  auto out = make_output({1}, mu->requires_grad || log_var->requires_grad,
                         "kl_std_normal_sum");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu->data.size(); ++i) {
    const double m = static_cast<double>(mu->data[i]);
    const double lv = static_cast<double>(log_var->data[i]);
    acc += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  out->data[0] = static_cast<T>(acc);
  check_finite(out, "kl_std_normal_sum");
  record({mu, log_var, out}, [mu, log_var, out] {
    const T g = out->grad[0];
    for (std::size_t i = 0; i < mu->data.size(); ++i) {
      mu->grad[i] += g * mu->data[i];
      log_var->grad[i] +=
          g * T(0.5) * (std::exp(log_var->data[i]) - T(1));
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// LayerSpec dispatch, init, optimizer
// ---------------------------------------------------------------------------

template <typename T>
TensorPtr<T> apply_activation(TapeT<T>& tape, Activation activation,
                              const TensorPtr<T>& x) {
  switch (activation) {
    case Activation::Relu: return tape.relu(x);
    case Activation::Sigmoid: return tape.sigmoid(x);
    case Activation::Tanh: return tape.tanh_act(x);
    case Activation::Linear: return x;
  }
  return x;
}

template <typename T>
TensorPtr<T> forward(TapeT<T>& tape, const LayerSpec& spec,
                     const std::vector<TensorPtr<T>>& params,
                     const TensorPtr<T>& input) {
  switch (spec.kind) {
    case LayerKind::Dense:
      return apply_activation(
          tape, spec.activation, tape.dense(input, params.at(0), params.at(1)));
    case LayerKind::Conv2d:
      return apply_activation(
          tape, spec.activation,
          tape.conv2d(input, params.at(0), params.at(1), spec.stride,
                      spec.padding));
    case LayerKind::Conv2dTranspose:
      return apply_activation(
          tape, spec.activation,
          tape.conv2d_transpose(input, params.at(0), params.at(1),
                                spec.stride));
    case LayerKind::Conv1d:
      return apply_activation(
          tape, spec.activation,
          tape.conv1d(input, params.at(0), params.at(1), spec.stride,
                      spec.padding));
    case LayerKind::Lstm: {
      require(input->shape.size() == 2, ErrorCode::ShapeMismatch,
              "lstm input must be [steps, features]");
      auto h = make_tensor<T>({spec.filters});
      auto c = make_tensor<T>({spec.filters});
      TensorPtr<T> hidden = h;
      TensorPtr<T> cell = c;
      for (int step = 0; step < input->shape[0]; ++step) {
        auto x_t = tape.slice_row(input, step);
        auto [h_next, c_next] = tape.lstm_cell(
            x_t, hidden, cell, params.at(0), params.at(1), params.at(2));
        hidden = h_next;
        cell = c_next;
      }
      return apply_activation(tape, spec.activation, hidden);
    }
    case LayerKind::Activation:
      return apply_activation(tape, spec.activation, input);
  }
  throw Error(ErrorCode::ShapeMismatch, "unknown layer kind");
}

template <typename T>
TensorPtr<T> uniform_init(std::vector<int> shape, double bound, Rng& rng) {
  auto tensor = make_tensor<T>(std::move(shape), true);
  for (T& value : tensor->data) {
    value = static_cast<T>(rng.uniform(-bound, bound));
  }
  return tensor;
}

template <typename T>
std::vector<TensorPtr<T>> seeded_init(const LayerSpec& spec,
                                      std::uint64_t seed) {
  Rng rng(seed);
  auto bound = [](double fan_in, double fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
  };
  switch (spec.kind) {
    case LayerKind::Dense: {
      auto w = uniform_init<T>({spec.filters, spec.input_units},
                               bound(spec.input_units, spec.filters), rng);
      return {w, make_tensor<T>({spec.filters}, true)};
    }
    case LayerKind::Conv2d: {
      const double fan = static_cast<double>(spec.kernel) * spec.kernel;
      auto w = uniform_init<T>(
          {spec.filters, spec.input_channels, spec.kernel, spec.kernel},
          bound(spec.input_channels * fan, spec.filters * fan), rng);
      return {w, make_tensor<T>({spec.filters}, true)};
    }
    case LayerKind::Conv2dTranspose: {
      const double fan = static_cast<double>(spec.kernel) * spec.kernel;
      auto w = uniform_init<T>(
          {spec.input_channels, spec.filters, spec.kernel, spec.kernel},
          bound(spec.input_channels * fan, spec.filters * fan), rng);
      return {w, make_tensor<T>({spec.filters}, true)};
    }
    case LayerKind::Conv1d: {
      auto w = uniform_init<T>(
          {spec.filters, spec.input_channels, spec.kernel},
          bound(spec.input_channels * spec.kernel, spec.filters * spec.kernel),
          rng);
      return {w, make_tensor<T>({spec.filters}, true)};
    }
    case LayerKind::Lstm: {
      const int units = spec.filters;
      auto w = uniform_init<T>({4 * units, spec.input_units},
                               bound(spec.input_units, 4 * units), rng);
      auto u = uniform_init<T>({4 * units, units}, bound(units, 4 * units),
                               rng);
      return {w, u, make_tensor<T>({4 * units}, true)};
    }
    case LayerKind::Activation:
      return {};
  }
  return {};
}

template <typename T>
void adam_step(AdamStateT<T>& state, const std::vector<TensorPtr<T>>& params,
               const std::vector<std::vector<T>>& grads) {
  require(params.size() == grads.size(), ErrorCode::ShapeMismatch,
          "params/grads count mismatch");
  if (state.first_moment.empty()) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.first_moment[i].assign(params[i]->data.size(), T(0));
      state.second_moment[i].assign(params[i]->data.size(), T(0));
    }
  }
  require(state.first_moment.size() == params.size(), ErrorCode::ShapeMismatch,
          "optimizer state does not match parameter count");
  ++state.step_count;
  const T correction1 =
      T(1) - std::pow(state.beta1, static_cast<T>(state.step_count));
  const T correction2 =
      T(1) - std::pow(state.beta2, static_cast<T>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(grads[i].size() == params[i]->data.size(),
            ErrorCode::ShapeMismatch, "gradient shape mismatch");
    require(state.first_moment[i].size() == params[i]->data.size(),
            ErrorCode::ShapeMismatch, "moment shape mismatch");
    T* value = params[i]->data.data();
    T* m = state.first_moment[i].data();
    T* v = state.second_moment[i].data();
    const T* g = grads[i].data();
    const std::size_t n = grads[i].size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = state.beta1 * m[j] + (T(1) - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (T(1) - state.beta2) * g[j] * g[j];
      const T m_hat = m[j] / correction1;
      const T v_hat = v[j] / correction2;
      value[j] -= state.learning_rate * m_hat /
                  (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void put_u16f(std::ofstream& out, std::uint16_t value) {
  const std::uint8_t raw[2] = {static_cast<std::uint8_t>(value & 0xff),
                               static_cast<std::uint8_t>(value >> 8)};
  out.write(reinterpret_cast<const char*>(raw), 2);
}

void put_u32f(std::ofstream& out, std::uint32_t value) {
  std::uint8_t raw[4];
  for (int i = 0; i < 4; ++i) raw[i] = static_cast<std::uint8_t>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(raw), 4);
}

std::uint16_t get_u16f(std::ifstream& in) {
  std::uint8_t raw[2];
  in.read(reinterpret_cast<char*>(raw), 2);
  require(in.good(), ErrorCode::TruncatedFile, "checkpoint ends early");
  return static_cast<std::uint16_t>(raw[0] | (raw[1] << 8));
}

std::uint32_t get_u32f(std::ifstream& in) {
  std::uint8_t raw[4];
  in.read(reinterpret_cast<char*>(raw), 4);
  require(in.good(), ErrorCode::TruncatedFile, "checkpoint ends early");
  return static_cast<std::uint32_t>(raw[0]) | (raw[1] << 8u) |
         (raw[2] << 16u) | (static_cast<std::uint32_t>(raw[3]) << 24u);
}

}  // namespace

void save_checkpoint(const std::map<std::string, TensorPtr<float>>& tensors,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path.string());
  out.write("NNCK", 4);
  put_u16f(out, 1);
  put_u32f(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u16f(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(static_cast<char>(tensor->shape.size()));
    for (int dim : tensor->shape) {
      put_u32f(out, static_cast<std::uint32_t>(dim));
    }
    static_assert(sizeof(float) == 4);
    for (float value : tensor->data) {
      std::uint32_t raw;
      std::memcpy(&raw, &value, 4);
      put_u32f(out, raw);
    }
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path.string());
}

std::map<std::string, TensorPtr<float>> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, "NNCK", 4) == 0, ErrorCode::BadMagic,
          "not an NNCK checkpoint: " + path.string());
  const std::uint16_t version = get_u16f(in);
  require(version == 1, ErrorCode::VersionMismatch,
          "unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = get_u32f(in);
  std::map<std::string, TensorPtr<float>> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint16_t name_len = get_u16f(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    require(in.good(), ErrorCode::TruncatedFile, "checkpoint ends early");
    const int ndims = in.get();
    require(ndims != EOF, ErrorCode::TruncatedFile, "checkpoint ends early");
    std::vector<int> shape(ndims);
    for (int& dim : shape) dim = static_cast<int>(get_u32f(in));
    auto tensor = make_tensor<float>(shape, true);
    for (float& value : tensor->data) {
      const std::uint32_t raw = get_u32f(in);
      std::memcpy(&value, &raw, 4);
    }
    tensors.emplace(std::move(name), std::move(tensor));
  }
  return tensors;
}

// ---------------------------------------------------------------------------
// Explicit instantiations
// ---------------------------------------------------------------------------

template struct TensorT<float>;
template struct TensorT<double>;
template class TapeT<float>;
template class TapeT<double>;

template TensorPtr<float> make_tensor<float>(std::vector<int>, bool);
template TensorPtr<double> make_tensor<double>(std::vector<int>, bool);
template TensorPtr<float> make_tensor<float>(std::vector<int>,
                                             std::vector<float>, bool);
template TensorPtr<double> make_tensor<double>(std::vector<int>,
                                               std::vector<double>, bool);
template TensorPtr<float> forward<float>(TapeT<float>&, const LayerSpec&,
                                         const std::vector<TensorPtr<float>>&,
                                         const TensorPtr<float>&);
template TensorPtr<double> forward<double>(
    TapeT<double>&, const LayerSpec&, const std::vector<TensorPtr<double>>&,
    const TensorPtr<double>&);
template std::vector<TensorPtr<float>> seeded_init<float>(const LayerSpec&,
                                                          std::uint64_t);
template std::vector<TensorPtr<double>> seeded_init<double>(const LayerSpec&,
                                                            std::uint64_t);
template void adam_step<float>(AdamStateT<float>&,
                               const std::vector<TensorPtr<float>>&,
                               const std::vector<std::vector<float>>&);
template void adam_step<double>(AdamStateT<double>&,
                                const std::vector<TensorPtr<double>>&,
                                const std::vector<std::vector<double>>&);

}  // namespace actirep::nn
