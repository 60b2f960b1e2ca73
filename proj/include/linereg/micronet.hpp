#pragma once

#include <cstdint>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

class Rng;

// Architecture hyperparameters. Desk-scale defaults keep the O(N^2)
// feature-space neighbor searches and CPU training tractable; width 64 /
// descriptor 64 remain valid configurations.
struct NetConfig {
  int k = 20;        // neighbors aggregated per edge-convolution
  int stride = 4;    // skip-encoding stride S: gather S*k, keep every S-th
  int channels = 16; // per-layer feature width
  int descriptor_dim = 16;
  // When set, the first layer consumes the scale-invariant per-point features
  // (with neighborhoods still taken in Euclidean space) instead of raw
  // coordinates; used for synthetic pretraining.
  bool scale_invariant_first_layer = false;

  bool operator==(const NetConfig&) const = default;
  void validate() const;  // throws std::invalid_argument on bad values
};

// One affine map y = x*W + b (W: cin x cout row-major), the shared unit of
// edge convolutions and head layers.
template <typename Scalar>
struct Affine {
  std::size_t cin = 0, cout = 0;
  std::vector<Scalar> w;  // cin * cout
  std::vector<Scalar> b;  // cout

  void resize(std::size_t in, std::size_t out);
  void init_he_uniform(Rng& rng);  // w ~ U(-sqrt(6/cin), +sqrt(6/cin)), b = 0
  void zero();
  std::size_t param_count() const { return w.size() + b.size(); }
};

// All learnable blocks, in the fixed order used by checkpoints, Adam state
// and gradient buffers.
template <typename Scalar>
struct NetBlocks {
  Affine<Scalar> edge1, edge2, edge3;  // encoders
  Affine<Scalar> seg1, seg2, seg3;     // segmentation head (final linear)
  Affine<Scalar> desc1, desc2, desc3;  // descriptor head (final linear)

  template <typename F>
  void for_each(F&& f) {
    f(edge1); f(edge2); f(edge3);
    f(seg1); f(seg2); f(seg3);
    f(desc1); f(desc2); f(desc3);
  }
  template <typename F>
  void for_each(F&& f) const {
    f(edge1); f(edge2); f(edge3);
    f(seg1); f(seg2); f(seg3);
    f(desc1); f(desc2); f(desc3);
  }
  void zero();
  std::size_t param_count() const;
};

// Everything the backward pass needs from the forward pass. Reusable across
// calls; `freeze_graphs` keeps the neighbor indices (and the layer-1 input
// features) from the previous forward, which pins the piecewise-linear region
// so finite-difference probes differentiate the same function the analytic
// backward does, and saves the graph rebuild during repeated-epoch training
// on a fixed cloud.
template <typename Scalar>
struct Workspace {
  bool freeze_graphs = false;

  MatrixR<Scalar> x0;                  // N x in_dim (3)
  MatrixR<int> idx1, idx2, idx3;       // N x k neighbor indices per layer
  MatrixR<Scalar> y1, y2, y3;          // N x C post-max layer outputs
  MatrixR<int> arg1, arg2, arg3;       // N x C argmax neighbor slot per channel
  MatrixR<Scalar> concat;              // N x 3C
  std::vector<Scalar> global_feat;     // 3C column-max of concat
  std::vector<int> global_arg;         // 3C row index of each maximum
  MatrixR<Scalar> head_in;             // N x 6C
  MatrixR<Scalar> seg_h1, seg_h2;      // head intermediates (post-ReLU)
  MatrixR<Scalar> desc_h1, desc_h2;
  MatrixR<Scalar> seg_logits, seg_probs;   // N x 2
  MatrixR<Scalar> desc_raw, desc_unit;     // N x d
  std::vector<Scalar> desc_norm;           // N effective row norms
};

template <typename Scalar>
struct ForwardResult {
  MatrixR<Scalar> seg_logits;   // N x 2
  MatrixR<Scalar> seg_probs;    // N x 2, rows sum to 1
  MatrixR<Scalar> descriptors;  // N x d, unit L2 rows
};

// Skip encoding: indices of the S*k nearest rows to row `point_index` in the
// given feature space (self excluded, ascending (distance, index)), keeping
// offsets S-1, 2S-1, ..., kS-1. Throws std::invalid_argument unless
// N > S*k >= 1. S = 1 degenerates to plain kNN.
std::vector<int> skip_gather(const MatrixR<float>& features, int point_index, int k, int S);
std::vector<int> skip_gather(const MatrixR<double>& features, int point_index, int k, int S);

// One edge convolution: per point j and neighbor i, the edge feature
// [x_j, x_i - x_j] is mapped by the affine layer + ReLU, then max-pooled over
// the k neighbors channel-wise. `argmax` (optional) receives the winning
// neighbor slot per (point, channel).
template <typename Scalar>
MatrixR<Scalar> edgeconv_forward(const Affine<Scalar>& layer, const MatrixR<Scalar>& features,
                                 const MatrixR<int>& neighbor_index,
                                 MatrixR<int>* argmax = nullptr);

template <typename Scalar>
class MicroNet {
 public:
  MicroNet(const NetConfig& cfg, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  NetBlocks<Scalar>& blocks() { return blocks_; }
  const NetBlocks<Scalar>& blocks() const { return blocks_; }

  // Full forward pass. Layer 1 reads raw coordinates (or scale-invariant
  // features with Euclidean neighborhoods); layers 2-3 rebuild their
  // neighbor graphs in their input feature space (skip encoding throughout)
  // unless ws.freeze_graphs is set. Requires N > S*k.
  ForwardResult<Scalar> forward(const PointCloud& cloud, Workspace<Scalar>& ws) const;

  // Reverse-mode gradients for the forward pass cached in `ws`.
  // `dprobs` / `ddesc` are the loss derivatives with respect to seg_probs and
  // the unit-normalized descriptors; softmax and normalization Jacobians are
  // applied internally. Neighbor graphs are treated as constant (their
  // dependence on the parameters is discrete).
  NetBlocks<Scalar> backward(const MatrixR<Scalar>& dprobs, const MatrixR<Scalar>& ddesc,
                             const Workspace<Scalar>& ws) const;

 private:
  NetConfig cfg_;
  NetBlocks<Scalar> blocks_;
};

// Adam with bias correction; moments flattened over blocks in declaration
// order. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
template <typename Scalar>
struct AdamState {
  std::vector<Scalar> m, v;
  std::int64_t t = 0;
};

template <typename Scalar>
void adam_step(MicroNet<Scalar>& net, const NetBlocks<Scalar>& grads, AdamState<Scalar>& state,
               double lr);

// Step-decay schedule: base_lr * 0.5^floor(epoch / 15).
double scheduled_lr(double base_lr, int epoch);

}  // namespace linereg
