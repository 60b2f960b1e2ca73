#include "linereg/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "linereg/kdtree.hpp"
#include "linereg/kernels/kernels.hpp"
#include "linereg/rng.hpp"
#include "linereg/sifeat.hpp"

namespace linereg {

void NetConfig::validate() const {
  if (k < 1 || stride < 1 || channels < 1 || descriptor_dim < 1) {
    throw std::invalid_argument("NetConfig: k, stride, channels, descriptor_dim must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// Parameter blocks

template <typename Scalar>
void Affine<Scalar>::resize(std::size_t in, std::size_t out) {
  cin = in;
  cout = out;
  w.assign(in * out, Scalar(0));
  b.assign(out, Scalar(0));
}

template <typename Scalar>
void Affine<Scalar>::init_he_uniform(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(cin));
  for (Scalar& x : w) x = static_cast<Scalar>(rng.uniform(-bound, bound));
  std::fill(b.begin(), b.end(), Scalar(0));
}

template <typename Scalar>
void Affine<Scalar>::zero() {
  std::fill(w.begin(), w.end(), Scalar(0));
  std::fill(b.begin(), b.end(), Scalar(0));
}

template <typename Scalar>
void NetBlocks<Scalar>::zero() {
  for_each([](Affine<Scalar>& a) { a.zero(); });
}

template <typename Scalar>
std::size_t NetBlocks<Scalar>::param_count() const {
  std::size_t n = 0;
  for_each([&](const Affine<Scalar>& a) { n += a.param_count(); });
  return n;
}

// ---------------------------------------------------------------------------
// Skip encoding

namespace {

template <typename Scalar>
std::vector<int> skip_gather_impl(const MatrixR<Scalar>& f, int point_index, int k, int S) {
  const int n = static_cast<int>(f.rows());
  if (k < 1 || S < 1) throw std::invalid_argument("skip_gather: k and S must be >= 1");
  if (point_index < 0 || point_index >= n) {
    throw std::invalid_argument("skip_gather: point index out of range");
  }
  if (n <= S * k) {
    throw std::invalid_argument("skip_gather: need more than S*k points");
  }
  std::vector<Scalar> d(static_cast<std::size_t>(n));
  kernels::row_sqdist(f.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(f.cols()),
                      f.row(point_index).data(), d.data());
  std::vector<std::pair<Scalar, int>> order;
  order.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    if (i != point_index) order.emplace_back(d[static_cast<std::size_t>(i)], i);
  }
  std::partial_sort(order.begin(), order.begin() + S * k, order.end());
  std::vector<int> out(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    out[static_cast<std::size_t>(j)] = order[static_cast<std::size_t>(S - 1 + j * S)].second;
  }
  return out;
}

}  // namespace

std::vector<int> skip_gather(const MatrixR<float>& features, int point_index, int k, int S) {
  return skip_gather_impl(features, point_index, k, S);
}
std::vector<int> skip_gather(const MatrixR<double>& features, int point_index, int k, int S) {
  return skip_gather_impl(features, point_index, k, S);
}

// ---------------------------------------------------------------------------
// Edge convolution

namespace {

// Shared core so forward() can capture argmax without the public wrapper.
template <typename Scalar>
void edgeconv_run(const Affine<Scalar>& layer, const MatrixR<Scalar>& x, const MatrixR<int>& idx,
                  MatrixR<Scalar>& y, MatrixR<int>& arg) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t cin = static_cast<std::size_t>(x.cols());
  const std::size_t k = static_cast<std::size_t>(idx.cols());
  const std::size_t cout = layer.cout;
  if (layer.cin != 2 * cin) {
    throw std::invalid_argument("edgeconv: layer expects 2x input width");
  }
  y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cout));
  arg.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cout));

  MatrixR<Scalar> edges(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(2 * cin));
  MatrixR<Scalar> act(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(cout));
  for (std::size_t j = 0; j < n; ++j) {
    const auto xj = x.row(static_cast<Eigen::Index>(j));
    for (std::size_t m = 0; m < k; ++m) {
      const int i = idx(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m));
      const auto xi = x.row(i);
      auto row = edges.row(static_cast<Eigen::Index>(m));
      row.head(static_cast<Eigen::Index>(cin)) = xj;
      row.tail(static_cast<Eigen::Index>(cin)) = xi - xj;
    }
    kernels::affine(edges.data(), k, 2 * cin, layer.w.data(), layer.b.data(), cout,
                    /*relu=*/true, act.data());
    kernels::colwise_max_argmax(act.data(), k, cout, y.row(static_cast<Eigen::Index>(j)).data(),
                                arg.row(static_cast<Eigen::Index>(j)).data());
  }
}

// Scatter-accumulate gradients through one edge convolution. `dx`, when
// non-null, receives d(loss)/d(input features).
template <typename Scalar>
void edgeconv_backward(const Affine<Scalar>& layer, const MatrixR<Scalar>& x,
                       const MatrixR<int>& idx, const MatrixR<int>& arg, const MatrixR<Scalar>& y,
                       const MatrixR<Scalar>& dy, Affine<Scalar>& dlayer, MatrixR<Scalar>* dx) {
  const Eigen::Index n = x.rows();
  const Eigen::Index cin = x.cols();
  const Eigen::Index cout = static_cast<Eigen::Index>(layer.cout);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index c = 0; c < cout; ++c) {
      const Scalar g = dy(j, c);
      // y == 0 means every pre-activation was clamped by the ReLU: no signal.
      if (g == Scalar(0) || y(j, c) <= Scalar(0)) continue;
      const int m = arg(j, c);
      const int i = idx(j, m);
      dlayer.b[static_cast<std::size_t>(c)] += g;
      Scalar* dw = dlayer.w.data();
      const Scalar* w = layer.w.data();
      for (Eigen::Index ci = 0; ci < cin; ++ci) {
        const Scalar center = x(j, ci);
        const Scalar diff = x(i, ci) - center;
        dw[ci * cout + c] += g * center;
        dw[(cin + ci) * cout + c] += g * diff;
        if (dx) {
          (*dx)(j, ci) += g * (w[ci * cout + c] - w[(cin + ci) * cout + c]);
          (*dx)(i, ci) += g * w[(cin + ci) * cout + c];
        }
      }
    }
  }
}

// Dense affine (+optional ReLU) backward for the head layers; `y_post` is the
// cached post-activation output used as the ReLU mask.
template <typename Scalar>
void affine_backward(const MatrixR<Scalar>& x, const Affine<Scalar>& layer,
                     const MatrixR<Scalar>& y_post, bool relu, const MatrixR<Scalar>& dy,
                     Affine<Scalar>& dlayer, MatrixR<Scalar>* dx) {
  MatrixR<Scalar> dpre = dy;
  if (relu) {
    dpre = (y_post.array() > Scalar(0)).select(dpre, Scalar(0));
  }
  using Map = Eigen::Map<const MatrixR<Scalar>>;
  using MutMap = Eigen::Map<MatrixR<Scalar>>;
  Map w(layer.w.data(), static_cast<Eigen::Index>(layer.cin),
        static_cast<Eigen::Index>(layer.cout));
  MutMap dw(dlayer.w.data(), static_cast<Eigen::Index>(layer.cin),
            static_cast<Eigen::Index>(layer.cout));
  dw += x.transpose() * dpre;
  for (Eigen::Index c = 0; c < dpre.cols(); ++c) {
    dlayer.b[static_cast<std::size_t>(c)] += dpre.col(c).sum();
  }
  if (dx) *dx += dpre * w.transpose();
}

template <typename Scalar>
void affine_forward(const Affine<Scalar>& layer, const MatrixR<Scalar>& x, bool relu,
                    MatrixR<Scalar>& y) {
  y.resize(x.rows(), static_cast<Eigen::Index>(layer.cout));
  kernels::affine(x.data(), static_cast<std::size_t>(x.rows()), layer.cin, layer.w.data(),
                  layer.b.data(), layer.cout, relu, y.data());
}

}  // namespace

template <typename Scalar>
MatrixR<Scalar> edgeconv_forward(const Affine<Scalar>& layer, const MatrixR<Scalar>& features,
                                 const MatrixR<int>& neighbor_index, MatrixR<int>* argmax) {
  MatrixR<Scalar> y;
  MatrixR<int> arg;
  edgeconv_run(layer, features, neighbor_index, y, arg);
  if (argmax) *argmax = std::move(arg);
  return y;
}

// ---------------------------------------------------------------------------
// MicroNet

template <typename Scalar>
MicroNet<Scalar>::MicroNet(const NetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t c = static_cast<std::size_t>(cfg_.channels);
  const std::size_t d = static_cast<std::size_t>(cfg_.descriptor_dim);
  blocks_.edge1.resize(2 * 3, c);
  blocks_.edge2.resize(2 * c, c);
  blocks_.edge3.resize(2 * c, c);
  blocks_.seg1.resize(6 * c, c);
  blocks_.seg2.resize(c, c);
  blocks_.seg3.resize(c, 2);
  blocks_.desc1.resize(6 * c, c);
  blocks_.desc2.resize(c, c);
  blocks_.desc3.resize(c, d);
  Rng rng(seed);
  blocks_.for_each([&](Affine<Scalar>& a) { a.init_he_uniform(rng); });
}

template <typename Scalar>
ForwardResult<Scalar> MicroNet<Scalar>::forward(const PointCloud& cloud,
                                                Workspace<Scalar>& ws) const {
  const Eigen::Index n = static_cast<Eigen::Index>(cloud.size());
  const int k = cfg_.k;
  const int S = cfg_.stride;
  if (static_cast<long long>(n) <= static_cast<long long>(S) * k) {
    throw std::invalid_argument("forward: need more than stride*k points");
  }
  const Eigen::Index c = cfg_.channels;
  const Eigen::Index d = cfg_.descriptor_dim;

  // Layer-1 input: raw coordinates or scale-invariant features (always 3-d).
  ws.x0.resize(n, 3);
  if (cfg_.scale_invariant_first_layer) {
    FeatureConfig fc;
    fc.k = k;
    const auto feats = compute_si_features(cloud, fc);
    for (Eigen::Index i = 0; i < n; ++i) {
      ws.x0.row(i) = feats[static_cast<std::size_t>(i)].cast<Scalar>().transpose();
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      ws.x0.row(i) = cloud.points[static_cast<std::size_t>(i)].cast<Scalar>().transpose();
    }
  }

  const bool reuse = ws.freeze_graphs && ws.idx1.rows() == n && ws.idx1.cols() == k;

  // Layer 1: neighborhoods in Euclidean space (even for the scale-invariant
  // variant), strided.
  if (!reuse) {
    ws.idx1.resize(n, k);
    const KdTree tree(cloud.points);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto near = tree.knn(cloud.points[static_cast<std::size_t>(i)], S * k,
                                 static_cast<int>(i));
      for (int j = 0; j < k; ++j) {
        ws.idx1(i, j) = near[static_cast<std::size_t>(S - 1 + j * S)];
      }
    }
  }
  edgeconv_run(blocks_.edge1, ws.x0, ws.idx1, ws.y1, ws.arg1);

  // Layers 2-3: dynamic graphs in the respective input feature space.
  if (!reuse) {
    ws.idx2.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto nb = skip_gather(ws.y1, static_cast<int>(i), k, S);
      for (int j = 0; j < k; ++j) ws.idx2(i, j) = nb[static_cast<std::size_t>(j)];
    }
  }
  edgeconv_run(blocks_.edge2, ws.y1, ws.idx2, ws.y2, ws.arg2);

  if (!reuse) {
    ws.idx3.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto nb = skip_gather(ws.y2, static_cast<int>(i), k, S);
      for (int j = 0; j < k; ++j) ws.idx3(i, j) = nb[static_cast<std::size_t>(j)];
    }
  }
  edgeconv_run(blocks_.edge3, ws.y2, ws.idx3, ws.y3, ws.arg3);

  // Per-point concatenation plus a broadcast global max feature.
  ws.concat.resize(n, 3 * c);
  ws.concat.leftCols(c) = ws.y1;
  ws.concat.middleCols(c, c) = ws.y2;
  ws.concat.rightCols(c) = ws.y3;
  ws.global_feat.resize(static_cast<std::size_t>(3 * c));
  ws.global_arg.resize(static_cast<std::size_t>(3 * c));
  kernels::colwise_max_argmax(ws.concat.data(), static_cast<std::size_t>(n),
                              static_cast<std::size_t>(3 * c), ws.global_feat.data(),
                              ws.global_arg.data());
  ws.head_in.resize(n, 6 * c);
  ws.head_in.leftCols(3 * c) = ws.concat;
  for (Eigen::Index j = 0; j < 3 * c; ++j) {
    ws.head_in.col(3 * c + j).setConstant(ws.global_feat[static_cast<std::size_t>(j)]);
  }

  // Heads.
  affine_forward(blocks_.seg1, ws.head_in, true, ws.seg_h1);
  affine_forward(blocks_.seg2, ws.seg_h1, true, ws.seg_h2);
  affine_forward(blocks_.seg3, ws.seg_h2, false, ws.seg_logits);
  affine_forward(blocks_.desc1, ws.head_in, true, ws.desc_h1);
  affine_forward(blocks_.desc2, ws.desc_h1, true, ws.desc_h2);
  affine_forward(blocks_.desc3, ws.desc_h2, false, ws.desc_raw);

  // Stable softmax.
  ws.seg_probs.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar m = std::max(ws.seg_logits(i, 0), ws.seg_logits(i, 1));
    const Scalar e0 = std::exp(ws.seg_logits(i, 0) - m);
    const Scalar e1 = std::exp(ws.seg_logits(i, 1) - m);
    const Scalar z = e0 + e1;
    ws.seg_probs(i, 0) = e0 / z;
    ws.seg_probs(i, 1) = e1 / z;
  }

  // Unit-normalized descriptors. A raw row at the origin (every head ReLU
  // dead and a zero bias — common right after initialization) has no
  // direction to normalize; it maps to the fixed unit vector e0 so the
  // unit-norm postcondition holds for every input, and backward treats the
  // row as locally constant (zero gradient), the same convention as the
  // segmentation-loss probability floor.
  constexpr Scalar kNormFloor = Scalar(1e-12);
  ws.desc_unit.resize(n, d);
  ws.desc_norm.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar norm = ws.desc_raw.row(i).norm();
    ws.desc_norm[static_cast<std::size_t>(i)] = std::max(norm, kNormFloor);
    if (norm > kNormFloor) {
      ws.desc_unit.row(i) = ws.desc_raw.row(i) / norm;
    } else {
      ws.desc_unit.row(i).setZero();
      ws.desc_unit(i, 0) = Scalar(1);
    }
  }

  ForwardResult<Scalar> out;
  out.seg_logits = ws.seg_logits;
  out.seg_probs = ws.seg_probs;
  out.descriptors = ws.desc_unit;
  return out;
}

template <typename Scalar>
NetBlocks<Scalar> MicroNet<Scalar>::backward(const MatrixR<Scalar>& dprobs,
                                             const MatrixR<Scalar>& ddesc,
                                             const Workspace<Scalar>& ws) const {
  const Eigen::Index n = ws.x0.rows();
  const Eigen::Index c = cfg_.channels;
  if (dprobs.rows() != n || dprobs.cols() != 2 || ddesc.rows() != n ||
      ddesc.cols() != cfg_.descriptor_dim) {
    throw std::invalid_argument("backward: gradient shapes do not match the cached forward");
  }

  NetBlocks<Scalar> g;
  g.edge1.resize(blocks_.edge1.cin, blocks_.edge1.cout);
  g.edge2.resize(blocks_.edge2.cin, blocks_.edge2.cout);
  g.edge3.resize(blocks_.edge3.cin, blocks_.edge3.cout);
  g.seg1.resize(blocks_.seg1.cin, blocks_.seg1.cout);
  g.seg2.resize(blocks_.seg2.cin, blocks_.seg2.cout);
  g.seg3.resize(blocks_.seg3.cin, blocks_.seg3.cout);
  g.desc1.resize(blocks_.desc1.cin, blocks_.desc1.cout);
  g.desc2.resize(blocks_.desc2.cin, blocks_.desc2.cout);
  g.desc3.resize(blocks_.desc3.cin, blocks_.desc3.cout);

  // Softmax Jacobian: dlogit_c = p_c * (g_c - sum_k g_k p_k).
  MatrixR<Scalar> dlogits(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar dot =
        dprobs(i, 0) * ws.seg_probs(i, 0) + dprobs(i, 1) * ws.seg_probs(i, 1);
    dlogits(i, 0) = ws.seg_probs(i, 0) * (dprobs(i, 0) - dot);
    dlogits(i, 1) = ws.seg_probs(i, 1) * (dprobs(i, 1) - dot);
  }

  // L2-normalization Jacobian: d_raw = (g - y*(y.g)) / norm. A floored row
  // emitted the constant e0 (see forward), so its exact local derivative is
  // zero; anything else (e.g. scaling by 1/floor) would swamp every real
  // gradient in the batch.
  constexpr Scalar kNormFloor = Scalar(1e-12);
  MatrixR<Scalar> draw(n, ddesc.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar norm = ws.desc_norm[static_cast<std::size_t>(i)];
    if (norm > kNormFloor) {
      const Scalar dot = ws.desc_unit.row(i).dot(ddesc.row(i));
      draw.row(i) = (ddesc.row(i) - ws.desc_unit.row(i) * dot) / norm;
    } else {
      draw.row(i).setZero();
    }
  }

  // Heads.
  MatrixR<Scalar> dhead_in = MatrixR<Scalar>::Zero(n, 6 * c);
  {
    MatrixR<Scalar> dh2 = MatrixR<Scalar>::Zero(n, c);
    MatrixR<Scalar> dh1 = MatrixR<Scalar>::Zero(n, c);
    affine_backward(ws.seg_h2, blocks_.seg3, ws.seg_logits, false, dlogits, g.seg3, &dh2);
    affine_backward(ws.seg_h1, blocks_.seg2, ws.seg_h2, true, dh2, g.seg2, &dh1);
    affine_backward(ws.head_in, blocks_.seg1, ws.seg_h1, true, dh1, g.seg1, &dhead_in);
  }
  {
    MatrixR<Scalar> dh2 = MatrixR<Scalar>::Zero(n, c);
    MatrixR<Scalar> dh1 = MatrixR<Scalar>::Zero(n, c);
    affine_backward(ws.desc_h2, blocks_.desc3, ws.desc_raw, false, draw, g.desc3, &dh2);
    affine_backward(ws.desc_h1, blocks_.desc2, ws.desc_h2, true, dh2, g.desc2, &dh1);
    affine_backward(ws.head_in, blocks_.desc1, ws.desc_h1, true, dh1, g.desc1, &dhead_in);
  }

  // Split the head input: per-point slice + broadcast global slice (the
  // global column gradient flows to the argmax row of concat).
  MatrixR<Scalar> dconcat = dhead_in.leftCols(3 * c).eval();
  for (Eigen::Index j = 0; j < 3 * c; ++j) {
    const Scalar total = dhead_in.col(3 * c + j).sum();
    dconcat(ws.global_arg[static_cast<std::size_t>(j)], j) += total;
  }

  MatrixR<Scalar> dy3 = dconcat.rightCols(c).eval();
  MatrixR<Scalar> dy2 = dconcat.middleCols(c, c).eval();
  MatrixR<Scalar> dy1 = dconcat.leftCols(c).eval();

  edgeconv_backward(blocks_.edge3, ws.y2, ws.idx3, ws.arg3, ws.y3, dy3, g.edge3, &dy2);
  edgeconv_backward(blocks_.edge2, ws.y1, ws.idx2, ws.arg2, ws.y2, dy2, g.edge2, &dy1);
  edgeconv_backward(blocks_.edge1, ws.x0, ws.idx1, ws.arg1, ws.y1, dy1, g.edge1,
                    static_cast<MatrixR<Scalar>*>(nullptr));
  return g;
}

// ---------------------------------------------------------------------------
// Adam

double scheduled_lr(double base_lr, int epoch) {
  if (epoch < 0) throw std::invalid_argument("scheduled_lr: epoch must be >= 0");
  return base_lr * std::pow(0.5, epoch / 15);
}

template <typename Scalar>
void adam_step(MicroNet<Scalar>& net, const NetBlocks<Scalar>& grads, AdamState<Scalar>& state,
               double lr) {
  const std::size_t total = net.blocks().param_count();
  if (grads.param_count() != total) {
    throw std::invalid_argument("adam_step: gradient shapes do not match the net");
  }
  if (state.m.size() != total) {
    state.m.assign(total, Scalar(0));
    state.v.assign(total, Scalar(0));
    state.t = 0;
  }
  ++state.t;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));

  // Walk parameters and gradients in lockstep (identical block order).
  std::vector<Affine<Scalar>*> ps;
  std::vector<const Affine<Scalar>*> gs;
  net.blocks().for_each([&](Affine<Scalar>& a) { ps.push_back(&a); });
  grads.for_each([&](const Affine<Scalar>& a) { gs.push_back(&a); });

  std::size_t off = 0;
  const auto update = [&](Scalar* p, const Scalar* gr, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i, ++off) {
      const double gd = static_cast<double>(gr[i]);
      const double m = beta1 * static_cast<double>(state.m[off]) + (1.0 - beta1) * gd;
      const double v = beta2 * static_cast<double>(state.v[off]) + (1.0 - beta2) * gd * gd;
      state.m[off] = static_cast<Scalar>(m);
      state.v[off] = static_cast<Scalar>(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p[i] = static_cast<Scalar>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + eps));
    }
  };
  for (std::size_t bi = 0; bi < ps.size(); ++bi) {
    if (ps[bi]->cin != gs[bi]->cin || ps[bi]->cout != gs[bi]->cout) {
      throw std::invalid_argument("adam_step: block shape mismatch");
    }
    update(ps[bi]->w.data(), gs[bi]->w.data(), ps[bi]->w.size());
    update(ps[bi]->b.data(), gs[bi]->b.data(), ps[bi]->b.size());
  }
}

// ---------------------------------------------------------------------------
// Explicit instantiations: float for production, double for the
// finite-difference gradient oracle.

template struct Affine<float>;
template struct Affine<double>;
template struct NetBlocks<float>;
template struct NetBlocks<double>;
template class MicroNet<float>;
template class MicroNet<double>;
template MatrixR<float> edgeconv_forward<float>(const Affine<float>&, const MatrixR<float>&,
                                                const MatrixR<int>&, MatrixR<int>*);
template MatrixR<double> edgeconv_forward<double>(const Affine<double>&, const MatrixR<double>&,
                                                  const MatrixR<int>&, MatrixR<int>*);
template void adam_step<float>(MicroNet<float>&, const NetBlocks<float>&, AdamState<float>&,
                               double);
template void adam_step<double>(MicroNet<double>&, const NetBlocks<double>&, AdamState<double>&,
                                double);

}  // namespace linereg
