#include "linereg/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "linereg/rng.hpp"

namespace linereg {

namespace {

// Frozen neighbor graphs of one cloud, swapped into the shared workspace for
// each visit. Caching only the index matrices (not the whole workspace)
// keeps the per-cloud footprint at ~k ints per point.
struct GraphCache {
  MatrixR<int> idx1, idx2, idx3;
  bool ready = false;
};

// Runs one forward pass, reusing this cloud's cached graphs when available
// and refreshing the cache from the workspace afterwards.
ForwardResult<float> forward_cached(const MicroNet<float>& net, const PointCloud& cloud,
                                    Workspace<float>& ws, GraphCache& cache) {
  ws.freeze_graphs = cache.ready;
  if (cache.ready) {
    ws.idx1.swap(cache.idx1);
    ws.idx2.swap(cache.idx2);
    ws.idx3.swap(cache.idx3);
  }
  ForwardResult<float> out = net.forward(cloud, ws);
  return out;
}

// Moves the (possibly rebuilt) graphs back into the cache once the backward
// pass no longer needs the workspace.
void stash_graphs(Workspace<float>& ws, GraphCache& cache) {
  ws.idx1.swap(cache.idx1);
  ws.idx2.swap(cache.idx2);
  ws.idx3.swap(cache.idx3);
  cache.ready = true;
}

void check_cloud(const PointCloud& cloud, const NetConfig& cfg, const char* who) {
  if (!cloud.has_labels()) {
    throw std::invalid_argument(std::string(who) + ": every cloud needs per-point labels");
  }
  if (static_cast<long long>(cloud.size()) <=
      static_cast<long long>(cfg.stride) * cfg.k) {
    throw std::invalid_argument(std::string(who) +
                                ": cloud too small for the net's stride*k neighborhood");
  }
}

void accumulate(NetBlocks<float>& into, const NetBlocks<float>& add) {
  bool first = (into.edge1.w.empty());
  if (first) {
    into = add;
    return;
  }
  auto it = [&](Affine<float>& dst, const Affine<float>& src) {
    for (std::size_t i = 0; i < dst.w.size(); ++i) dst.w[i] += src.w[i];
    for (std::size_t i = 0; i < dst.b.size(); ++i) dst.b[i] += src.b[i];
  };
  it(into.edge1, add.edge1);
  it(into.edge2, add.edge2);
  it(into.edge3, add.edge3);
  it(into.seg1, add.seg1);
  it(into.seg2, add.seg2);
  it(into.seg3, add.seg3);
  it(into.desc1, add.desc1);
  it(into.desc2, add.desc2);
  it(into.desc3, add.desc3);
}

// Deterministic train/holdout split: a seeded shuffle of [0, n), first
// floor(fraction*n) indices held out.
void split_items(int n, double fraction, const Rng& root, std::vector<int>& train,
                 std::vector<int>& holdout) {
  Rng split_rng = root.derive(0);
  std::vector<int> order = split_rng.sample_indices(n, n);
  const int n_hold = static_cast<int>(std::floor(fraction * n));
  holdout.assign(order.begin(), order.begin() + n_hold);
  train.assign(order.begin() + n_hold, order.end());
  if (train.empty()) {  // degenerate split; keep at least one training item
    train.push_back(holdout.back());
    holdout.pop_back();
  }
}

double accuracy_over(const MicroNet<float>& net, const std::vector<const PointCloud*>& clouds) {
  Workspace<float> ws;
  ws.freeze_graphs = false;
  long long correct = 0, total = 0;
  for (const PointCloud* cloud : clouds) {
    const ForwardResult<float> out = net.forward(*cloud, ws);
    const Eigen::Index n = out.seg_probs.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint8_t pred = out.seg_probs(i, 1) > out.seg_probs(i, 0) ? 1 : 0;
      correct += (pred == cloud->labels[static_cast<std::size_t>(i)]) ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

void TrainOptions::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("TrainOptions: learning_rate must be positive");
  }
  if (max_epochs < 1) throw std::invalid_argument("TrainOptions: max_epochs must be >= 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction <= 0.9)) {
    throw std::invalid_argument("TrainOptions: holdout_fraction must be in [0, 0.9]");
  }
  if (!(target_accuracy > 0.0)) {
    throw std::invalid_argument("TrainOptions: target_accuracy must be positive");
  }
  if (graph_refresh_epochs < 0) {
    throw std::invalid_argument("TrainOptions: graph_refresh_epochs must be >= 0");
  }
  loss.validate();
}

double segmentation_accuracy(const MicroNet<float>& net, const std::vector<PointCloud>& clouds) {
  if (clouds.empty()) {
    throw std::invalid_argument("segmentation_accuracy: no clouds given");
  }
  std::vector<const PointCloud*> ptrs;
  ptrs.reserve(clouds.size());
  for (const PointCloud& c : clouds) {
    check_cloud(c, net.config(), "segmentation_accuracy");
    ptrs.push_back(&c);
  }
  return accuracy_over(net, ptrs);
}

TrainResult train_segmentation(MicroNet<float>& net, const std::vector<PointCloud>& clouds,
                               const TrainOptions& opts, std::uint64_t seed,
                               const EpochCallback& on_epoch) {
  opts.validate();
  if (clouds.empty()) throw std::invalid_argument("train_segmentation: no clouds given");
  for (const PointCloud& c : clouds) check_cloud(c, net.config(), "train_segmentation");

  const Rng root(seed);
  std::vector<int> train_idx, holdout_idx;
  split_items(static_cast<int>(clouds.size()), opts.holdout_fraction, root, train_idx,
              holdout_idx);

  std::vector<const PointCloud*> monitor;
  for (int i : holdout_idx.empty() ? train_idx : holdout_idx) monitor.push_back(&clouds[i]);

  std::vector<GraphCache> caches(clouds.size());
  Workspace<float> ws;
  AdamState<float> adam;
  MatrixR<float> dprobs, zero_ddesc;

  TrainResult result;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    if (opts.graph_refresh_epochs > 0 && epoch > 0 && epoch % opts.graph_refresh_epochs == 0) {
      for (GraphCache& c : caches) c.ready = false;
    }
    const double lr = scheduled_lr(opts.learning_rate, epoch);
    Rng order_rng = root.derive(1 + static_cast<std::uint64_t>(epoch));
    const std::vector<int> order =
        order_rng.sample_indices(static_cast<int>(train_idx.size()),
                                 static_cast<int>(train_idx.size()));

    double loss_sum = 0.0;
    for (int slot : order) {
      const int ci = train_idx[static_cast<std::size_t>(slot)];
      const PointCloud& cloud = clouds[static_cast<std::size_t>(ci)];
      GraphCache& cache = caches[static_cast<std::size_t>(ci)];

      const ForwardResult<float> out = forward_cached(net, cloud, ws, cache);
      loss_sum += seg_loss(out.seg_probs, cloud.labels, &dprobs);
      zero_ddesc.setZero(out.descriptors.rows(), out.descriptors.cols());
      const NetBlocks<float> grads = net.backward(dprobs, zero_ddesc, ws);
      stash_graphs(ws, cache);
      adam_step(net, grads, adam, lr);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.holdout_accuracy = accuracy_over(net, monitor);
    result.epochs.push_back(stats);
    result.final_accuracy = stats.holdout_accuracy;
    if (on_epoch) on_epoch(stats);
    if (stats.holdout_accuracy >= opts.target_accuracy) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

TrainResult train_joint(MicroNet<float>& net, const std::vector<JointItem>& items,
                        const TrainOptions& opts, std::uint64_t seed,
                        const EpochCallback& on_epoch) {
  opts.validate();
  if (items.empty()) throw std::invalid_argument("train_joint: no items given");
  for (const JointItem& it : items) {
    check_cloud(it.cloud_a, net.config(), "train_joint");
    check_cloud(it.cloud_b, net.config(), "train_joint");
  }

  const Rng root(seed);
  std::vector<int> train_idx, holdout_idx;
  split_items(static_cast<int>(items.size()), opts.holdout_fraction, root, train_idx,
              holdout_idx);

  std::vector<const PointCloud*> monitor;
  for (int i : holdout_idx.empty() ? train_idx : holdout_idx) {
    monitor.push_back(&items[i].cloud_a);
    monitor.push_back(&items[i].cloud_b);
  }

  // Two caches per item: one per view.
  std::vector<GraphCache> caches_a(items.size()), caches_b(items.size());
  Workspace<float> ws_a, ws_b;
  AdamState<float> adam;
  MatrixR<float> dprobs_a, dprobs_b, ddesc_a, ddesc_b;

  TrainResult result;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    if (opts.graph_refresh_epochs > 0 && epoch > 0 && epoch % opts.graph_refresh_epochs == 0) {
      for (GraphCache& c : caches_a) c.ready = false;
      for (GraphCache& c : caches_b) c.ready = false;
    }
    const double lr = scheduled_lr(opts.learning_rate, epoch);
    Rng order_rng = root.derive(1 + static_cast<std::uint64_t>(epoch));
    const std::vector<int> order =
        order_rng.sample_indices(static_cast<int>(train_idx.size()),
                                 static_cast<int>(train_idx.size()));

    double loss_sum = 0.0;
    for (int slot : order) {
      const int ii = train_idx[static_cast<std::size_t>(slot)];
      const JointItem& item = items[static_cast<std::size_t>(ii)];

      const ForwardResult<float> out_a =
          forward_cached(net, item.cloud_a, ws_a, caches_a[static_cast<std::size_t>(ii)]);
      const ForwardResult<float> out_b =
          forward_cached(net, item.cloud_b, ws_b, caches_b[static_cast<std::size_t>(ii)]);

      const double seg_a = seg_loss(out_a.seg_probs, item.cloud_a.labels, &dprobs_a);
      const double seg_b = seg_loss(out_b.seg_probs, item.cloud_b.labels, &dprobs_b);
      const double seg = 0.5 * (seg_a + seg_b);

      const LineGroup<float> groups_a = build_line_group(out_a.descriptors, item.lines_a);
      const LineGroup<float> groups_b = build_line_group(out_b.descriptors, item.lines_b);
      const DiscriminativeTerms terms = discriminative_losses(
          out_a.descriptors, groups_a, &out_b.descriptors, &groups_b, &item.correspondences,
          opts.loss, &ddesc_a, &ddesc_b);
      loss_sum += total_loss(seg, terms, opts.loss);

      // d(total)/d(probs) carries the segmentation weight and the 1/2 from
      // averaging the two per-cloud means.
      const float seg_scale = static_cast<float>(0.5 * opts.loss.omega);
      dprobs_a *= seg_scale;
      dprobs_b *= seg_scale;

      NetBlocks<float> grads = net.backward(dprobs_a, ddesc_a, ws_a);
      stash_graphs(ws_a, caches_a[static_cast<std::size_t>(ii)]);
      accumulate(grads, net.backward(dprobs_b, ddesc_b, ws_b));
      stash_graphs(ws_b, caches_b[static_cast<std::size_t>(ii)]);
      adam_step(net, grads, adam, lr);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.holdout_accuracy = accuracy_over(net, monitor);
    result.epochs.push_back(stats);
    result.final_accuracy = stats.holdout_accuracy;
    if (on_epoch) on_epoch(stats);
    if (stats.holdout_accuracy >= opts.target_accuracy) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

}  // namespace linereg
