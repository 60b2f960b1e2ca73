#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "linereg/losses.hpp"
#include "linereg/micronet.hpp"
#include "linereg/types.hpp"

namespace linereg {

// Knobs shared by the segmentation-only and joint training loops.
struct TrainOptions {
  double learning_rate = 0.001;  // base rate; decays 2x every 15 epochs
  int max_epochs = 50;
  double holdout_fraction = 0.2;  // items held out for accuracy monitoring
  // Stop as soon as the monitored accuracy reaches this; values > 1 disable
  // the early exit (accuracy never exceeds 1).
  double target_accuracy = 2.0;
  // Cached neighbor graphs are rebuilt from the current features every this
  // many epochs; 0 freezes them after the first build. Feature-space graphs
  // drift as the weights move, so an occasional rebuild keeps the dynamic-
  // graph behavior without paying the O(N^2) search on every pass.
  int graph_refresh_epochs = 10;
  LossConfig loss;  // margins + segmentation weight (joint training only)

  void validate() const;  // throws std::invalid_argument on bad values
};

// One completed epoch, as recorded in TrainResult and streamed to on_epoch.
struct EpochStats {
  int epoch = 0;       // 0-based
  double lr = 0.0;     // effective learning rate this epoch
  double train_loss = 0.0;  // mean per-item loss over the epoch's visits
  // Per-point segmentation accuracy on the held-out items after the epoch;
  // computed on the training items instead when the split left none out.
  double holdout_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;  // one entry per completed epoch
  double final_accuracy = 0.0;     // holdout_accuracy of the last epoch
  bool reached_target = false;     // the early exit fired
};

// Progress hook; called after each epoch with that epoch's stats.
using EpochCallback = std::function<void(const EpochStats&)>;

// Fraction of points across all clouds whose most probable predicted class
// equals their label. Runs plain (dynamic-graph) forward passes. Throws
// std::invalid_argument if `clouds` is empty, any cloud lacks labels, or any
// cloud is too small for the net's neighborhood size.
double segmentation_accuracy(const MicroNet<float>& net, const std::vector<PointCloud>& clouds);

// Segmentation-only training (the synthetic pretraining phase and the
// retrain step of the labeling rounds): cross-entropy on the per-point
// labels, one Adam step per cloud, visit order reshuffled each epoch.
// Deterministic in (net state, clouds, opts, seed): single-threaded,
// sequential, all randomness from `seed`. Throws std::invalid_argument on
// invalid options, an empty dataset, a cloud without labels, or a cloud too
// small for the net.
TrainResult train_segmentation(MicroNet<float>& net, const std::vector<PointCloud>& clouds,
                               const TrainOptions& opts, std::uint64_t seed,
                               const EpochCallback& on_epoch = {});

// One joint-training example: two labeled views of a scene, the per-line
// member index lists in each view, and which lines correspond across views.
struct JointItem {
  PointCloud cloud_a, cloud_b;
  std::vector<std::vector<int>> lines_a, lines_b;    // per-line member indices
  std::vector<std::pair<int, int>> correspondences;  // (line in a, line in b)
};

// Joint segmentation + description training: per item, the loss is the
// segmentation weight times the mean of the two per-cloud cross-entropies,
// plus the four descriptor terms over the item's line groups and
// correspondences; one Adam step per item. Accuracy is monitored over both
// clouds of the held-out items. Determinism and errors as in
// train_segmentation; line/correspondence validation is delegated to the
// loss layer.
TrainResult train_joint(MicroNet<float>& net, const std::vector<JointItem>& items,
                        const TrainOptions& opts, std::uint64_t seed,
                        const EpochCallback& on_epoch = {});

}  // namespace linereg
