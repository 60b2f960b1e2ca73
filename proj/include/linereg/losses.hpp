#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

struct LossConfig {
  double delta_same = 0.1;  // pull margin: member descriptors within this L1 radius of their mean
  double delta_diff = 1.0;  // push margin: line means at least 2*delta_diff apart
  double omega = 2.0;       // segmentation weight in the total loss

  bool operator==(const LossConfig&) const = default;
  void validate() const;  // throws unless delta_diff > delta_same > 0 and omega > 0
};

// Per-line membership plus the arithmetic mean descriptor of each line.
template <typename Scalar>
struct LineGroup {
  std::vector<std::vector<int>> members;  // disjoint, non-empty index lists
  MatrixR<Scalar> mu;                     // line_count x d

  std::size_t line_count() const { return members.size(); }
};

// Validates membership (disjoint, non-empty, in range) and computes the mean
// descriptors. Throws std::invalid_argument on violations.
template <typename Scalar>
LineGroup<Scalar> build_line_group(const MatrixR<Scalar>& descriptors,
                                   const std::vector<std::vector<int>>& members);

// Mean over points of -log(max(p_true, 1e-12)). `dprobs`, when non-null, is
// resized and filled with the exact derivative of that expression (zero on
// floored entries). Throws std::invalid_argument if shapes disagree or rows
// do not sum to 1 within 1e-4.
template <typename Scalar>
double seg_loss(const MatrixR<Scalar>& seg_probs, const std::vector<std::uint8_t>& labels,
                MatrixR<Scalar>* dprobs = nullptr);

struct DiscriminativeTerms {
  double same = 0.0;
  double diff = 0.0;
  double match = 0.0;
  double mismatch = 0.0;
};

// The four descriptor terms:
//   same:     (1/N) sum_i (1/|K_i|) sum_{j in K_i} [ ||mu_i - d_j||_1 - delta_s ]+^2
//   diff:     (1/C(N,2)) sum_{a<b} [ 2*delta_d - ||mu_a - mu_b||_1 ]+^2
//   match:    (1/M) sum_{(i,i') in corr} [ ||mu_i - mu'_i'||_1 - delta_s ]+^2
//   mismatch: (1/C(M,2)) sum_{a<b} [ 2*delta_d - ||mu_{i_a} - mu'_{i_b}||_1 ]+^2
// With a second cloud present, `same` and `diff` are averaged over the two
// clouds. Degenerate denominators (N < 2, no correspondences, M < 2) make the
// respective term 0. Gradients flow through both mu (distributed over
// members) and d_j; `ddesc_*`, when non-null, are resized, zeroed, and filled
// with d(total of the four terms)/d(descriptor).
//
// `desc_b`/`groups_b`/`correspondences` must be all present or all absent;
// correspondences are (line index in a, line index in b) pairs.
template <typename Scalar>
DiscriminativeTerms discriminative_losses(
    const MatrixR<Scalar>& desc_a, const LineGroup<Scalar>& groups_a,
    const MatrixR<Scalar>* desc_b, const LineGroup<Scalar>* groups_b,
    const std::vector<std::pair<int, int>>* correspondences, const LossConfig& cfg,
    MatrixR<Scalar>* ddesc_a = nullptr, MatrixR<Scalar>* ddesc_b = nullptr);

// omega * seg + same + diff + match + mismatch. Throws std::invalid_argument
// if any term is negative or non-finite.
double total_loss(double seg, const DiscriminativeTerms& terms, const LossConfig& cfg);

}  // namespace linereg
