#include "linereg/losses.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "linereg/kernels/kernels.hpp"

namespace linereg {

namespace {

constexpr double kProbFloor = 1e-12;

// Subgradient convention for |x| at 0: zero.
template <typename Scalar>
Scalar sign_of(Scalar v) {
  if (v > Scalar(0)) return Scalar(1);
  if (v < Scalar(0)) return Scalar(-1);
  return Scalar(0);
}

// Pull term for one cloud: mean over lines of the mean-over-members squared
// hinge on (||mu_i - d_j||_1 - delta_s). `scale` folds in the two-cloud
// average. Gradients accumulate into dmu (line means) and ddesc (direct d_j
// path); the mu -> member distribution happens after all terms.
template <typename Scalar>
double same_term(const MatrixR<Scalar>& desc, const LineGroup<Scalar>& group, double delta_s,
                 double scale, MatrixR<Scalar>* dmu, MatrixR<Scalar>* ddesc) {
  const std::size_t n_lines = group.line_count();
  if (n_lines == 0) return 0.0;
  const Eigen::Index d = desc.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n_lines; ++i) {
    const auto& members = group.members[i];
    double line_sum = 0.0;
    const double member_scale = scale / (static_cast<double>(n_lines) * members.size());
    for (int j : members) {
      const Scalar dist =
          kernels::l1_distance(group.mu.row(i).data(), desc.row(j).data(), static_cast<std::size_t>(d));
      const double t = static_cast<double>(dist) - delta_s;
      if (t <= 0.0) continue;
      line_sum += t * t;
      if (dmu != nullptr) {
        const Scalar coeff = static_cast<Scalar>(2.0 * t * member_scale);
        for (Eigen::Index c = 0; c < d; ++c) {
          const Scalar s = sign_of(group.mu(i, c) - desc(j, c));
          (*dmu)(i, c) += coeff * s;
          (*ddesc)(j, c) -= coeff * s;
        }
      }
    }
    total += line_sum / members.size();
  }
  return scale * total / n_lines;
}

// Push term for one cloud: mean over unordered line pairs of the squared
// hinge on (2*delta_d - ||mu_a - mu_b||_1). Zero when fewer than two lines.
template <typename Scalar>
double diff_term(const LineGroup<Scalar>& group, double delta_d, double scale,
                 MatrixR<Scalar>* dmu) {
  const std::size_t n_lines = group.line_count();
  if (n_lines < 2) return 0.0;
  const Eigen::Index d = group.mu.cols();
  const double n_pairs = 0.5 * n_lines * (n_lines - 1);
  double total = 0.0;
  for (std::size_t a = 0; a + 1 < n_lines; ++a) {
    for (std::size_t b = a + 1; b < n_lines; ++b) {
      const Scalar dist =
          kernels::l1_distance(group.mu.row(a).data(), group.mu.row(b).data(), static_cast<std::size_t>(d));
      const double t = 2.0 * delta_d - static_cast<double>(dist);
      if (t <= 0.0) continue;
      total += t * t;
      if (dmu != nullptr) {
        // d t / d mu_a = -sign(mu_a - mu_b); the hinge square contributes 2t.
        const Scalar coeff = static_cast<Scalar>(2.0 * t * scale / n_pairs);
        for (Eigen::Index c = 0; c < d; ++c) {
          const Scalar s = sign_of(group.mu(a, c) - group.mu(b, c));
          (*dmu)(a, c) -= coeff * s;
          (*dmu)(b, c) += coeff * s;
        }
      }
    }
  }
  return scale * total / n_pairs;
}

// Distribute accumulated mean-descriptor gradients onto the member
// descriptors: mu_i is the arithmetic mean, so each member receives
// dmu_i / |K_i|.
template <typename Scalar>
void scatter_mu_grad(const LineGroup<Scalar>& group, const MatrixR<Scalar>& dmu,
                     MatrixR<Scalar>& ddesc) {
  for (std::size_t i = 0; i < group.line_count(); ++i) {
    const auto& members = group.members[i];
    const Scalar inv = Scalar(1) / static_cast<Scalar>(members.size());
    for (int j : members) {
      ddesc.row(j) += dmu.row(static_cast<Eigen::Index>(i)) * inv;
    }
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(delta_same > 0.0) || !(delta_diff > delta_same)) {
    throw std::invalid_argument("LossConfig: need delta_diff > delta_same > 0, got delta_same=" +
                                std::to_string(delta_same) +
                                " delta_diff=" + std::to_string(delta_diff));
  }
  if (!(omega > 0.0)) {
    throw std::invalid_argument("LossConfig: omega must be positive, got " +
                                std::to_string(omega));
  }
}

template <typename Scalar>
LineGroup<Scalar> build_line_group(const MatrixR<Scalar>& descriptors,
                                   const std::vector<std::vector<int>>& members) {
  const Eigen::Index n = descriptors.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  LineGroup<Scalar> group;
  group.members = members;
  group.mu = MatrixR<Scalar>::Zero(static_cast<Eigen::Index>(members.size()), descriptors.cols());
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].empty()) {
      throw std::invalid_argument("build_line_group: line " + std::to_string(i) + " has no members");
    }
    for (int j : members[i]) {
      if (j < 0 || j >= n) {
        throw std::invalid_argument("build_line_group: member index " + std::to_string(j) +
                                    " outside [0, " + std::to_string(n) + ")");
      }
      if (seen[static_cast<std::size_t>(j)]) {
        throw std::invalid_argument("build_line_group: point " + std::to_string(j) +
                                    " assigned to more than one line");
      }
      seen[static_cast<std::size_t>(j)] = 1;
      group.mu.row(static_cast<Eigen::Index>(i)) += descriptors.row(j);
    }
    group.mu.row(static_cast<Eigen::Index>(i)) /= static_cast<Scalar>(members[i].size());
  }
  return group;
}

template <typename Scalar>
double seg_loss(const MatrixR<Scalar>& seg_probs, const std::vector<std::uint8_t>& labels,
                MatrixR<Scalar>* dprobs) {
  const Eigen::Index n = seg_probs.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("seg_loss: " + std::to_string(n) + " probability rows vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (seg_probs.cols() != 2) {
    throw std::invalid_argument("seg_loss: expected 2 columns, got " +
                                std::to_string(seg_probs.cols()));
  }
  if (n == 0) throw std::invalid_argument("seg_loss: empty input");
  if (dprobs != nullptr) {
    dprobs->setZero(n, 2);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_sum = static_cast<double>(seg_probs(i, 0)) + static_cast<double>(seg_probs(i, 1));
    if (std::abs(row_sum - 1.0) > 1e-4) {
      throw std::invalid_argument("seg_loss: row " + std::to_string(i) + " sums to " +
                                  std::to_string(row_sum) + ", not 1");
    }
    if (labels[static_cast<std::size_t>(i)] > 1) {
      throw std::invalid_argument("seg_loss: label " +
                                  std::to_string(labels[static_cast<std::size_t>(i)]) +
                                  " at row " + std::to_string(i) + " is not binary");
    }
    const Eigen::Index c = labels[static_cast<std::size_t>(i)] ? 1 : 0;
    const double p = static_cast<double>(seg_probs(i, c));
    if (p > kProbFloor) {
      total += -std::log(p);
      if (dprobs != nullptr) {
        (*dprobs)(i, c) = static_cast<Scalar>(-1.0 / (p * static_cast<double>(n)));
      }
    } else {
      total += -std::log(kProbFloor);  // floored: constant, zero gradient
    }
  }
  return total / static_cast<double>(n);
}

template <typename Scalar>
DiscriminativeTerms discriminative_losses(
    const MatrixR<Scalar>& desc_a, const LineGroup<Scalar>& groups_a,
    const MatrixR<Scalar>* desc_b, const LineGroup<Scalar>* groups_b,
    const std::vector<std::pair<int, int>>* correspondences, const LossConfig& cfg,
    MatrixR<Scalar>* ddesc_a, MatrixR<Scalar>* ddesc_b) {
  cfg.validate();
  const bool has_pair = desc_b != nullptr;
  if ((groups_b != nullptr) != has_pair || (correspondences != nullptr) != has_pair) {
    throw std::invalid_argument(
        "discriminative_losses: desc_b, groups_b and correspondences must all be present or all "
        "absent");
  }
  if (has_pair && desc_b->cols() != desc_a.cols()) {
    throw std::invalid_argument("discriminative_losses: descriptor widths disagree");
  }
  const Eigen::Index d = desc_a.cols();

  const bool want_grad = ddesc_a != nullptr;
  if (want_grad) {
    ddesc_a->setZero(desc_a.rows(), d);
    if (has_pair) {
      if (ddesc_b == nullptr) {
        throw std::invalid_argument("discriminative_losses: ddesc_b required with a second cloud");
      }
      ddesc_b->setZero(desc_b->rows(), d);
    }
  }

  MatrixR<Scalar> dmu_a, dmu_b;
  if (want_grad) {
    dmu_a = MatrixR<Scalar>::Zero(static_cast<Eigen::Index>(groups_a.line_count()), d);
    if (has_pair) {
      dmu_b = MatrixR<Scalar>::Zero(static_cast<Eigen::Index>(groups_b->line_count()), d);
    }
  }
  MatrixR<Scalar>* dmu_a_ptr = want_grad ? &dmu_a : nullptr;
  MatrixR<Scalar>* dmu_b_ptr = want_grad && has_pair ? &dmu_b : nullptr;

  DiscriminativeTerms terms;
  const double cloud_scale = has_pair ? 0.5 : 1.0;

  terms.same = same_term(desc_a, groups_a, cfg.delta_same, cloud_scale, dmu_a_ptr, ddesc_a);
  terms.diff = diff_term(groups_a, cfg.delta_diff, cloud_scale, dmu_a_ptr);
  if (has_pair) {
    terms.same += same_term(*desc_b, *groups_b, cfg.delta_same, cloud_scale, dmu_b_ptr, ddesc_b);
    terms.diff += diff_term(*groups_b, cfg.delta_diff, cloud_scale, dmu_b_ptr);

    const std::size_t n_corr = correspondences->size();
    for (const auto& [ia, ib] : *correspondences) {
      if (ia < 0 || static_cast<std::size_t>(ia) >= groups_a.line_count() || ib < 0 ||
          static_cast<std::size_t>(ib) >= groups_b->line_count()) {
        throw std::invalid_argument("discriminative_losses: correspondence (" +
                                    std::to_string(ia) + ", " + std::to_string(ib) +
                                    ") out of range");
      }
    }

    // match: pull corresponding line means together.
    for (const auto& [ia, ib] : *correspondences) {
      const Scalar dist = kernels::l1_distance(groups_a.mu.row(ia).data(),
                                               groups_b->mu.row(ib).data(),
                                               static_cast<std::size_t>(d));
      const double t = static_cast<double>(dist) - cfg.delta_same;
      if (t <= 0.0) continue;
      terms.match += t * t;
      if (want_grad) {
        const Scalar coeff = static_cast<Scalar>(2.0 * t / static_cast<double>(n_corr));
        for (Eigen::Index c = 0; c < d; ++c) {
          const Scalar s = sign_of(groups_a.mu(ia, c) - groups_b->mu(ib, c));
          dmu_a(ia, c) += coeff * s;
          dmu_b(ib, c) -= coeff * s;
        }
      }
    }
    if (n_corr > 0) terms.match /= static_cast<double>(n_corr);

    // mismatch: push non-corresponding cross-cloud means apart, one term per
    // unordered pair of correspondence slots.
    if (n_corr >= 2) {
      const double n_pairs = 0.5 * static_cast<double>(n_corr) * static_cast<double>(n_corr - 1);
      for (std::size_t a = 0; a + 1 < n_corr; ++a) {
        for (std::size_t b = a + 1; b < n_corr; ++b) {
          const int ia = (*correspondences)[a].first;
          const int ib = (*correspondences)[b].second;
          const Scalar dist = kernels::l1_distance(groups_a.mu.row(ia).data(),
                                                   groups_b->mu.row(ib).data(),
                                                   static_cast<std::size_t>(d));
          const double t = 2.0 * cfg.delta_diff - static_cast<double>(dist);
          if (t <= 0.0) continue;
          terms.mismatch += t * t;
          if (want_grad) {
            const Scalar coeff = static_cast<Scalar>(2.0 * t / n_pairs);
            for (Eigen::Index c = 0; c < d; ++c) {
              const Scalar s = sign_of(groups_a.mu(ia, c) - groups_b->mu(ib, c));
              dmu_a(ia, c) -= coeff * s;
              dmu_b(ib, c) += coeff * s;
            }
          }
        }
      }
      terms.mismatch /= n_pairs;
    }
  }

  if (want_grad) {
    scatter_mu_grad(groups_a, dmu_a, *ddesc_a);
    if (has_pair) scatter_mu_grad(*groups_b, dmu_b, *ddesc_b);
  }
  return terms;
}

double total_loss(double seg, const DiscriminativeTerms& terms, const LossConfig& cfg) {
  cfg.validate();
  for (double v : {seg, terms.same, terms.diff, terms.match, terms.mismatch}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("total_loss: terms must be finite and non-negative, got " +
                                  std::to_string(v));
    }
  }
  return cfg.omega * seg + terms.same + terms.diff + terms.match + terms.mismatch;
}

template LineGroup<float> build_line_group(const MatrixR<float>&,
                                           const std::vector<std::vector<int>>&);
template LineGroup<double> build_line_group(const MatrixR<double>&,
                                            const std::vector<std::vector<int>>&);
template double seg_loss(const MatrixR<float>&, const std::vector<std::uint8_t>&, MatrixR<float>*);
template double seg_loss(const MatrixR<double>&, const std::vector<std::uint8_t>&,
                         MatrixR<double>*);
template DiscriminativeTerms discriminative_losses(const MatrixR<float>&, const LineGroup<float>&,
                                                   const MatrixR<float>*, const LineGroup<float>*,
                                                   const std::vector<std::pair<int, int>>*,
                                                   const LossConfig&, MatrixR<float>*,
                                                   MatrixR<float>*);
template DiscriminativeTerms discriminative_losses(const MatrixR<double>&,
                                                   const LineGroup<double>&, const MatrixR<double>*,
                                                   const LineGroup<double>*,
                                                   const std::vector<std::pair<int, int>>*,
                                                   const LossConfig&, MatrixR<double>*,
                                                   MatrixR<double>*);

}  // namespace linereg
