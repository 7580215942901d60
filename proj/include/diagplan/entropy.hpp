#pragma once

#include <cmath>
#include <span>
#include <string>

#include "diagplan/error.hpp"
#include "diagplan/model.hpp"
#include "diagplan/partition.hpp"

namespace diagplan {

// Information differences are mathematically nonnegative; float cancellation
// this close to zero is rounded away, anything further below stays visible.
inline constexpr double kNegativeClamp = 1e-12;

enum class MeasureKind { shannon, combinatorial };

struct MeasureValue {
  double value = 0.0;
  MeasureKind kind = MeasureKind::combinatorial;
};

namespace detail {

inline double scrub(double value) {
  if (value < 0.0 && value >= -kNegativeClamp) return 0.0;
  return value + 0.0;  // -0 -> +0
}

inline void require_base(int base) {
  if (base < 2) {
    throw DiagError(ErrorCode::InvalidSpec, "logarithm base " + std::to_string(base) + " (need >= 2)");
  }
}

}  // namespace detail

// Plain entropy of a distribution, log taken to the given base. Zero
// probabilities contribute zero.
inline MeasureValue shannon_entropy(std::span<const double> probs, int base) {
  detail::require_base(base);
  if (probs.empty()) {
    throw DiagError(ErrorCode::EmptyInput, "entropy of an empty distribution");
  }
  const double inv_log_base = 1.0 / std::log(static_cast<double>(base));
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw DiagError(ErrorCode::NegativeProbability, "probability " + std::to_string(p));
    }
    if (p > 0.0) sum -= p * std::log(p) * inv_log_base;
  }
  return {detail::scrub(sum), MeasureKind::shannon};
}

// Expected within-block entropy: sum of p_j * H(posteriors of block j).
inline MeasureValue shannon_partition_entropy(const DiagnosisModel& model, const Partition& partition, int base) {
  detail::require_base(base);
  if (partition.block_count() == 0) {
    throw DiagError(ErrorCode::EmptyInput, "partition has no blocks");
  }
  double sum = 0.0;
  for (int b = 0; b < partition.block_count(); ++b) {
    const auto posterior = conditional_probs(model, partition, b);
    sum += partition.blocks[static_cast<std::size_t>(b)].prob * shannon_entropy(posterior, base).value;
  }
  return {detail::scrub(sum), MeasureKind::shannon};
}

inline MeasureValue shannon_information(const DiagnosisModel& model, const Partition& before,
                                        const Partition& after, int base) {
  if (!is_refinement_of(after, before)) {
    throw DiagError(ErrorCode::NotARefinement, "information requires the finer partition second");
  }
  const double drop =
      shannon_partition_entropy(model, before, base).value - shannon_partition_entropy(model, after, base).value;
  return {detail::scrub(drop), MeasureKind::shannon};
}

// Definition form: every unordered pair contributes the sum of its two
// weights. Quadratic on purpose; hb_closed is the fast route and the two must
// agree to 1e-12.
inline MeasureValue hb_pairwise(std::span<const double> weights) {
  if (weights.empty()) {
    throw DiagError(ErrorCode::EmptyInput, "pairwise measure of an empty weight vector");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DiagError(ErrorCode::NonpositiveWeight, "weight " + std::to_string(w));
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = i + 1; j < weights.size(); ++j) {
      sum += weights[i] + weights[j];
    }
  }
  return {detail::scrub(sum), MeasureKind::combinatorial};
}

// Each element appears in exactly size-1 pairs, so the pair sum collapses to
// (size-1) * total weight.
inline MeasureValue hb_closed(std::span<const double> weights) {
  if (weights.empty()) {
    throw DiagError(ErrorCode::EmptyInput, "closed-form measure of an empty weight vector");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DiagError(ErrorCode::NonpositiveWeight, "weight " + std::to_string(w));
    }
    total += w;
  }
  return {detail::scrub(static_cast<double>(weights.size() - 1) * total), MeasureKind::combinatorial};
}

inline MeasureValue hb_block(double prob, int size) {
  if (size < 1 || !(prob > 0.0) || !std::isfinite(prob)) {
    throw DiagError(ErrorCode::InvalidBlock,
                    "block with probability " + std::to_string(prob) + " and size " + std::to_string(size));
  }
  return {detail::scrub(prob * static_cast<double>(size - 1)), MeasureKind::combinatorial};
}

inline MeasureValue hb_partition(const Partition& partition) {
  if (partition.block_count() == 0) {
    throw DiagError(ErrorCode::EmptyInput, "partition has no blocks");
  }
  double sum = 0.0;
  for (const PartitionBlock& block : partition.blocks) {
    sum += hb_block(block.prob, block.size()).value;
  }
  return {detail::scrub(sum), MeasureKind::combinatorial};
}

inline MeasureValue jb_information(const Partition& before, const Partition& after) {
  if (!is_refinement_of(after, before)) {
    throw DiagError(ErrorCode::NotARefinement, "information requires the finer partition second");
  }
  const double drop = hb_partition(before).value - hb_partition(after).value;
  return {detail::scrub(drop), MeasureKind::combinatorial};
}

// Independent route for jb_information: a refinement earns the weight sum of
// every pair it newly separates.
inline MeasureValue jb_pairwise_oracle(const DiagnosisModel& model, const Partition& before,
                                       const Partition& after) {
  if (!is_refinement_of(after, before)) {
    throw DiagError(ErrorCode::NotARefinement, "information requires the finer partition second");
  }
  const int n = before.universe_size;
  std::vector<int> coarse_owner(static_cast<std::size_t>(n), -1);
  std::vector<int> fine_owner(static_cast<std::size_t>(n), -1);
  for (int b = 0; b < before.block_count(); ++b) {
    for (int member : before.blocks[static_cast<std::size_t>(b)].members) {
      coarse_owner[static_cast<std::size_t>(member)] = b;
    }
  }
  for (int b = 0; b < after.block_count(); ++b) {
    for (int member : after.blocks[static_cast<std::size_t>(b)].members) {
      fine_owner[static_cast<std::size_t>(member)] = b;
    }
  }
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool together_before = coarse_owner[static_cast<std::size_t>(a)] == coarse_owner[static_cast<std::size_t>(b)];
      const bool together_after = fine_owner[static_cast<std::size_t>(a)] == fine_owner[static_cast<std::size_t>(b)];
      if (together_before && !together_after) {
        sum += model.conditions.priors[static_cast<std::size_t>(a)] + model.conditions.priors[static_cast<std::size_t>(b)];
      }
    }
  }
  return {detail::scrub(sum), MeasureKind::combinatorial};
}

}  // namespace diagplan
