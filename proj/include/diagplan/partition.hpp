#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "diagplan/error.hpp"
#include "diagplan/model.hpp"

namespace diagplan {

// One block of a partition of the condition set. members stays sorted
// ascending; signature holds this block's value for each inducing symptom, in
// application order.
struct PartitionBlock {
  std::vector<int> members;
  std::vector<int> signature;
  double prob = 0.0;

  int size() const noexcept { return static_cast<int>(members.size()); }
};

struct Partition {
  std::vector<PartitionBlock> blocks;
  std::vector<int> inducing_symptoms;
  int universe_size = 0;

  int block_count() const noexcept { return static_cast<int>(blocks.size()); }
};

inline Partition trivial_partition(const DiagnosisModel& model) {
  Partition part;
  part.universe_size = model.condition_count();
  PartitionBlock block;
  block.members.resize(part.universe_size);
  for (int i = 0; i < part.universe_size; ++i) {
    block.members[i] = i;
    block.prob += model.conditions.priors[i];
  }
  part.blocks.push_back(std::move(block));
  return part;
}

// Splits every block by the symptom's value column. Children replace their
// parent in place: parent order is kept, children ordered by ascending value,
// empty value classes vanish.
inline Partition refine_partition(const Partition& partition, const DiagnosisModel& model, int symptom) {
  if (symptom < 0 || symptom >= model.symptom_count()) {
    throw DiagError(ErrorCode::IndexOutOfRange, "symptom index " + std::to_string(symptom));
  }
  for (int used : partition.inducing_symptoms) {
    if (used == symptom) {
      throw DiagError(ErrorCode::SymptomAlreadyApplied,
                      "symptom '" + model.symptom_names[symptom] + "' already induced this partition");
    }
  }
  Partition result;
  result.universe_size = partition.universe_size;
  result.inducing_symptoms = partition.inducing_symptoms;
  result.inducing_symptoms.push_back(symptom);

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(model.lambda()));
  for (const PartitionBlock& block : partition.blocks) {
    for (auto& bucket : buckets) bucket.clear();
    for (int member : block.members) {
      buckets[static_cast<std::size_t>(model.value_at(member, symptom))].push_back(member);
    }
    for (int value = 0; value < model.lambda(); ++value) {
      if (buckets[static_cast<std::size_t>(value)].empty()) continue;
      PartitionBlock child;
      child.members = buckets[static_cast<std::size_t>(value)];
      child.signature = block.signature;
      child.signature.push_back(value);
      for (int member : child.members) child.prob += model.conditions.priors[member];
      result.blocks.push_back(std::move(child));
    }
  }
  return result;
}

inline Partition induce_partition(const DiagnosisModel& model, int symptom) {
  return refine_partition(trivial_partition(model), model, symptom);
}

inline Partition partition_by_symptoms(const DiagnosisModel& model, std::span<const int> symptoms) {
  Partition part = trivial_partition(model);
  for (int symptom : symptoms) {
    part = refine_partition(part, model, symptom);
  }
  return part;
}

// Posteriors within one block, parallel to its members.
inline std::vector<double> conditional_probs(const DiagnosisModel& model, const Partition& partition,
                                             int block_index) {
  if (block_index < 0 || block_index >= partition.block_count()) {
    throw DiagError(ErrorCode::IndexOutOfRange, "block index " + std::to_string(block_index));
  }
  const PartitionBlock& block = partition.blocks[static_cast<std::size_t>(block_index)];
  std::vector<double> probs;
  probs.reserve(block.members.size());
  for (int member : block.members) {
    probs.push_back(model.conditions.priors[member] / block.prob);
  }
  return probs;
}

inline bool is_refinement_of(const Partition& fine, const Partition& coarse) {
  if (fine.universe_size != coarse.universe_size) return false;
  std::vector<int> owner(static_cast<std::size_t>(coarse.universe_size), -1);
  for (int b = 0; b < coarse.block_count(); ++b) {
    for (int member : coarse.blocks[static_cast<std::size_t>(b)].members) {
      owner[static_cast<std::size_t>(member)] = b;
    }
  }
  for (const PartitionBlock& block : fine.blocks) {
    if (block.members.empty()) return false;
    const int home = owner[static_cast<std::size_t>(block.members.front())];
    if (home < 0) return false;
    for (int member : block.members) {
      if (owner[static_cast<std::size_t>(member)] != home) return false;
    }
  }
  return true;
}

// Equality as set systems, ignoring block order, signatures, and history.
inline bool same_block_family(const Partition& a, const Partition& b) {
  if (a.universe_size != b.universe_size || a.block_count() != b.block_count()) return false;
  std::vector<std::vector<int>> lhs, rhs;
  for (const auto& block : a.blocks) lhs.push_back(block.members);
  for (const auto& block : b.blocks) rhs.push_back(block.members);
  std::sort(lhs.begin(), lhs.end());
  std::sort(rhs.begin(), rhs.end());
  return lhs == rhs;
}

}  // namespace diagplan
