#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diagplan/entropy.hpp"
#include "diagplan/error.hpp"
#include "diagplan/model.hpp"
#include "diagplan/oracle.hpp"
#include "diagplan/partition.hpp"

namespace diagplan {

// A split must beat this to be worth a test; at or below it the block is left
// as an ambiguous leaf.
inline constexpr double kPositiveInfoThreshold = 1e-12;

// Ledger residuals run by subtraction; cancellation at the very end may leave
// a few ulps below zero.
inline constexpr double kResidualClamp = 1e-9;

struct Criterion {
  enum class Kind { shannon, combinatorial };
  Kind kind = Kind::combinatorial;
  int shannon_base = 0;  // 0: use the model's alphabet size
};

inline int effective_base(const Criterion& criterion, const DiagnosisModel& model) {
  return criterion.shannon_base > 0 ? criterion.shannon_base : model.lambda();
}

struct TreeNode {
  int symptom = -1;  // test node when >= 0, leaf otherwise
  std::vector<std::pair<int, std::unique_ptr<TreeNode>>> branches;  // ascending value
  std::vector<int> block;          // leaf only: condition indices, ascending
  std::vector<double> posterior;   // leaf only: parallel to block
  bool resolved = false;

  bool is_leaf() const noexcept { return symptom < 0; }

  const TreeNode* child(int value) const noexcept {
    for (const auto& [v, node] : branches) {
      if (v == value) return node.get();
    }
    return nullptr;
  }
};

struct DiagnosisTree {
  std::unique_ptr<TreeNode> root;
  int condition_count = 0;
  int symptom_count = 0;
  int lambda = 0;
};

struct Selection {
  int symptom = -1;
  double information = 0.0;
};

struct PlanStep {
  int symptom = -1;
  double information = 0.0;
  double residual_after = 0.0;
};

struct PlanReport {
  Criterion criterion;
  double initial_entropy = 0.0;
  // Expansion ledger, depth-first, children in ascending value order. Each
  // information is the frontier-measure drop from expanding that node, so the
  // entries telescope from initial_entropy down to residual_entropy.
  std::vector<PlanStep> steps;
  // Root-to-leaf trace along maximal branch mass, measured on partitions of
  // the whole condition set.
  std::vector<PlanStep> principal_path;
  double total_information = 0.0;
  double residual_entropy = 0.0;   // in criterion units
  double residual_hb = 0.0;
  double residual_shannon = 0.0;
  double expected_test_count = 0.0;
  int worst_case_depth = 0;
  int leaf_count = 0;
  int resolved_leaf_count = 0;
};

namespace detail {

inline Partition single_block_partition(const DiagnosisModel& model, const PartitionBlock& block,
                                        const std::vector<int>& inducing) {
  Partition part;
  part.universe_size = model.condition_count();
  part.inducing_symptoms = inducing;
  part.blocks.push_back(block);
  return part;
}

inline double clamp_residual(double value) {
  if (value < 0.0 && value >= -kResidualClamp) return 0.0;
  return value + 0.0;
}

}  // namespace detail

inline double criterion_measure(const DiagnosisModel& model, const Partition& partition,
                                const Criterion& criterion) {
  if (criterion.kind == Criterion::Kind::combinatorial) return hb_partition(partition).value;
  return shannon_partition_entropy(model, partition, effective_base(criterion, model)).value;
}

inline MeasureValue criterion_information(const DiagnosisModel& model, const Partition& before,
                                          const Partition& after, const Criterion& criterion) {
  if (criterion.kind == Criterion::Kind::combinatorial) return jb_information(before, after);
  return shannon_information(model, before, after, effective_base(criterion, model));
}

// Best next test for one block of a partition. The score of a candidate is
// the drop in the partition measure restricted to this block, i.e. exactly
// what the block contributes to the frontier-wide drop. Ties go to the
// smallest symptom index; no candidate above the threshold means none.
inline std::optional<Selection> select_next(const DiagnosisModel& model, const Partition& partition,
                                            int block_index, const Criterion& criterion) {
  if (block_index < 0 || block_index >= partition.block_count()) {
    throw DiagError(ErrorCode::IndexOutOfRange, "block index " + std::to_string(block_index));
  }
  const PartitionBlock& block = partition.blocks[static_cast<std::size_t>(block_index)];
  const Partition local = detail::single_block_partition(model, block, partition.inducing_symptoms);
  Selection best;
  for (int s = 0; s < model.symptom_count(); ++s) {
    if (std::find(local.inducing_symptoms.begin(), local.inducing_symptoms.end(), s) !=
        local.inducing_symptoms.end()) {
      continue;
    }
    const Partition split = refine_partition(local, model, s);
    const double info = criterion_information(model, local, split, criterion).value;
    if (info > best.information) {
      best.symptom = s;
      best.information = info;
    }
  }
  if (best.symptom < 0 || best.information <= kPositiveInfoThreshold) return std::nullopt;
  return best;
}

namespace detail {

struct BuildState {
  const DiagnosisModel& model;
  const Criterion& criterion;
  PlanReport& report;
  std::vector<PartitionBlock> leaf_blocks;
  double running_residual = 0.0;
};

inline std::unique_ptr<TreeNode> expand(BuildState& state, const Partition& local, int depth) {
  const PartitionBlock& block = local.blocks.front();
  auto node = std::make_unique<TreeNode>();

  std::optional<Selection> choice;
  if (block.size() > 1) choice = select_next(state.model, local, 0, state.criterion);

  if (!choice) {
    node->block = block.members;
    node->posterior = conditional_probs(state.model, local, 0);
    node->resolved = block.size() == 1;
    state.leaf_blocks.push_back(block);
    state.report.expected_test_count += block.prob * depth;
    state.report.worst_case_depth = std::max(state.report.worst_case_depth, depth);
    ++state.report.leaf_count;
    if (node->resolved) ++state.report.resolved_leaf_count;
    return node;
  }

  node->symptom = choice->symptom;
  state.running_residual = clamp_residual(state.running_residual - choice->information);
  state.report.steps.push_back({choice->symptom, choice->information, state.running_residual});

  const Partition split = refine_partition(local, state.model, choice->symptom);
  for (const PartitionBlock& child : split.blocks) {
    Partition child_local = single_block_partition(state.model, child, split.inducing_symptoms);
    node->branches.emplace_back(child.signature.back(), expand(state, child_local, depth + 1));
  }
  return node;
}

}  // namespace detail

struct BuildResult {
  DiagnosisTree tree;
  PlanReport report;
};

inline std::vector<int> principal_path_symptoms(const DiagnosisModel& model, const DiagnosisTree& tree);

inline BuildResult build_tree(const DiagnosisModel& model, const Criterion& criterion) {
  BuildResult result;
  result.report.criterion = criterion;

  const Partition root_part = trivial_partition(model);
  result.report.initial_entropy = criterion_measure(model, root_part, criterion);

  detail::BuildState state{model, criterion, result.report, {}, result.report.initial_entropy};
  result.tree.root = detail::expand(state, root_part, 0);
  result.tree.condition_count = model.condition_count();
  result.tree.symptom_count = model.symptom_count();
  result.tree.lambda = model.lambda();

  Partition leaf_part;
  leaf_part.universe_size = model.condition_count();
  leaf_part.blocks = std::move(state.leaf_blocks);
  result.report.residual_hb = hb_partition(leaf_part).value;
  result.report.residual_shannon =
      shannon_partition_entropy(model, leaf_part, effective_base(criterion, model)).value;
  result.report.residual_entropy = criterion.kind == Criterion::Kind::combinatorial
                                       ? result.report.residual_hb
                                       : result.report.residual_shannon;
  result.report.total_information =
      detail::clamp_residual(result.report.initial_entropy - result.report.residual_entropy);

  // Principal-path entries live in whole-set semantics: refine the full
  // partition by the path symptoms in order and log each global drop.
  Partition current = trivial_partition(model);
  for (int symptom : principal_path_symptoms(model, result.tree)) {
    Partition next = refine_partition(current, model, symptom);
    const double info = criterion_information(model, current, next, criterion).value;
    result.report.principal_path.push_back({symptom, info, criterion_measure(model, next, criterion)});
    current = std::move(next);
  }
  return result;
}

// Path taken by always following the heaviest branch; ties go to the smallest
// value.
inline std::vector<int> principal_path_symptoms(const DiagnosisModel& model, const DiagnosisTree& tree) {
  std::vector<int> path;
  std::vector<int> block(static_cast<std::size_t>(model.condition_count()));
  for (int i = 0; i < model.condition_count(); ++i) block[static_cast<std::size_t>(i)] = i;

  const TreeNode* node = tree.root.get();
  while (node != nullptr && !node->is_leaf()) {
    path.push_back(node->symptom);
    const TreeNode* next = nullptr;
    std::vector<int> next_block;
    double best_mass = -1.0;
    for (const auto& [value, child] : node->branches) {
      std::vector<int> members;
      double mass = 0.0;
      for (int member : block) {
        if (model.value_at(member, node->symptom) == value) {
          members.push_back(member);
          mass += model.conditions.priors[static_cast<std::size_t>(member)];
        }
      }
      if (mass > best_mass) {
        best_mass = mass;
        next = child.get();
        next_block = std::move(members);
      }
    }
    node = next;
    block = std::move(next_block);
  }
  return path;
}

namespace detail {

inline void check_tree_block(const DiagnosisModel& model, const TreeNode* node, std::vector<int> block) {
  if (node == nullptr) {
    throw DiagError(ErrorCode::TreeModelMismatch, "tree has a missing node");
  }
  if (node->is_leaf()) {
    std::vector<int> stored = node->block;
    std::sort(stored.begin(), stored.end());
    if (stored != block) {
      throw DiagError(ErrorCode::TreeModelMismatch, "leaf block does not match the model's split");
    }
    return;
  }
  if (node->symptom >= model.symptom_count()) {
    throw DiagError(ErrorCode::TreeModelMismatch, "tree tests symptom index " + std::to_string(node->symptom) +
                                                      " beyond the model");
  }
  std::vector<char> covered(block.size(), 0);
  int prev_value = -1;
  for (const auto& [value, child] : node->branches) {
    if (value <= prev_value) {
      throw DiagError(ErrorCode::TreeModelMismatch, "branch values out of order");
    }
    prev_value = value;
    if (value < 0 || value >= model.lambda()) {
      throw DiagError(ErrorCode::TreeModelMismatch, "branch value " + std::to_string(value) +
                                                        " outside the alphabet");
    }
    std::vector<int> members;
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (model.value_at(block[i], node->symptom) == value) {
        members.push_back(block[i]);
        covered[i] = 1;
      }
    }
    if (members.empty()) {
      throw DiagError(ErrorCode::TreeModelMismatch, "branch value " + std::to_string(value) +
                                                        " is never observed in its block");
    }
    check_tree_block(model, child.get(), std::move(members));
  }
  for (char c : covered) {
    if (!c) {
      throw DiagError(ErrorCode::TreeModelMismatch, "a realized symptom value has no branch");
    }
  }
}

inline void collect_leaves(const DiagnosisModel& model, const TreeNode* node, int depth,
                           std::vector<PartitionBlock>& leaves, PlanReport& report) {
  if (node->is_leaf()) {
    PartitionBlock block;
    block.members = node->block;
    std::sort(block.members.begin(), block.members.end());
    for (int member : block.members) block.prob += model.conditions.priors[static_cast<std::size_t>(member)];
    report.expected_test_count += block.prob * depth;
    report.worst_case_depth = std::max(report.worst_case_depth, depth);
    ++report.leaf_count;
    if (node->resolved) ++report.resolved_leaf_count;
    leaves.push_back(std::move(block));
    return;
  }
  for (const auto& [value, child] : node->branches) collect_leaves(model, child.get(), depth + 1, leaves, report);
}

inline void replay_steps(const DiagnosisModel& model, const TreeNode* node, const Partition& local,
                         const Criterion& criterion, PlanReport& report, double& residual) {
  if (node->is_leaf()) return;
  const Partition split = refine_partition(local, model, node->symptom);
  const double info = criterion_information(model, local, split, criterion).value;
  residual = clamp_residual(residual - info);
  report.steps.push_back({node->symptom, info, residual});
  std::size_t child_index = 0;
  for (const PartitionBlock& child : split.blocks) {
    Partition child_local = single_block_partition(model, child, split.inducing_symptoms);
    replay_steps(model, node->branches[child_index].second.get(), child_local, criterion, report, residual);
    ++child_index;
  }
}

}  // namespace detail

// Recomputes every derived metric of a tree against a model. Structural
// disagreement (wrong dimensions, wrong blocks, missing or impossible
// branches) is TreeModelMismatch.
inline PlanReport evaluate_tree(const DiagnosisModel& model, const DiagnosisTree& tree,
                                const Criterion& criterion = {}) {
  if (tree.condition_count != model.condition_count() || tree.symptom_count != model.symptom_count() ||
      tree.lambda != model.lambda()) {
    throw DiagError(ErrorCode::TreeModelMismatch, "tree dimensions do not match the model");
  }
  std::vector<int> all(static_cast<std::size_t>(model.condition_count()));
  for (int i = 0; i < model.condition_count(); ++i) all[static_cast<std::size_t>(i)] = i;
  detail::check_tree_block(model, tree.root.get(), all);

  PlanReport report;
  report.criterion = criterion;
  const Partition root_part = trivial_partition(model);
  report.initial_entropy = criterion_measure(model, root_part, criterion);

  std::vector<PartitionBlock> leaves;
  detail::collect_leaves(model, tree.root.get(), 0, leaves, report);
  Partition leaf_part;
  leaf_part.universe_size = model.condition_count();
  leaf_part.blocks = std::move(leaves);
  report.residual_hb = hb_partition(leaf_part).value;
  report.residual_shannon = shannon_partition_entropy(model, leaf_part, effective_base(criterion, model)).value;
  report.residual_entropy =
      criterion.kind == Criterion::Kind::combinatorial ? report.residual_hb : report.residual_shannon;
  report.total_information = detail::clamp_residual(report.initial_entropy - report.residual_entropy);

  double residual = report.initial_entropy;
  detail::replay_steps(model, tree.root.get(), root_part, criterion, report, residual);

  Partition current = trivial_partition(model);
  for (int symptom : principal_path_symptoms(model, tree)) {
    Partition next = refine_partition(current, model, symptom);
    const double info = criterion_information(model, current, next, criterion).value;
    report.principal_path.push_back({symptom, info, criterion_measure(model, next, criterion)});
    current = std::move(next);
  }
  return report;
}

// One observation step. The cursor must be a test node; an alphabet value
// with no branch means the observations contradict every condition in the
// cursor's block.
inline const TreeNode* diagnose_step(const DiagnosisTree& tree, const TreeNode* cursor, int observed) {
  if (cursor == nullptr || cursor->is_leaf()) {
    throw std::invalid_argument("diagnose_step: cursor is not a test node");
  }
  if (observed < 0 || observed >= tree.lambda) {
    throw DiagError(ErrorCode::ValueOutOfAlphabet,
                    "observed value " + std::to_string(observed) + " outside 0.." + std::to_string(tree.lambda - 1));
  }
  const TreeNode* next = cursor->child(observed);
  if (next == nullptr) {
    throw DiagError(ErrorCode::ContradictoryObservation,
                    "no condition in the current block shows value " + std::to_string(observed));
  }
  return next;
}

struct CriteriaComparison {
  PlanReport combinatorial;
  PlanReport shannon;
  std::optional<double> optimal_expected_tests;
};

inline CriteriaComparison compare_criteria(const DiagnosisModel& model) {
  CriteriaComparison cmp;
  cmp.combinatorial = build_tree(model, Criterion{Criterion::Kind::combinatorial, 0}).report;
  cmp.shannon = build_tree(model, Criterion{Criterion::Kind::shannon, 0}).report;
  if (model.condition_count() <= 8 && model.symptom_count() <= 8) {
    cmp.optimal_expected_tests = exhaustive_optimal_tree(model, model.symptom_count()).expected_tests;
  }
  return cmp;
}

}  // namespace diagplan
