#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "diagplan/entropy.hpp"
#include "diagplan/error.hpp"
#include "diagplan/model.hpp"
#include "diagplan/partition.hpp"

namespace diagplan {

// Verification tolerances: closed-form identities compared exactly up to a
// few ulps, accumulated sums get more slack.
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kAccumulatedTolerance = 1e-9;

// mt19937_64 with hand-rolled draws so streams are identical on every
// platform; the standard pins the engine but not the distributions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // [0, bound). Modulo bias is far below anything these sizes can expose and
  // determinism matters more here.
  int uniform_int(int bound) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(bound)); }

  double exponential() { return -std::log1p(-uniform01()); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
      std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

private:
  std::mt19937_64 engine_;
};

struct InstanceSpec {
  enum class Prior { uniform, random_simplex };
  int n = 0;
  int t = 0;
  int lambda = 2;
  Prior prior = Prior::uniform;
  std::uint64_t seed = 0;
};

inline constexpr double kPriorFloor = 1e-6;

// Deterministic instance generator. Draw order: priors first (ascending
// condition index), then matrix values row-major.
inline DiagnosisModel generate_instance(const InstanceSpec& spec) {
  if (spec.n < 1 || spec.t < 1 || spec.lambda < 2) {
    throw DiagError(ErrorCode::InvalidSpec,
                    "need n >= 1, t >= 1, lambda >= 2; got n=" + std::to_string(spec.n) +
                        " t=" + std::to_string(spec.t) + " lambda=" + std::to_string(spec.lambda));
  }
  Rng rng(spec.seed);
  ModelData data;
  data.lambda = spec.lambda;
  for (int i = 0; i < spec.n; ++i) data.condition_names.push_back("e" + std::to_string(i + 1));
  for (int j = 0; j < spec.t; ++j) data.symptom_names.push_back("d" + std::to_string(j + 1));

  if (spec.prior == InstanceSpec::Prior::uniform) {
    data.priors.assign(static_cast<std::size_t>(spec.n), 1.0 / spec.n);
  } else {
    // Normalized exponentials give a uniform point on the simplex; redraw the
    // whole vector while any component sits under the floor.
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100000) {
        throw DiagError(ErrorCode::InvalidSpec, "cannot keep " + std::to_string(spec.n) +
                                                    " priors above the floor of " + std::to_string(kPriorFloor));
      }
      std::vector<double> draws(static_cast<std::size_t>(spec.n));
      double sum = 0.0;
      for (double& d : draws) {
        d = rng.exponential();
        sum += d;
      }
      bool ok = sum > 0.0;
      for (double& d : draws) {
        d /= sum;
        if (d < kPriorFloor) ok = false;
      }
      if (ok) {
        data.priors = std::move(draws);
        break;
      }
    }
  }

  data.matrix.resize(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    data.matrix[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(spec.t));
    for (int j = 0; j < spec.t; ++j) {
      data.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.uniform_int(spec.lambda);
    }
  }
  // Uniform priors are kept exactly 1/n; renormalizing would smear ulps over
  // them for nothing.
  return validate_model(data, spec.prior == InstanceSpec::Prior::random_simplex);
}

struct IdentityCheck {
  std::string name;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  long evaluations = 0;
  bool pass = true;
};

struct IdentityReport {
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<IdentityCheck> checks;
  bool all_pass = true;
};

namespace detail {

class CheckTable {
public:
  void declare(const std::string& name, double tolerance) {
    auto [it, inserted] = index_.try_emplace(name, checks_.size());
    if (inserted) checks_.push_back({name, 0.0, tolerance, 0, true});
    (void)it;
  }

  void note(const std::string& name, double tolerance, double deviation) {
    auto [it, inserted] = index_.try_emplace(name, checks_.size());
    if (inserted) checks_.push_back({name, 0.0, tolerance, 0, true});
    IdentityCheck& check = checks_[it->second];
    check.max_deviation = std::max(check.max_deviation, std::abs(deviation));
    ++check.evaluations;
  }

  std::vector<IdentityCheck> finish() {
    for (IdentityCheck& check : checks_) check.pass = check.max_deviation <= check.tolerance;
    return checks_;
  }

private:
  std::map<std::string, std::size_t> index_;
  std::vector<IdentityCheck> checks_;
};

inline double local_pair_sum(const std::vector<double>& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = i + 1; j < weights.size(); ++j) sum += weights[i] + weights[j];
  }
  return sum;
}

inline double local_closed(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  return static_cast<double>(weights.size() - 1) * total;
}

}  // namespace detail

// Re-derives the measure identities on randomized symptom chains and weight
// subsets drawn from the model. Every comparison pits library code against a
// local re-computation or two algebraically equal routes against each other.
inline IdentityReport check_identities(const DiagnosisModel& input_model, int trials, std::uint64_t seed) {
  if (trials < 1) {
    throw DiagError(ErrorCode::InvalidSpec, "trials must be >= 1");
  }
  // The dual information forms assume priors summing to exactly 1; validation
  // only guarantees 1e-9, so re-normalize to float precision first.
  DiagnosisModel model = input_model;
  {
    double sum = 0.0;
    for (double p : model.conditions.priors) sum += p;
    for (double& p : model.conditions.priors) p /= sum;
  }
  const int n = model.condition_count();
  const int t = model.symptom_count();

  IdentityReport report;
  report.seed = seed;
  report.trials = trials;
  Rng rng(seed);
  detail::CheckTable table;

  // Fixed report schema: every identity appears even when the model never
  // exercises it.
  table.declare("pairwise_vs_closed_form", kIdentityTolerance);
  table.declare("single_condition_zero", 0.0);
  table.declare("block_pairwise_closed_form", kIdentityTolerance);
  table.declare("partition_additivity", kIdentityTolerance);
  table.declare("singleton_partition_zero", 0.0);
  table.declare("info_dual_forms_first_step", kIdentityTolerance);
  table.declare("info_dual_forms_conditional", kIdentityTolerance);
  table.declare("info_equals_separated_pair_mass", kIdentityTolerance);
  table.declare("joint_info_decomposition", kAccumulatedTolerance);
  table.declare("sequential_additivity", kAccumulatedTolerance);
  table.declare("block_count_bounds", 0.0);
  table.declare("refinement_monotonicity", kIdentityTolerance);
  table.declare("useless_symptom_zero_info", kIdentityTolerance);

  // Exact-zero facts need no sampling; log them once per run.
  for (int i = 0; i < n; ++i) {
    const std::vector<double> one{model.conditions.priors[static_cast<std::size_t>(i)]};
    table.note("single_condition_zero", 0.0, hb_pairwise(one).value);
    table.note("single_condition_zero", 0.0, hb_closed(one).value);
  }
  {
    Partition singletons;
    singletons.universe_size = n;
    for (int i = 0; i < n; ++i) {
      PartitionBlock block;
      block.members = {i};
      block.prob = model.conditions.priors[static_cast<std::size_t>(i)];
      singletons.blocks.push_back(std::move(block));
    }
    table.note("singleton_partition_zero", 0.0, hb_partition(singletons).value);
    table.note("singleton_partition_zero", 0.0,
               shannon_partition_entropy(model, singletons, model.lambda()).value);
  }

  std::vector<int> indices(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
  std::vector<int> symptoms(static_cast<std::size_t>(t));
  for (int j = 0; j < t; ++j) symptoms[static_cast<std::size_t>(j)] = j;

  for (int trial = 0; trial < trials; ++trial) {
    // Pairwise vs closed form on a random weight sub-vector; the identity
    // holds for arbitrary positive weights, so no normalization.
    rng.shuffle(indices);
    const int subset = 1 + rng.uniform_int(n);
    std::vector<double> weights;
    for (int k = 0; k < subset; ++k) {
      weights.push_back(model.conditions.priors[static_cast<std::size_t>(indices[static_cast<std::size_t>(k)])]);
    }
    table.note("pairwise_vs_closed_form", kIdentityTolerance,
               hb_pairwise(weights).value - detail::local_closed(weights));
    table.note("pairwise_vs_closed_form", kIdentityTolerance,
               hb_closed(weights).value - detail::local_pair_sum(weights));

    if (t == 0) continue;
    rng.shuffle(symptoms);

    std::vector<Partition> chain;
    chain.push_back(trivial_partition(model));
    for (int k = 0; k < t; ++k) {
      chain.push_back(refine_partition(chain.back(), model, symptoms[static_cast<std::size_t>(k)]));
    }

    std::vector<double> step_infos;
    long long count_bound = 1;
    for (int k = 1; k <= t; ++k) {
      const Partition& prev = chain[static_cast<std::size_t>(k - 1)];
      const Partition& cur = chain[static_cast<std::size_t>(k)];

      count_bound = std::min<long long>(n, count_bound * model.lambda());
      table.note("block_count_bounds", 0.0,
                 std::max(0.0, static_cast<double>(cur.block_count() - count_bound)));

      table.note("refinement_monotonicity", kIdentityTolerance,
                 std::max(0.0, hb_partition(cur).value - hb_partition(prev).value));
      table.note("refinement_monotonicity", kIdentityTolerance,
                 std::max(0.0, shannon_partition_entropy(model, cur, model.lambda()).value -
                                   shannon_partition_entropy(model, prev, model.lambda()).value));

      double hand_blocks = 0.0;
      for (const PartitionBlock& block : cur.blocks) {
        std::vector<double> member_weights;
        for (int member : block.members) {
          member_weights.push_back(model.conditions.priors[static_cast<std::size_t>(member)]);
        }
        table.note("block_pairwise_closed_form", kIdentityTolerance,
                   detail::local_pair_sum(member_weights) - hb_block(block.prob, block.size()).value);
        hand_blocks += detail::local_pair_sum(member_weights);
      }
      table.note("partition_additivity", kIdentityTolerance, hand_blocks - hb_partition(cur).value);

      const double jb_step = jb_information(prev, cur).value;
      step_infos.push_back(jb_step);
      table.note("info_equals_separated_pair_mass", kIdentityTolerance,
                 jb_step - jb_pairwise_oracle(model, prev, cur).value);

      // Dual conditional forms, blocks re-bucketed by hand.
      const int symptom = symptoms[static_cast<std::size_t>(k - 1)];
      double form_sizes = 0.0;
      double form_probs = 0.0;
      for (const PartitionBlock& parent : prev.blocks) {
        std::map<int, std::pair<int, double>> children;
        for (int member : parent.members) {
          auto& [size, prob] = children[model.value_at(member, symptom)];
          ++size;
          prob += model.conditions.priors[static_cast<std::size_t>(member)];
        }
        for (const auto& [value, child] : children) {
          form_sizes += child.first * (parent.prob - child.second);
          form_probs += child.second * (parent.size() - child.first);
        }
      }
      table.note("info_dual_forms_conditional", kIdentityTolerance, form_sizes - form_probs);
      table.note("info_dual_forms_conditional", kIdentityTolerance, form_sizes - jb_step);

      if (k == 1) {
        double first_sizes = 0.0;
        double first_probs = 0.0;
        for (const PartitionBlock& block : cur.blocks) {
          first_sizes += block.size() * (1.0 - block.prob);
          first_probs += block.prob * static_cast<double>(n - block.size());
        }
        table.note("info_dual_forms_first_step", kIdentityTolerance, first_sizes - first_probs);
        table.note("info_dual_forms_first_step", kIdentityTolerance, first_sizes - jb_step);
      }

      // A symptom constant inside every current block carries no information.
      for (int s = 0; s < t; ++s) {
        bool constant = true;
        for (const PartitionBlock& block : cur.blocks) {
          for (int member : block.members) {
            if (model.value_at(member, s) != model.value_at(block.members.front(), s)) {
              constant = false;
              break;
            }
          }
          if (!constant) break;
        }
        if (!constant) continue;
        bool applied = false;
        for (int used : cur.inducing_symptoms) applied = applied || used == s;
        if (applied) continue;
        const Partition same = refine_partition(cur, model, s);
        table.note("useless_symptom_zero_info", kIdentityTolerance, jb_information(cur, same).value);
      }
    }

    const double total = jb_information(chain.front(), chain.back()).value;
    double accumulated = 0.0;
    for (double info : step_infos) accumulated += info;
    table.note("sequential_additivity", kAccumulatedTolerance, accumulated - total);

    for (int split = 1; split < t; ++split) {
      const double head = jb_information(chain.front(), chain[static_cast<std::size_t>(split)]).value;
      const double tail = jb_information(chain[static_cast<std::size_t>(split)], chain.back()).value;
      table.note("joint_info_decomposition", kAccumulatedTolerance, head + tail - total);
    }
  }

  report.checks = table.finish();
  for (const IdentityCheck& check : report.checks) report.all_pass = report.all_pass && check.pass;
  return report;
}

struct OptimalPlan {
  double expected_tests = 0.0;
  bool fully_resolves = false;
};

namespace detail {

struct ExhaustiveSearch {
  const DiagnosisModel& model;
  std::unordered_map<std::uint32_t, double> cost_memo;
  std::unordered_map<std::uint32_t, bool> resolve_memo;

  static std::uint32_t key(std::uint32_t mask, int depth) { return (mask << 4) | static_cast<std::uint32_t>(depth); }

  double block_prob(std::uint32_t mask) const {
    double p = 0.0;
    for (int i = 0; i < model.condition_count(); ++i) {
      if (mask & (1u << i)) p += model.conditions.priors[static_cast<std::size_t>(i)];
    }
    return p;
  }

  // Children of mask under symptom s, ascending value, empty classes dropped.
  std::vector<std::uint32_t> split(std::uint32_t mask, int s) const {
    std::vector<std::uint32_t> parts(static_cast<std::size_t>(model.lambda()), 0);
    for (int i = 0; i < model.condition_count(); ++i) {
      if (mask & (1u << i)) parts[static_cast<std::size_t>(model.value_at(i, s))] |= 1u << i;
    }
    std::vector<std::uint32_t> children;
    for (std::uint32_t part : parts) {
      if (part != 0) children.push_back(part);
    }
    return children;
  }

  // Minimal expected further tests over complete trees: test as long as
  // something splits and depth remains, otherwise stop.
  double cost(std::uint32_t mask, int depth) {
    if (std::popcount(mask) <= 1 || depth == 0) return 0.0;
    const auto it = cost_memo.find(key(mask, depth));
    if (it != cost_memo.end()) return it->second;
    const double p = block_prob(mask);
    double best = 0.0;
    bool splittable = false;
    for (int s = 0; s < model.symptom_count(); ++s) {
      const auto children = split(mask, s);
      if (children.size() < 2) continue;
      double candidate = 1.0;
      for (std::uint32_t child : children) {
        candidate += block_prob(child) / p * cost(child, depth - 1);
      }
      if (!splittable || candidate < best) best = candidate;
      splittable = true;
    }
    cost_memo.emplace(key(mask, depth), best);
    return best;
  }

  bool resolvable(std::uint32_t mask, int depth) {
    if (std::popcount(mask) <= 1) return true;
    if (depth == 0) return false;
    const auto it = resolve_memo.find(key(mask, depth));
    if (it != resolve_memo.end()) return it->second;
    bool ok = false;
    for (int s = 0; s < model.symptom_count() && !ok; ++s) {
      const auto children = split(mask, s);
      if (children.size() < 2) continue;
      bool all = true;
      for (std::uint32_t child : children) all = all && resolvable(child, depth - 1);
      ok = all;
    }
    resolve_memo.emplace(key(mask, depth), ok);
    return ok;
  }
};

}  // namespace detail

// Exact optimum over all adaptive test trees, depth capped. Feasible only for
// tiny instances; the memo key is the block bitmask plus remaining depth (the
// used-symptom set is redundant: spent symptoms are constant on the block and
// stay non-splitting on every subset).
inline OptimalPlan exhaustive_optimal_tree(const DiagnosisModel& model, int depth_cap) {
  if (model.condition_count() > 8 || model.symptom_count() > 8) {
    throw DiagError(ErrorCode::InstanceTooLarge, "exhaustive search is capped at 8 conditions and 8 symptoms");
  }
  if (depth_cap < 0) {
    throw DiagError(ErrorCode::InvalidSpec, "depth cap must be >= 0");
  }
  const int depth = std::min(depth_cap, model.symptom_count());
  detail::ExhaustiveSearch search{model, {}, {}};
  const std::uint32_t full = (1u << model.condition_count()) - 1u;
  OptimalPlan plan;
  plan.expected_tests = search.cost(full, depth);
  plan.fully_resolves = search.resolvable(full, depth);
  return plan;
}

// Smallest number of symptoms whose joint value signature tells every
// condition apart; -1 if even the full set cannot. Grouping is done by raw
// signature comparison, independent of the partition machinery.
inline int min_resolving_subset_size(const DiagnosisModel& model) {
  const int t = model.symptom_count();
  const int n = model.condition_count();
  if (t > 16) {
    throw DiagError(ErrorCode::InstanceTooLarge, "subset scan is capped at 16 symptoms");
  }
  for (int size = 0; size <= t; ++size) {
    for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
      if (std::popcount(mask) != size) continue;
      std::set<std::vector<int>> signatures;
      for (int i = 0; i < n; ++i) {
        std::vector<int> sig;
        for (int j = 0; j < t; ++j) {
          if (mask & (1u << j)) sig.push_back(model.value_at(i, j));
        }
        signatures.insert(std::move(sig));
      }
      if (static_cast<int>(signatures.size()) == n) return size;
    }
  }
  return -1;
}

}  // namespace diagplan
