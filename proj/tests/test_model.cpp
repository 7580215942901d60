#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "diagplan/model.hpp"
#include "diagplan/oracle.hpp"
#include "diagplan/partition.hpp"

#include "helpers.hpp"

using namespace diagplan;

namespace {

bool throws_code(ErrorCode expected, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DiagError& e) {
    return e.code() == expected;
  }
  return false;
}

std::vector<std::vector<int>> member_lists(const Partition& part) {
  std::vector<std::vector<int>> lists;
  for (const auto& block : part.blocks) lists.push_back(block.members);
  return lists;
}

}  // namespace

TEST_CASE("validate_model accepts the example and exposes its shape") {
  const DiagnosisModel model = testutil::example_model();
  REQUIRE(model.condition_count() == 5);
  REQUIRE(model.symptom_count() == 3);
  REQUIRE(model.lambda() == 2);
  REQUIRE(model.conditions.names[2] == "e3");
  REQUIRE(model.conditions.priors[2] == 0.84);
  REQUIRE(model.value_at(4, 0) == 1);
  REQUIRE(model.value_at(4, 2) == 0);
  REQUIRE(model.symptom_index("d3") == 2);
  REQUIRE(model.symptom_index("nope") == -1);
  REQUIRE(model.condition_index("e5") == 4);
  REQUIRE(model.condition_index("nope") == -1);
}

TEST_CASE("validate_model rejects structural defects") {
  SECTION("no conditions") {
    ModelData data = testutil::example_data();
    data.condition_names.clear();
    data.priors.clear();
    data.matrix.clear();
    REQUIRE(throws_code(ErrorCode::EmptyInput, [&] { validate_model(data); }));
  }
  SECTION("prior count mismatch") {
    ModelData data = testutil::example_data();
    data.priors.pop_back();
    REQUIRE(throws_code(ErrorCode::DimensionMismatch, [&] { validate_model(data); }));
  }
  SECTION("row count mismatch") {
    ModelData data = testutil::example_data();
    data.matrix.pop_back();
    REQUIRE(throws_code(ErrorCode::DimensionMismatch, [&] { validate_model(data); }));
  }
  SECTION("ragged row") {
    ModelData data = testutil::example_data();
    data.matrix[1].push_back(0);
    REQUIRE(throws_code(ErrorCode::DimensionMismatch, [&] { validate_model(data); }));
  }
  SECTION("duplicate condition name") {
    ModelData data = testutil::example_data();
    data.condition_names[3] = "e1";
    REQUIRE(throws_code(ErrorCode::DuplicateName, [&] { validate_model(data); }));
  }
  SECTION("duplicate symptom name") {
    ModelData data = testutil::example_data();
    data.symptom_names[2] = "d1";
    REQUIRE(throws_code(ErrorCode::DuplicateName, [&] { validate_model(data); }));
  }
  SECTION("alphabet too small") {
    ModelData data = testutil::example_data();
    data.lambda = 1;
    REQUIRE(throws_code(ErrorCode::MatrixValueOutOfAlphabet, [&] { validate_model(data); }));
  }
  SECTION("value outside alphabet") {
    ModelData data = testutil::example_data();
    data.matrix[0][0] = 2;
    REQUIRE(throws_code(ErrorCode::MatrixValueOutOfAlphabet, [&] { validate_model(data); }));
    data.matrix[0][0] = -1;
    REQUIRE(throws_code(ErrorCode::MatrixValueOutOfAlphabet, [&] { validate_model(data); }));
  }
  SECTION("nonpositive prior") {
    ModelData data = testutil::example_data();
    data.priors[0] = 0.0;
    REQUIRE(throws_code(ErrorCode::ZeroOrNegativeProbability, [&] { validate_model(data); }));
    data.priors[0] = -0.05;
    REQUIRE(throws_code(ErrorCode::ZeroOrNegativeProbability, [&] { validate_model(data); }));
  }
  SECTION("prior sum off") {
    ModelData data = testutil::example_data();
    data.priors[0] = 0.06;
    REQUIRE(throws_code(ErrorCode::ProbabilitySumOutOfTolerance, [&] { validate_model(data); }));
  }
}

TEST_CASE("validate_model renormalizes on request") {
  ModelData data = testutil::example_data();
  for (double& p : data.priors) p *= 3.0;
  const DiagnosisModel model = validate_model(data, true);
  double sum = 0.0;
  for (double p : model.conditions.priors) sum += p;
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(model.conditions.priors[2] == Catch::Approx(0.84).margin(1e-12));
}

TEST_CASE("trivial partition holds everything in one block") {
  const DiagnosisModel model = testutil::example_model();
  const Partition part = trivial_partition(model);
  REQUIRE(part.universe_size == 5);
  REQUIRE(part.block_count() == 1);
  REQUIRE(part.inducing_symptoms.empty());
  REQUIRE(part.blocks[0].members == std::vector<int>{0, 1, 2, 3, 4});
  REQUIRE(part.blocks[0].signature.empty());
  REQUIRE(part.blocks[0].prob == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("induce splits by one symptom, ascending value") {
  const DiagnosisModel model = testutil::example_model();
  const Partition part = induce_partition(model, 1);
  REQUIRE(part.block_count() == 2);
  REQUIRE(part.inducing_symptoms == std::vector<int>{1});
  REQUIRE(part.blocks[0].members == std::vector<int>{0, 1, 4});
  REQUIRE(part.blocks[0].signature == std::vector<int>{0});
  REQUIRE(part.blocks[0].prob == Catch::Approx(0.13).margin(1e-12));
  REQUIRE(part.blocks[1].members == std::vector<int>{2, 3});
  REQUIRE(part.blocks[1].signature == std::vector<int>{1});
  REQUIRE(part.blocks[1].prob == Catch::Approx(0.87).margin(1e-12));
}

TEST_CASE("refine keeps parent order, then value order, and drops empties") {
  const DiagnosisModel model = testutil::example_model();
  const Partition part = refine_partition(induce_partition(model, 1), model, 2);
  REQUIRE(part.inducing_symptoms == std::vector<int>{1, 2});
  REQUIRE(member_lists(part) ==
          std::vector<std::vector<int>>{{0, 4}, {1}, {2}, {3}});
  REQUIRE(part.blocks[0].signature == std::vector<int>{0, 0});
  REQUIRE(part.blocks[1].signature == std::vector<int>{0, 1});
  REQUIRE(part.blocks[2].signature == std::vector<int>{1, 0});
  REQUIRE(part.blocks[3].signature == std::vector<int>{1, 1});
}

TEST_CASE("refine rejects reuse and bad indices") {
  const DiagnosisModel model = testutil::example_model();
  const Partition part = induce_partition(model, 1);
  REQUIRE(throws_code(ErrorCode::SymptomAlreadyApplied, [&] { refine_partition(part, model, 1); }));
  REQUIRE(throws_code(ErrorCode::IndexOutOfRange, [&] { refine_partition(part, model, 3); }));
  REQUIRE(throws_code(ErrorCode::IndexOutOfRange, [&] { refine_partition(part, model, -1); }));
}

TEST_CASE("partition_by_symptoms folds a chain") {
  const DiagnosisModel model = testutil::example_model();
  const std::vector<int> all{0, 1, 2};
  const Partition part = partition_by_symptoms(model, all);
  REQUIRE(part.block_count() == 5);
  for (const auto& block : part.blocks) REQUIRE(block.size() == 1);
  const Partition none = partition_by_symptoms(model, std::vector<int>{});
  REQUIRE(none.block_count() == 1);
}

TEST_CASE("conditional probabilities renormalize within a block") {
  const DiagnosisModel model = testutil::example_model();
  Partition part;
  part.universe_size = 5;
  PartitionBlock left;
  left.members = {0, 1};
  left.prob = 0.1;
  PartitionBlock right;
  right.members = {2, 3, 4};
  right.prob = 0.9;
  part.blocks = {left, right};

  const auto probs = conditional_probs(model, part, 1);
  REQUIRE(probs.size() == 3);
  REQUIRE(probs[0] == Catch::Approx(0.933333333333333).margin(1e-12));
  REQUIRE(probs[1] == Catch::Approx(0.0333333333333333).margin(1e-12));
  REQUIRE(probs[2] == Catch::Approx(0.0333333333333333).margin(1e-12));
  REQUIRE(throws_code(ErrorCode::IndexOutOfRange, [&] { conditional_probs(model, part, 2); }));
  REQUIRE(throws_code(ErrorCode::IndexOutOfRange, [&] { conditional_probs(model, part, -1); }));
}

TEST_CASE("refinement test distinguishes chains from unrelated partitions") {
  const DiagnosisModel model = testutil::example_model();
  const Partition base = trivial_partition(model);
  const Partition by_d1 = induce_partition(model, 0);
  const Partition by_d2 = induce_partition(model, 1);
  const Partition deep = refine_partition(by_d2, model, 2);

  REQUIRE(is_refinement_of(by_d2, base));
  REQUIRE(is_refinement_of(deep, by_d2));
  REQUIRE(is_refinement_of(deep, base));
  REQUIRE(is_refinement_of(by_d2, by_d2));
  REQUIRE_FALSE(is_refinement_of(by_d1, by_d2));
  REQUIRE_FALSE(is_refinement_of(by_d2, by_d1));
  REQUIRE_FALSE(is_refinement_of(base, by_d2));
}

TEST_CASE("block family equality ignores order and history") {
  const DiagnosisModel model = testutil::example_model();
  const Partition by_d2 = induce_partition(model, 1);

  Partition reordered;
  reordered.universe_size = 5;
  reordered.blocks = {by_d2.blocks[1], by_d2.blocks[0]};
  REQUIRE(same_block_family(by_d2, reordered));
  REQUIRE_FALSE(same_block_family(by_d2, induce_partition(model, 2)));
  REQUIRE_FALSE(same_block_family(by_d2, trivial_partition(model)));
}

TEST_CASE("partition invariants hold on generated instances") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    InstanceSpec spec;
    spec.n = 1 + static_cast<int>(seed % 12);
    spec.t = 1 + static_cast<int>(seed % 5);
    spec.lambda = 2 + static_cast<int>(seed % 3);
    spec.prior = seed % 2 == 0 ? InstanceSpec::Prior::uniform : InstanceSpec::Prior::random_simplex;
    spec.seed = seed;
    const DiagnosisModel model = generate_instance(spec);

    Rng rng(seed * 977);
    std::vector<int> order(static_cast<std::size_t>(model.symptom_count()));
    for (int j = 0; j < model.symptom_count(); ++j) order[static_cast<std::size_t>(j)] = j;
    rng.shuffle(order);

    Partition part = trivial_partition(model);
    for (int symptom : order) {
      part = refine_partition(part, model, symptom);

      // Disjoint cover with sorted members.
      std::vector<int> seen;
      for (const auto& block : part.blocks) {
        REQUIRE(std::is_sorted(block.members.begin(), block.members.end()));
        REQUIRE(!block.members.empty());
        seen.insert(seen.end(), block.members.begin(), block.members.end());
        double mass = 0.0;
        for (int member : block.members) mass += model.conditions.priors[static_cast<std::size_t>(member)];
        REQUIRE(block.prob == Catch::Approx(mass).margin(1e-12));
        REQUIRE(block.signature.size() == part.inducing_symptoms.size());
        for (std::size_t k = 0; k < block.signature.size(); ++k) {
          for (int member : block.members) {
            REQUIRE(model.value_at(member, part.inducing_symptoms[k]) == block.signature[k]);
          }
        }
      }
      std::sort(seen.begin(), seen.end());
      std::vector<int> want(static_cast<std::size_t>(model.condition_count()));
      for (int i = 0; i < model.condition_count(); ++i) want[static_cast<std::size_t>(i)] = i;
      REQUIRE(seen == want);

      // Canonical order: signatures strictly increasing lexicographically.
      for (int b = 1; b < part.block_count(); ++b) {
        REQUIRE(part.blocks[static_cast<std::size_t>(b - 1)].signature <
                part.blocks[static_cast<std::size_t>(b)].signature);
      }
    }
  }
}
