#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "diagplan/oracle.hpp"
#include "diagplan/planner.hpp"

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

const IdentityCheck& check_named(const IdentityReport& report, const std::string& name) {
  for (const IdentityCheck& check : report.checks) {
    if (check.name == name) return check;
  }
  FAIL("missing check " + name);
  static IdentityCheck dummy;
  return dummy;
}

}  // namespace

TEST_CASE("rng draws are deterministic and in range") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    REQUIRE(u == b.uniform01());
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const int k = a.uniform_int(7);
    REQUIRE(k == b.uniform_int(7));
    REQUIRE(k >= 0);
    REQUIRE(k < 7);
    REQUIRE(a.exponential() == b.exponential());
  }
  std::vector<int> left{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<int> right = left;
  a.shuffle(left);
  b.shuffle(right);
  REQUIRE(left == right);
}

TEST_CASE("generate_instance is deterministic per seed") {
  InstanceSpec spec;
  spec.n = 6;
  spec.t = 4;
  spec.lambda = 3;
  spec.prior = InstanceSpec::Prior::random_simplex;
  spec.seed = 11;

  const DiagnosisModel one = generate_instance(spec);
  const DiagnosisModel two = generate_instance(spec);
  REQUIRE(one.conditions.priors == two.conditions.priors);
  REQUIRE(one.matrix.values == two.matrix.values);
  REQUIRE(one.conditions.names == std::vector<std::string>{"e1", "e2", "e3", "e4", "e5", "e6"});
  REQUIRE(one.symptom_names == std::vector<std::string>{"d1", "d2", "d3", "d4"});

  spec.seed = 12;
  const DiagnosisModel other = generate_instance(spec);
  REQUIRE(one.matrix.values != other.matrix.values);
}

TEST_CASE("generated priors respect their shape") {
  InstanceSpec spec;
  spec.n = 7;
  spec.t = 2;
  spec.lambda = 2;
  spec.seed = 3;

  spec.prior = InstanceSpec::Prior::uniform;
  const DiagnosisModel uniform = generate_instance(spec);
  for (double p : uniform.conditions.priors) REQUIRE(p == 1.0 / 7);

  spec.prior = InstanceSpec::Prior::random_simplex;
  const DiagnosisModel simplex = generate_instance(spec);
  double sum = 0.0;
  for (double p : simplex.conditions.priors) {
    REQUIRE(p >= kPriorFloor);
    sum += p;
  }
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("generate_instance rejects malformed shapes") {
  InstanceSpec spec;
  spec.n = 0;
  spec.t = 1;
  REQUIRE(throws_code(ErrorCode::InvalidSpec, [&] { generate_instance(spec); }));
  spec.n = 1;
  spec.t = 0;
  REQUIRE(throws_code(ErrorCode::InvalidSpec, [&] { generate_instance(spec); }));
  spec.t = 1;
  spec.lambda = 1;
  REQUIRE(throws_code(ErrorCode::InvalidSpec, [&] { generate_instance(spec); }));
}

TEST_CASE("identity checks pass on the example model") {
  const IdentityReport report = check_identities(testutil::example_model(), 100, 1);
  REQUIRE(report.seed == 1);
  REQUIRE(report.trials == 100);
  REQUIRE(report.all_pass);

  const std::vector<std::string> names{
      "pairwise_vs_closed_form",   "single_condition_zero",     "block_pairwise_closed_form",
      "partition_additivity",      "singleton_partition_zero",  "info_dual_forms_first_step",
      "info_dual_forms_conditional", "info_equals_separated_pair_mass", "joint_info_decomposition",
      "sequential_additivity",     "block_count_bounds",        "refinement_monotonicity",
      "useless_symptom_zero_info"};
  REQUIRE(report.checks.size() == names.size());
  for (const std::string& name : names) {
    const IdentityCheck& check = check_named(report, name);
    REQUIRE(check.pass);
    REQUIRE(check.max_deviation <= check.tolerance);
  }
  REQUIRE(check_named(report, "pairwise_vs_closed_form").evaluations > 0);
  REQUIRE(check_named(report, "sequential_additivity").evaluations == 100);
  REQUIRE(check_named(report, "block_count_bounds").evaluations == 300);
}

TEST_CASE("identity checks exercise constant columns when present") {
  ModelData data = testutil::example_data();
  data.symptom_names.push_back("d4");
  for (auto& row : data.matrix) row.push_back(1);
  const IdentityReport report = check_identities(validate_model(data), 50, 9);
  REQUIRE(report.all_pass);
  REQUIRE(check_named(report, "useless_symptom_zero_info").evaluations > 0);
  REQUIRE(check_named(report, "useless_symptom_zero_info").max_deviation == 0.0);
}

TEST_CASE("identity checks pass across generated instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    InstanceSpec spec;
    spec.n = 1 + static_cast<int>((seed * 7) % 10);
    spec.t = 1 + static_cast<int>(seed % 6);
    spec.lambda = 2 + static_cast<int>(seed % 3);
    spec.prior = seed % 2 == 0 ? InstanceSpec::Prior::uniform : InstanceSpec::Prior::random_simplex;
    spec.seed = seed * 131;
    const IdentityReport report = check_identities(generate_instance(spec), 25, seed);
    CAPTURE(seed);
    REQUIRE(report.all_pass);
  }
}

TEST_CASE("a single-condition model is all zero entropy") {
  InstanceSpec spec;
  spec.n = 1;
  spec.t = 3;
  spec.lambda = 2;
  spec.prior = InstanceSpec::Prior::uniform;
  spec.seed = 2;
  const DiagnosisModel model = generate_instance(spec);
  const IdentityReport report = check_identities(model, 10, 4);
  REQUIRE(report.all_pass);
  REQUIRE(check_named(report, "single_condition_zero").max_deviation == 0.0);
  REQUIRE(hb_partition(trivial_partition(model)).value == 0.0);
}

TEST_CASE("check_identities rejects a nonpositive trial count") {
  REQUIRE(throws_code(ErrorCode::InvalidSpec, [] { check_identities(testutil::example_model(), 0, 1); }));
}

TEST_CASE("exhaustive search matches the hand-computed optimum") {
  const DiagnosisModel model = testutil::example_model();
  const OptimalPlan full = exhaustive_optimal_tree(model, 3);
  REQUIRE(full.expected_tests == Catch::Approx(2.08).margin(1e-12));
  REQUIRE(full.fully_resolves);

  const OptimalPlan capped = exhaustive_optimal_tree(model, 2);
  REQUIRE_FALSE(capped.fully_resolves);

  const OptimalPlan none = exhaustive_optimal_tree(model, 0);
  REQUIRE(none.expected_tests == 0.0);
  REQUIRE_FALSE(none.fully_resolves);
}

TEST_CASE("exhaustive search guards its limits") {
  InstanceSpec spec;
  spec.n = 9;
  spec.t = 2;
  spec.lambda = 2;
  spec.prior = InstanceSpec::Prior::uniform;
  spec.seed = 1;
  REQUIRE(throws_code(ErrorCode::InstanceTooLarge, [&] { exhaustive_optimal_tree(generate_instance(spec), 2); }));

  spec.n = 4;
  spec.t = 9;
  REQUIRE(throws_code(ErrorCode::InstanceTooLarge, [&] { exhaustive_optimal_tree(generate_instance(spec), 2); }));

  REQUIRE(throws_code(ErrorCode::InvalidSpec, [&] { exhaustive_optimal_tree(testutil::example_model(), -1); }));
}

TEST_CASE("greedy cost is never below the exhaustive optimum") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    InstanceSpec spec;
    spec.n = 2 + static_cast<int>(seed % 7);
    spec.t = 1 + static_cast<int>((seed * 3) % 8);
    spec.lambda = 2 + static_cast<int>(seed % 2);
    spec.prior = seed % 2 == 0 ? InstanceSpec::Prior::uniform : InstanceSpec::Prior::random_simplex;
    spec.seed = seed * 17;
    const DiagnosisModel model = generate_instance(spec);
    const double optimum = exhaustive_optimal_tree(model, model.symptom_count()).expected_tests;
    CAPTURE(seed);
    REQUIRE(build_tree(model, Criterion{}).report.expected_test_count >= optimum - 1e-9);
    REQUIRE(build_tree(model, Criterion{Criterion::Kind::shannon, 0}).report.expected_test_count >=
            optimum - 1e-9);
  }
}

TEST_CASE("minimal resolving subset on the example model") {
  REQUIRE(min_resolving_subset_size(testutil::example_model()) == 3);
}

TEST_CASE("minimal resolving subset edge cases") {
  ModelData twins;
  twins.condition_names = {"a", "b"};
  twins.priors = {0.5, 0.5};
  twins.symptom_names = {"s"};
  twins.lambda = 2;
  twins.matrix = {{0}, {0}};
  REQUIRE(min_resolving_subset_size(validate_model(twins)) == -1);

  ModelData lone;
  lone.condition_names = {"a"};
  lone.priors = {1.0};
  lone.symptom_names = {"s"};
  lone.lambda = 2;
  lone.matrix = {{0}};
  REQUIRE(min_resolving_subset_size(validate_model(lone)) == 0);

  InstanceSpec spec;
  spec.n = 3;
  spec.t = 17;
  spec.lambda = 2;
  spec.prior = InstanceSpec::Prior::uniform;
  spec.seed = 1;
  REQUIRE(throws_code(ErrorCode::InstanceTooLarge, [&] { min_resolving_subset_size(generate_instance(spec)); }));
}

TEST_CASE("resolvability flag agrees with the subset scan") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    InstanceSpec spec;
    spec.n = 2 + static_cast<int>(seed % 6);
    spec.t = 1 + static_cast<int>(seed % 5);
    spec.lambda = 2;
    spec.prior = InstanceSpec::Prior::uniform;
    spec.seed = seed * 29;
    const DiagnosisModel model = generate_instance(spec);
    const bool resolvable = exhaustive_optimal_tree(model, model.symptom_count()).fully_resolves;
    const int subset = min_resolving_subset_size(model);
    CAPTURE(seed);
    REQUIRE(resolvable == (subset >= 0));
  }
}
