#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diagplan/error.hpp"
#include "diagplan/io.hpp"
#include "diagplan/model.hpp"
#include "diagplan/oracle.hpp"
#include "diagplan/partition.hpp"
#include "diagplan/planner.hpp"

namespace diagplan {

namespace detail {

inline bool has_suffix(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() && text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline DiagnosisModel load_model(const std::string& path, int lambda, bool renormalize, std::ostream& err) {
  const std::string text = read_file(path);
  ModelData data;
  if (has_suffix(path, ".csv")) {
    std::string warning;
    data = parse_model_csv(text, lambda, &warning);
    if (!warning.empty()) err << "warning: " << warning << "\n";
  } else {
    data = parse_model_json(text);
  }
  return validate_model(data, renormalize);
}

inline std::vector<int> parse_symptom_list(const std::string& csv, const DiagnosisModel& model) {
  std::vector<int> symptoms;
  if (csv.empty()) return symptoms;
  std::istringstream in(csv);
  std::string name;
  while (std::getline(in, name, ',')) {
    const int index = model.symptom_index(name);
    if (index < 0) {
      throw DiagError(ErrorCode::IndexOutOfRange, "unknown symptom '" + name + "'");
    }
    symptoms.push_back(index);
  }
  return symptoms;
}

inline int parse_observed_value(const std::string& token) {
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end == nullptr || *end != '\0') {
    throw DiagError(ErrorCode::ParseError, "observation '" + token + "' is not an integer");
  }
  return static_cast<int>(value);
}

inline Criterion make_criterion(const std::string& name, int base) {
  Criterion criterion;
  criterion.kind = name == "shannon" ? Criterion::Kind::shannon : Criterion::Kind::combinatorial;
  criterion.shannon_base = base;
  return criterion;
}

inline void print_plan_report(const PlanReport& report, const DiagnosisModel& model, std::ostream& out) {
  out << "criterion: " << (report.criterion.kind == Criterion::Kind::shannon ? "shannon" : "cb") << "\n";
  out << "initial entropy = " << format_number(report.initial_entropy) << "\n";
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    const PlanStep& step = report.steps[k];
    out << "step " << k + 1 << ": test " << model.symptom_names[static_cast<std::size_t>(step.symptom)]
        << "  information = " << format_number(step.information)
        << "  residual = " << format_number(step.residual_after) << "\n";
  }
  if (report.principal_path.empty()) {
    out << "principal path: (none)\n";
  } else {
    out << "principal path:";
    for (std::size_t k = 0; k < report.principal_path.size(); ++k) {
      out << (k == 0 ? " " : " -> ") << model.symptom_names[static_cast<std::size_t>(report.principal_path[k].symptom)];
    }
    out << "\n";
    for (std::size_t k = 0; k < report.principal_path.size(); ++k) {
      const PlanStep& step = report.principal_path[k];
      out << "principal step " << k + 1 << ": test "
          << model.symptom_names[static_cast<std::size_t>(step.symptom)]
          << "  information = " << format_number(step.information)
          << "  residual = " << format_number(step.residual_after) << "\n";
    }
  }
  out << "total information = " << format_number(report.total_information) << "\n";
  out << "residual entropy = " << format_number(report.residual_entropy) << "\n";
  out << "expected tests = " << format_number(report.expected_test_count) << "\n";
  out << "worst-case depth = " << report.worst_case_depth << "\n";
  out << "leaves: " << report.leaf_count << " (resolved " << report.resolved_leaf_count << ", ambiguous "
      << report.leaf_count - report.resolved_leaf_count << ")\n";
}

inline void print_leaf(const TreeNode* leaf, const DiagnosisModel& model, std::ostream& out) {
  out << "leaf: " << (leaf->resolved ? "resolved" : "ambiguous") << "\n";
  for (std::size_t k = 0; k < leaf->block.size(); ++k) {
    out << model.conditions.names[static_cast<std::size_t>(leaf->block[k])] << "  P = "
        << format_number(leaf->posterior[k]) << "\n";
  }
}

}  // namespace detail

// Exit codes: 0 success, 1 validation or domain error, 2 parse or IO error,
// 3 verification failure, 4 contradictory observation.
inline int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"diagnosis planning over multi-valued symptom tables"};
  app.name("diagplan");
  app.require_subcommand(1);

  std::string model_path;
  std::string tree_path;
  std::string after_csv;
  std::string measure = "both";
  std::string criterion_name = "cb";
  std::string symptom_name;
  std::string observe_csv;
  std::string out_path;
  std::string dot_path;
  std::string report_path;
  std::string prior_name = "uniform";
  bool renormalize = false;
  int lambda_flag = 0;
  int base = 0;
  int trials = 200;
  std::uint64_t seed = 1;
  int gen_n = 0;
  int gen_t = 0;
  int gen_lambda = 2;

  const auto add_model_arg = [&](CLI::App* sub) {
    sub->add_option("model", model_path, "model document (.json or .csv)")->required();
    sub->add_flag("--renormalize", renormalize, "rescale priors to sum to 1");
    sub->add_option("--lambda", lambda_flag, "alphabet size for csv input (default: infer)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a model document and report its shape");
  add_model_arg(validate);

  CLI::App* entropy = app.add_subcommand("entropy", "entropy of the prior, or residual after given tests");
  add_model_arg(entropy);
  entropy->add_option("--measure", measure, "shannon, cb, or both")->check(CLI::IsMember({"shannon", "cb", "both"}));
  entropy->add_option("--base", base, "logarithm base (default: alphabet size)");
  entropy->add_option("--after", after_csv, "comma-separated symptoms already tested");

  CLI::App* info = app.add_subcommand("info", "information carried by one symptom");
  add_model_arg(info);
  info->add_option("--symptom", symptom_name, "symptom to evaluate")->required();
  info->add_option("--measure", measure, "shannon, cb, or both")->check(CLI::IsMember({"shannon", "cb", "both"}));
  info->add_option("--base", base, "logarithm base (default: alphabet size)");
  info->add_option("--after", after_csv, "comma-separated symptoms already tested");

  CLI::App* plan = app.add_subcommand("plan", "build a greedy diagnosis tree");
  add_model_arg(plan);
  plan->add_option("--criterion", criterion_name, "cb or shannon")->check(CLI::IsMember({"cb", "shannon"}));
  plan->add_option("--base", base, "logarithm base for the shannon criterion");
  plan->add_option("--out", out_path, "write the tree as JSON");
  plan->add_option("--dot", dot_path, "write the tree as DOT");

  CLI::App* diagnose = app.add_subcommand("diagnose", "walk a diagnosis tree against observations");
  diagnose->add_option("tree", tree_path, "tree document")->required();
  add_model_arg(diagnose);
  diagnose->add_option("--observe", observe_csv, "comma-separated observed values (default: prompt)");

  CLI::App* verify = app.add_subcommand("verify", "re-derive the measure identities on randomized chains");
  add_model_arg(verify);
  verify->add_option("--trials", trials, "randomized trials")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "rng seed");
  verify->add_option("--report", report_path, "write the JSON report");

  CLI::App* compare = app.add_subcommand("compare", "greedy trees under both criteria, plus the exact optimum");
  add_model_arg(compare);
  compare->add_option("--base", base, "logarithm base for the shannon criterion");

  CLI::App* gen = app.add_subcommand("gen", "generate a random model document");
  gen->add_option("--n", gen_n, "conditions")->required();
  gen->add_option("--t", gen_t, "symptoms")->required();
  gen->add_option("--lambda", gen_lambda, "alphabet size");
  gen->add_option("--prior", prior_name, "uniform or random (simplex draw)")
      ->check(CLI::IsMember({"uniform", "random", "random-simplex"}));
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--out", out_path, "write the model document (default: stdout)");

  std::vector<std::string> storage;
  storage.push_back("diagplan");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(storage.size());
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      out << "model ok: n=" << model.condition_count() << " conditions, t=" << model.symptom_count()
          << " symptoms, lambda=" << model.lambda() << "\n";
      return 0;
    }

    if (*entropy) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const auto symptoms = detail::parse_symptom_list(after_csv, model);
      const Partition part = partition_by_symptoms(model, symptoms);
      const int use_base = base > 0 ? base : model.lambda();
      if (measure != "cb") {
        out << "H = " << format_number(shannon_partition_entropy(model, part, use_base).value) << "\n";
      }
      if (measure != "shannon") {
        out << "H_B = " << format_number(hb_partition(part).value) << "\n";
      }
      return 0;
    }

    if (*info) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const int symptom = model.symptom_index(symptom_name);
      if (symptom < 0) {
        throw DiagError(ErrorCode::IndexOutOfRange, "unknown symptom '" + symptom_name + "'");
      }
      const auto symptoms = detail::parse_symptom_list(after_csv, model);
      const Partition before = partition_by_symptoms(model, symptoms);
      const Partition after = refine_partition(before, model, symptom);
      const int use_base = base > 0 ? base : model.lambda();
      if (measure != "cb") {
        out << "J = " << format_number(shannon_information(model, before, after, use_base).value) << "\n";
      }
      if (measure != "shannon") {
        out << "J_B = " << format_number(jb_information(before, after).value) << "\n";
      }
      return 0;
    }

    if (*plan) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const BuildResult result = build_tree(model, detail::make_criterion(criterion_name, base));
      detail::print_plan_report(result.report, model, out);
      if (!out_path.empty()) write_file(out_path, serialize_tree(result.tree, model));
      if (!dot_path.empty()) write_file(dot_path, export_dot(result.tree, model));
      return 0;
    }

    if (*diagnose) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const DiagnosisTree tree = parse_tree(read_file(tree_path), model);
      evaluate_tree(model, tree);  // structural agreement with the model
      const TreeNode* cursor = tree.root.get();
      if (diagnose->count("--observe") > 0) {
        std::istringstream obs(observe_csv);
        std::string token;
        while (!cursor->is_leaf()) {
          if (!std::getline(obs, token, ',')) {
            throw DiagError(ErrorCode::ParseError, "ran out of observations at test " +
                                                       model.symptom_names[static_cast<std::size_t>(cursor->symptom)]);
          }
          cursor = diagnose_step(tree, cursor, detail::parse_observed_value(token));
        }
        if (std::getline(obs, token, ',')) {
          throw DiagError(ErrorCode::ParseError, "observations left over after reaching a leaf");
        }
      } else {
        while (!cursor->is_leaf()) {
          out << "test " << model.symptom_names[static_cast<std::size_t>(cursor->symptom)] << ": value? ";
          std::string line;
          if (!std::getline(in, line)) {
            out << "\n";
            throw DiagError(ErrorCode::ParseError, "unexpected end of observations");
          }
          cursor = diagnose_step(tree, cursor, detail::parse_observed_value(line));
        }
      }
      detail::print_leaf(cursor, model, out);
      return 0;
    }

    if (*verify) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const IdentityReport report = check_identities(model, trials, seed);
      std::map<std::string, const IdentityCheck*> ordered;
      for (const IdentityCheck& check : report.checks) ordered[check.name] = &check;
      char line[128];
      std::snprintf(line, sizeof line, "%-33s%12s%20s%12s%9s", "check", "evaluations", "max deviation",
                    "tolerance", "status");
      out << line << "\n";
      for (const auto& [name, check] : ordered) {
        std::snprintf(line, sizeof line, "%-33s%12ld%20s%12s%9s", name.c_str(), check->evaluations,
                      format_number(check->max_deviation).c_str(), format_number(check->tolerance).c_str(),
                      check->pass ? "PASS" : "FAIL");
        out << line << "\n";
      }
      out << "result: " << (report.all_pass ? "PASS" : "FAIL") << " (seed " << report.seed << ", trials "
          << report.trials << ")\n";
      if (!report_path.empty()) write_file(report_path, serialize_identity_report(report));
      return report.all_pass ? 0 : 3;
    }

    if (*compare) {
      const DiagnosisModel model = detail::load_model(model_path, lambda_flag, renormalize, err);
      const CriteriaComparison cmp = compare_criteria(model);
      out << "combinatorial: expected tests = " << format_number(cmp.combinatorial.expected_test_count)
          << "  worst-case depth = " << cmp.combinatorial.worst_case_depth
          << "  residual = " << format_number(cmp.combinatorial.residual_entropy) << "\n";
      out << "shannon: expected tests = " << format_number(cmp.shannon.expected_test_count)
          << "  worst-case depth = " << cmp.shannon.worst_case_depth
          << "  residual = " << format_number(cmp.shannon.residual_entropy) << "\n";
      if (cmp.optimal_expected_tests.has_value()) {
        out << "exhaustive optimum: expected tests = " << format_number(*cmp.optimal_expected_tests) << "\n";
      } else {
        out << "exhaustive optimum: skipped (instance too large)\n";
      }
      return 0;
    }

    if (*gen) {
      InstanceSpec spec;
      spec.n = gen_n;
      spec.t = gen_t;
      spec.lambda = gen_lambda;
      spec.prior = prior_name == "uniform" ? InstanceSpec::Prior::uniform : InstanceSpec::Prior::random_simplex;
      spec.seed = seed;
      const DiagnosisModel model = generate_instance(spec);
      const std::string doc = serialize_model(model);
      if (out_path.empty()) {
        out << doc;
      } else {
        write_file(out_path, doc);
      }
      return 0;
    }
  } catch (const DiagError& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::IoError:
        return 2;
      case ErrorCode::ContradictoryObservation:
        return 4;
      default:
        return 1;
    }
  }
  return 0;
}

}  // namespace diagplan
