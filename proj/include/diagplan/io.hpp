#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagplan/error.hpp"
#include "diagplan/model.hpp"
#include "diagplan/oracle.hpp"
#include "diagplan/planner.hpp"

namespace diagplan {

// All numeric output funnels through here: 12 significant digits, no
// negative zero.
inline std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

inline double round_to_12sig(double value) {
  return std::strtod(format_number(value).c_str(), nullptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DiagError(ErrorCode::IoError, "cannot read '" + path + "'");
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DiagError(ErrorCode::IoError, "cannot write '" + path + "'");
  }
  out << content;
  if (!out) {
    throw DiagError(ErrorCode::IoError, "short write to '" + path + "'");
  }
}

inline ModelData parse_model_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DiagError(ErrorCode::ParseError, e.what());
  }
  ModelData data;
  try {
    data.lambda = doc.at("lambda").get<int>();
    for (const auto& condition : doc.at("conditions")) {
      data.condition_names.push_back(condition.at("name").get<std::string>());
      data.priors.push_back(condition.at("p").get<double>());
    }
    for (const auto& symptom : doc.at("symptoms")) {
      data.symptom_names.push_back(symptom.get<std::string>());
    }
    for (const auto& row : doc.at("matrix")) {
      data.matrix.push_back(row.get<std::vector<int>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DiagError(ErrorCode::ParseError, e.what());
  }
  return data;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    std::size_t first = cell.find_first_not_of(" \t\r");
    std::size_t last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

// name,p,<symptom...> with one condition per row. No quoting. lambda == 0
// infers 1 + max(matrix) and explains itself through *warning.
inline ModelData parse_model_csv(const std::string& text, int lambda, std::string* warning) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  if (rows.empty()) {
    throw DiagError(ErrorCode::ParseError, "csv has no rows");
  }
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "name" || header[1] != "p") {
    throw DiagError(ErrorCode::ParseError, "csv header must start with 'name,p'");
  }
  ModelData data;
  for (std::size_t j = 2; j < header.size(); ++j) data.symptom_names.push_back(header[j]);
  int max_value = -1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw DiagError(ErrorCode::ParseError, "csv row " + std::to_string(r + 1) + " has " +
                                                 std::to_string(row.size()) + " cells, expected " +
                                                 std::to_string(header.size()));
    }
    data.condition_names.push_back(row[0]);
    char* end = nullptr;
    const double p = std::strtod(row[1].c_str(), &end);
    if (row[1].empty() || end == nullptr || *end != '\0') {
      throw DiagError(ErrorCode::ParseError, "csv row " + std::to_string(r + 1) + ": bad probability '" + row[1] + "'");
    }
    data.priors.push_back(p);
    std::vector<int> values;
    for (std::size_t c = 2; c < row.size(); ++c) {
      const long v = std::strtol(row[c].c_str(), &end, 10);
      if (row[c].empty() || end == nullptr || *end != '\0') {
        throw DiagError(ErrorCode::ParseError, "csv row " + std::to_string(r + 1) + ": bad value '" + row[c] + "'");
      }
      values.push_back(static_cast<int>(v));
      max_value = std::max(max_value, static_cast<int>(v));
    }
    data.matrix.push_back(std::move(values));
  }
  if (lambda > 0) {
    data.lambda = lambda;
  } else {
    data.lambda = max_value + 1;
    if (warning != nullptr) {
      *warning = "alphabet size not given, inferred " + std::to_string(data.lambda) + " from the matrix";
    }
  }
  return data;
}

inline nlohmann::json model_to_json(const DiagnosisModel& model) {
  nlohmann::json doc;
  doc["lambda"] = model.lambda();
  doc["conditions"] = nlohmann::json::array();
  for (int i = 0; i < model.condition_count(); ++i) {
    doc["conditions"].push_back({{"name", model.conditions.names[static_cast<std::size_t>(i)]},
                                 {"p", round_to_12sig(model.conditions.priors[static_cast<std::size_t>(i)])}});
  }
  doc["symptoms"] = model.symptom_names;
  doc["matrix"] = nlohmann::json::array();
  for (int i = 0; i < model.condition_count(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < model.symptom_count(); ++j) row.push_back(model.value_at(i, j));
    doc["matrix"].push_back(row);
  }
  return doc;
}

inline std::string serialize_model(const DiagnosisModel& model) { return model_to_json(model).dump(2) + "\n"; }

namespace detail {

inline nlohmann::json tree_node_to_json(const TreeNode* node, const DiagnosisModel& model) {
  nlohmann::json doc;
  if (node->is_leaf()) {
    doc["leaf"] = nlohmann::json::array();
    doc["posterior"] = nlohmann::json::object();
    for (std::size_t k = 0; k < node->block.size(); ++k) {
      const std::string& name = model.conditions.names[static_cast<std::size_t>(node->block[k])];
      doc["leaf"].push_back(name);
      doc["posterior"][name] = round_to_12sig(node->posterior[k]);
    }
    doc["status"] = node->resolved ? "resolved" : "ambiguous";
    return doc;
  }
  doc["test"] = model.symptom_names[static_cast<std::size_t>(node->symptom)];
  doc["branches"] = nlohmann::json::object();
  for (const auto& [value, child] : node->branches) {
    doc["branches"][std::to_string(value)] = tree_node_to_json(child.get(), model);
  }
  return doc;
}

inline std::unique_ptr<TreeNode> tree_node_from_json(const nlohmann::json& doc, const DiagnosisModel& model) {
  auto node = std::make_unique<TreeNode>();
  if (doc.contains("leaf")) {
    for (const auto& name : doc.at("leaf")) {
      const int index = model.condition_index(name.get<std::string>());
      if (index < 0) {
        throw DiagError(ErrorCode::TreeModelMismatch,
                        "leaf names condition '" + name.get<std::string>() + "' not in the model");
      }
      node->block.push_back(index);
    }
    if (node->block.empty()) {
      throw DiagError(ErrorCode::ParseError, "leaf with no conditions");
    }
    const auto& posterior = doc.at("posterior");
    for (int index : node->block) {
      const std::string& name = model.conditions.names[static_cast<std::size_t>(index)];
      if (!posterior.contains(name)) {
        throw DiagError(ErrorCode::ParseError, "posterior missing '" + name + "'");
      }
      node->posterior.push_back(posterior.at(name).get<double>());
    }
    const std::string status = doc.at("status").get<std::string>();
    if (status != "resolved" && status != "ambiguous") {
      throw DiagError(ErrorCode::ParseError, "leaf status '" + status + "'");
    }
    node->resolved = status == "resolved";
    return node;
  }
  if (!doc.contains("test")) {
    throw DiagError(ErrorCode::ParseError, "node is neither a test nor a leaf");
  }
  const std::string symptom = doc.at("test").get<std::string>();
  node->symptom = model.symptom_index(symptom);
  if (node->symptom < 0) {
    throw DiagError(ErrorCode::TreeModelMismatch, "tree tests symptom '" + symptom + "' not in the model");
  }
  std::map<int, nlohmann::json> ordered;
  for (const auto& [key, child] : doc.at("branches").items()) {
    char* end = nullptr;
    const long value = std::strtol(key.c_str(), &end, 10);
    if (key.empty() || end == nullptr || *end != '\0') {
      throw DiagError(ErrorCode::ParseError, "branch key '" + key + "' is not a value");
    }
    ordered.emplace(static_cast<int>(value), child);
  }
  if (ordered.empty()) {
    throw DiagError(ErrorCode::ParseError, "test node with no branches");
  }
  for (const auto& [value, child] : ordered) {
    node->branches.emplace_back(value, tree_node_from_json(child, model));
  }
  return node;
}

}  // namespace detail

inline std::string serialize_tree(const DiagnosisTree& tree, const DiagnosisModel& model) {
  nlohmann::json doc;
  doc["lambda"] = tree.lambda;
  doc["root"] = detail::tree_node_to_json(tree.root.get(), model);
  return doc.dump(2) + "\n";
}

inline DiagnosisTree parse_tree(const std::string& text, const DiagnosisModel& model) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DiagError(ErrorCode::ParseError, e.what());
  }
  DiagnosisTree tree;
  try {
    tree.lambda = doc.at("lambda").get<int>();
    tree.root = detail::tree_node_from_json(doc.at("root"), model);
  } catch (const nlohmann::json::exception& e) {
    throw DiagError(ErrorCode::ParseError, e.what());
  }
  if (tree.lambda != model.lambda()) {
    throw DiagError(ErrorCode::TreeModelMismatch, "tree alphabet size " + std::to_string(tree.lambda) +
                                                      " vs model " + std::to_string(model.lambda()));
  }
  tree.condition_count = model.condition_count();
  tree.symptom_count = model.symptom_count();
  return tree;
}

namespace detail {

inline std::string dot_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline void dot_node(const TreeNode* node, const DiagnosisModel& model, int& counter, std::ostringstream& out) {
  const int id = counter++;
  if (node->is_leaf()) {
    std::string label;
    for (std::size_t k = 0; k < node->block.size(); ++k) {
      if (k > 0) label += " ";
      label += model.conditions.names[static_cast<std::size_t>(node->block[k])];
    }
    // The line break must survive escaping: graphviz reads \n in a label as a
    // newline.
    out << "  n" << id << " [shape=ellipse, label=\"" << dot_escape(label)
        << (node->resolved ? "\\nresolved" : "\\nambiguous") << "\"];\n";
    return;
  }
  out << "  n" << id << " [shape=box, label=\""
      << dot_escape(model.symptom_names[static_cast<std::size_t>(node->symptom)]) << "\"];\n";
  for (const auto& [value, child] : node->branches) {
    out << "  n" << id << " -> n" << counter << " [label=\"" << value << "\"];\n";
    dot_node(child.get(), model, counter, out);
  }
}

}  // namespace detail

inline std::string export_dot(const DiagnosisTree& tree, const DiagnosisModel& model) {
  std::ostringstream out;
  out << "digraph diagnosis {\n";
  int counter = 0;
  detail::dot_node(tree.root.get(), model, counter, out);
  out << "}\n";
  return out.str();
}

inline std::string serialize_identity_report(const IdentityReport& report) {
  nlohmann::json doc;
  doc["seed"] = report.seed;
  doc["trials"] = report.trials;
  doc["all_pass"] = report.all_pass;
  doc["checks"] = nlohmann::json::array();
  std::map<std::string, const IdentityCheck*> ordered;
  for (const IdentityCheck& check : report.checks) ordered[check.name] = &check;
  for (const auto& [name, check] : ordered) {
    doc["checks"].push_back({{"evaluations", check->evaluations},
                             {"max_abs_deviation", round_to_12sig(check->max_deviation)},
                             {"name", name},
                             {"pass", check->pass},
                             {"tolerance", round_to_12sig(check->tolerance)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace diagplan
