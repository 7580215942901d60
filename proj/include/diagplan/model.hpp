#pragma once

#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "diagplan/error.hpp"

namespace diagplan {

// Priors must land within this distance of 1 unless the caller asks for
// renormalization.
inline constexpr double kSumTolerance = 1e-9;

struct ConditionSet {
  std::vector<std::string> names;
  std::vector<double> priors;

  int size() const noexcept { return static_cast<int>(names.size()); }
};

struct ValueAlphabet {
  int size = 0;  // symptom values are 0 .. size-1
};

// Row-major n x t matrix of symptom values, one row per condition.
struct DiagnosticMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> values;

  int at(int row, int col) const noexcept { return values[static_cast<std::size_t>(row) * cols + col]; }
};

struct DiagnosisModel {
  ConditionSet conditions;
  std::vector<std::string> symptom_names;
  ValueAlphabet alphabet;
  DiagnosticMatrix matrix;

  int condition_count() const noexcept { return conditions.size(); }
  int symptom_count() const noexcept { return static_cast<int>(symptom_names.size()); }
  int lambda() const noexcept { return alphabet.size; }
  int value_at(int condition, int symptom) const noexcept { return matrix.at(condition, symptom); }

  int symptom_index(const std::string& name) const noexcept {
    for (int j = 0; j < symptom_count(); ++j) {
      if (symptom_names[j] == name) return j;
    }
    return -1;
  }

  int condition_index(const std::string& name) const noexcept {
    for (int i = 0; i < condition_count(); ++i) {
      if (conditions.names[i] == name) return i;
    }
    return -1;
  }
};

// Unvalidated input as read from a document. validate_model is the only door
// into DiagnosisModel.
struct ModelData {
  std::vector<std::string> condition_names;
  std::vector<double> priors;
  std::vector<std::string> symptom_names;
  int lambda = 0;
  std::vector<std::vector<int>> matrix;  // one row per condition
};

namespace detail {

inline void check_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      throw DiagError(ErrorCode::DuplicateName, std::string(what) + " name '" + name + "' appears twice");
    }
  }
}

}  // namespace detail

inline DiagnosisModel validate_model(const ModelData& data, bool renormalize = false) {
  const int n = static_cast<int>(data.condition_names.size());
  const int t = static_cast<int>(data.symptom_names.size());
  if (n == 0) {
    throw DiagError(ErrorCode::EmptyInput, "model needs at least one condition");
  }
  if (static_cast<int>(data.priors.size()) != n) {
    throw DiagError(ErrorCode::DimensionMismatch,
                    std::to_string(data.priors.size()) + " priors for " + std::to_string(n) + " conditions");
  }
  if (static_cast<int>(data.matrix.size()) != n) {
    throw DiagError(ErrorCode::DimensionMismatch,
                    std::to_string(data.matrix.size()) + " matrix rows for " + std::to_string(n) + " conditions");
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(data.matrix[i].size()) != t) {
      throw DiagError(ErrorCode::DimensionMismatch,
                      "matrix row " + std::to_string(i) + " has " + std::to_string(data.matrix[i].size()) +
                          " values, expected " + std::to_string(t));
    }
  }
  detail::check_unique(data.condition_names, "condition");
  detail::check_unique(data.symptom_names, "symptom");
  if (data.lambda < 2) {
    throw DiagError(ErrorCode::MatrixValueOutOfAlphabet,
                    "alphabet size " + std::to_string(data.lambda) + " leaves no legal symptom values (need >= 2)");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < t; ++j) {
      const int v = data.matrix[i][j];
      if (v < 0 || v >= data.lambda) {
        throw DiagError(ErrorCode::MatrixValueOutOfAlphabet,
                        "matrix[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + std::to_string(v) +
                            " outside 0.." + std::to_string(data.lambda - 1));
      }
    }
  }

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(data.priors[i] > 0.0) || !std::isfinite(data.priors[i])) {
      throw DiagError(ErrorCode::ZeroOrNegativeProbability,
                      "prior for '" + data.condition_names[i] + "' must be positive and finite");
    }
    sum += data.priors[i];
  }

  DiagnosisModel model;
  model.conditions.names = data.condition_names;
  model.conditions.priors = data.priors;
  if (renormalize) {
    for (double& p : model.conditions.priors) p /= sum;
  } else if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DiagError(ErrorCode::ProbabilitySumOutOfTolerance,
                    "priors sum to " + std::to_string(sum) + ", expected 1 within " + std::to_string(kSumTolerance));
  }
  model.symptom_names = data.symptom_names;
  model.alphabet.size = data.lambda;
  model.matrix.rows = n;
  model.matrix.cols = t;
  model.matrix.values.reserve(static_cast<std::size_t>(n) * t);
  for (const auto& row : data.matrix) {
    model.matrix.values.insert(model.matrix.values.end(), row.begin(), row.end());
  }
  return model;
}

}  // namespace diagplan
