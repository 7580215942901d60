#pragma once

#include <string>
#include <vector>

#include "diagplan/model.hpp"

namespace testutil {

// Five conditions, three binary symptoms; small enough to check every number
// by hand.
inline diagplan::ModelData example_data() {
  diagplan::ModelData data;
  data.condition_names = {"e1", "e2", "e3", "e4", "e5"};
  data.priors = {0.05, 0.05, 0.84, 0.03, 0.03};
  data.symptom_names = {"d1", "d2", "d3"};
  data.lambda = 2;
  data.matrix = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}, {1, 0, 0}};
  return data;
}

inline diagplan::DiagnosisModel example_model() { return diagplan::validate_model(example_data()); }

inline std::string data_path(const std::string& name) { return std::string(DIAGPLAN_DATA_DIR) + "/" + name; }

}  // namespace testutil
