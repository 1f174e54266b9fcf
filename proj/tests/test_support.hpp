// Copyright 2026 The synpop Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "synpop/census_data.hpp"
#include "synpop/nsga2.hpp"
#include "temp_files.hpp"

namespace synpop::testing {

// sex {m,f}; age {ch,ad,el} grouped as itself; marital {single,married}.
inline AttributeSchema TinySchema() {
  return ParseSchema(nlohmann::json::parse(R"({"attributes":[
    {"name":"sex","categories":["m","f"]},
    {"name":"age","categories":["ch","ad","el"],
     "grouping":{"ch":"ch","ad":"ad","el":"el"}},
    {"name":"marital","categories":["single","married"]}]})"));
}

inline std::vector<ValidationRule> ChildMarriageRule(const AttributeSchema& schema) {
  return ParseRules(nlohmann::json::parse(R"({"rules":[{"name":"under_18_married",
    "message":"a person under 18 cannot be married",
    "when":{"age":["ch"],"marital":["married"]}}]})"),
                    schema);
}

// Fronts by repeatedly peeling the points no remaining point dominates.
inline std::vector<std::vector<std::size_t>> BruteForceFronts(
    const std::vector<ObjectiveVector>& points) {
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<bool> removed(points.size(), false);
  std::size_t left = points.size();
  while (left > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (removed[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
        if (removed[j] || j == i) continue;
        const auto& a = points[j];
        const auto& b = points[i];
        bool le = true, lt = false;
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k] > b[k]) le = false;
          if (a[k] < b[k]) lt = true;
        }
        dominated = le && lt;
      }
      if (!dominated) front.push_back(i);
    }
    for (std::size_t i : front) removed[i] = true;
    left -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

// Integer-valued points on a small grid so ties and duplicates occur.
inline std::vector<ObjectiveVector> RandomPoints(std::mt19937_64& gen, std::size_t n,
                                                 std::size_t k) {
  std::uniform_int_distribution<int> value(0, 9);
  std::vector<ObjectiveVector> points(n, ObjectiveVector(k));
  for (auto& p : points)
    for (auto& v : p) v = value(gen);
  return points;
}

}  // namespace synpop::testing
