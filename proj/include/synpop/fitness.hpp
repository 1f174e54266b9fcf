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

// Objective functions comparing actual (census) and synthetic frequency
// distributions.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synpop/census_data.hpp"
#include "synpop/population_model.hpp"

namespace synpop {

enum class Metric { kL1, kTrapezoid };

Metric ParseMetric(std::string_view name);
std::string_view MetricName(Metric metric);

struct ObjectiveSpec {
  std::string name;
  std::string table;
  std::string attribute;   // marginal axis; ignored when full_cell is set
  bool full_cell = false;  // compare every cell of the table instead
  Metric metric = Metric::kTrapezoid;
  double weight = 1.0;     // used only when selecting from the final archive
};

using ObjectiveVector = std::vector<double>;

// Sum of absolute differences. Throws Error(kData) on a length mismatch.
double L1Objective(std::span<const double> actual, std::span<const double> observed);
double L1Objective(const FrequencyVector& actual, const FrequencyVector& observed);

// Composite trapezoid rule with unit spacing over the absolute difference
// curve d_j = |actual_j - observed_j|; a single category returns d_1.
double TrapezoidArea(std::span<const double> actual, std::span<const double> observed);
double TrapezoidArea(const FrequencyVector& actual, const FrequencyVector& observed);

double Rmse(std::span<const double> actual, std::span<const double> observed);
double Rmse(const FrequencyVector& actual, const FrequencyVector& observed);

double ApplyMetric(Metric metric, std::span<const double> actual, std::span<const double> observed);

// Per-objective min-max scaling to [0, 1] over the given set; constant
// objectives map to 0.
std::vector<ObjectiveVector> NormalizeObjectives(std::span<const ObjectiveVector> vectors);

// Rescales counts so that they sum to `total`.
std::vector<double> Rescale(std::span<const double> counts, double total);

// Compiled objective specs for one entity schema. Evaluate is pure and
// thread-safe.
class Evaluator {
 public:
  // Throws Error(kConfig) for unknown tables or attributes, negative
  // weights, or when no spec has a positive weight.
  Evaluator(const AttributeSchema& schema, std::span<const ContingencyTable> tables,
            std::vector<ObjectiveSpec> specs);

  ObjectiveVector Evaluate(const CandidatePopulation& candidate) const;

  const std::vector<ObjectiveSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  std::vector<std::string> names() const;
  std::vector<double> weights() const;

  // Actual and observed vectors for spec i, as compared by Evaluate.
  std::vector<double> Actual(std::size_t i, std::size_t roster_size) const;
  std::vector<double> Observed(std::size_t i, const CandidatePopulation& candidate) const;

 private:
  struct Compiled {
    std::vector<std::size_t> attributes;  // one entry, or every table axis
    std::vector<std::size_t> extents;
    std::vector<double> actual;  // raw table counts (marginal or full cells)
    double total = 0.0;
  };

  std::vector<ObjectiveSpec> specs_;
  std::vector<Compiled> compiled_;
};

ObjectiveVector Evaluate(const CandidatePopulation& candidate, const AttributeSchema& schema,
                         std::span<const ContingencyTable> tables,
                         const std::vector<ObjectiveSpec>& specs);

}  // namespace synpop
