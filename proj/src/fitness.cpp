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

#include "synpop/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synpop/error.hpp"

namespace synpop {

Metric ParseMetric(std::string_view name) {
  if (name == "l1" || name == "L1") return Metric::kL1;
  if (name == "trapezoid") return Metric::kTrapezoid;
  Fail(ErrorKind::kConfig, "unknown metric '" + std::string(name) + "'");
}

std::string_view MetricName(Metric metric) {
  return metric == Metric::kL1 ? "l1" : "trapezoid";
}

namespace {

void CheckLengths(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kData, std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double L1Objective(std::span<const double> actual, std::span<const double> observed) {
  CheckLengths(actual, observed, "l1");
  double sum = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) sum += std::abs(actual[j] - observed[j]);
  return sum;
}

double L1Objective(const FrequencyVector& actual, const FrequencyVector& observed) {
  return L1Objective(actual.values, observed.values);
}

double TrapezoidArea(std::span<const double> actual, std::span<const double> observed) {
  CheckLengths(actual, observed, "trapezoid");
  if (actual.empty()) Fail(ErrorKind::kData, "trapezoid: empty vectors");
  if (actual.size() == 1) return std::abs(actual[0] - observed[0]);
  double area = 0.0;
  double prev = std::abs(actual[0] - observed[0]);
  for (std::size_t j = 1; j < actual.size(); ++j) {
    const double d = std::abs(actual[j] - observed[j]);
    area += 0.5 * (prev + d);
    prev = d;
  }
  return area;
}

double TrapezoidArea(const FrequencyVector& actual, const FrequencyVector& observed) {
  return TrapezoidArea(actual.values, observed.values);
}

double Rmse(std::span<const double> actual, std::span<const double> observed) {
  CheckLengths(actual, observed, "rmse");
  if (actual.empty()) Fail(ErrorKind::kData, "rmse: empty vectors");
  double sum = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) {
    const double d = actual[j] - observed[j];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double Rmse(const FrequencyVector& actual, const FrequencyVector& observed) {
  return Rmse(actual.values, observed.values);
}

double ApplyMetric(Metric metric, std::span<const double> actual, std::span<const double> observed) {
  return metric == Metric::kL1 ? L1Objective(actual, observed) : TrapezoidArea(actual, observed);
}

std::vector<ObjectiveVector> NormalizeObjectives(std::span<const ObjectiveVector> vectors) {
  std::vector<ObjectiveVector> out(vectors.begin(), vectors.end());
  if (vectors.empty()) return out;
  const std::size_t k = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != k) Fail(ErrorKind::kData, "normalize: objective vectors differ in length");
  }
  for (std::size_t i = 0; i < k; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : vectors) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    const double range = hi - lo;
    for (auto& v : out) v[i] = range > 0 ? (v[i] - lo) / range : 0.0;
  }
  return out;
}

std::vector<double> Rescale(std::span<const double> counts, double total) {
  double sum = 0.0;
  for (double c : counts) sum += c;
  std::vector<double> out(counts.begin(), counts.end());
  if (sum > 0) {
    const double factor = total / sum;
    for (double& c : out) c *= factor;
  }
  return out;
}

Evaluator::Evaluator(const AttributeSchema& schema, std::span<const ContingencyTable> tables,
                     std::vector<ObjectiveSpec> specs)
    : specs_(std::move(specs)) {
  if (specs_.empty()) Fail(ErrorKind::kConfig, "no objectives configured");
  bool any_positive = false;
  for (const auto& spec : specs_) {
    if (!(spec.weight >= 0) || !std::isfinite(spec.weight)) {
      Fail(ErrorKind::kConfig, "objective '" + spec.name + "': weight must be non-negative");
    }
    any_positive = any_positive || spec.weight > 0;
    const ContingencyTable* table = FindTable(tables, spec.table);
    if (!table) {
      Fail(ErrorKind::kConfig, "objective '" + spec.name + "': unknown table '" + spec.table + "'");
    }
    Compiled c;
    c.total = static_cast<double>(table->total());
    if (spec.full_cell) {
      for (const auto& axis : table->axes()) c.attributes.push_back(schema.IndexOf(axis));
      c.extents = table->extents();
      c.actual.assign(table->cells().begin(), table->cells().end());
    } else {
      if (!table->AxisOf(spec.attribute)) {
        Fail(ErrorKind::kConfig, "objective '" + spec.name + "': '" + spec.attribute +
                                     "' is not an axis of '" + spec.table + "'");
      }
      const std::size_t a = schema.IndexOf(spec.attribute);
      c.attributes = {a};
      c.extents = {schema.attribute(a).size()};
      c.actual = Marginalize(*table, spec.attribute).values;
    }
    compiled_.push_back(std::move(c));
  }
  if (!any_positive) Fail(ErrorKind::kConfig, "at least one objective needs a positive weight");
}

std::vector<std::string> Evaluator::names() const {
  std::vector<std::string> out;
  for (const auto& s : specs_) out.push_back(s.name);
  return out;
}

std::vector<double> Evaluator::weights() const {
  std::vector<double> out;
  for (const auto& s : specs_) out.push_back(s.weight);
  return out;
}

std::vector<double> Evaluator::Actual(std::size_t i, std::size_t roster_size) const {
  const auto& c = compiled_.at(i);
  std::vector<double> out(c.actual);
  const double factor = static_cast<double>(roster_size) / c.total;
  for (double& v : out) v *= factor;
  return out;
}

std::vector<double> Evaluator::Observed(std::size_t i, const CandidatePopulation& candidate) const {
  const auto& c = compiled_.at(i);
  if (c.attributes.size() == 1) return CountCategories(candidate, c.attributes[0], c.extents[0]);
  std::vector<double> counts(c.actual.size(), 0.0);
  for (std::size_t e = 0; e < candidate.size(); ++e) {
    const auto entity = candidate.entity(e);
    std::size_t index = 0;
    for (std::size_t k = 0; k < c.attributes.size(); ++k) {
      index = index * c.extents[k] + entity[c.attributes[k]];
    }
    counts[index] += 1.0;
  }
  return counts;
}

ObjectiveVector Evaluator::Evaluate(const CandidatePopulation& candidate) const {
  if (candidate.size() == 0) Fail(ErrorKind::kData, "cannot evaluate an empty candidate");
  ObjectiveVector out(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    out[i] = ApplyMetric(specs_[i].metric, Actual(i, candidate.size()), Observed(i, candidate));
  }
  return out;
}

ObjectiveVector Evaluate(const CandidatePopulation& candidate, const AttributeSchema& schema,
                         std::span<const ContingencyTable> tables,
                         const std::vector<ObjectiveSpec>& specs) {
  return Evaluator(schema, tables, specs).Evaluate(candidate);
}

}  // namespace synpop
