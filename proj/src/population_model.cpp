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

#include "synpop/population_model.hpp"

#include <algorithm>
#include <cmath>

#include "io_util.hpp"
#include "synpop/error.hpp"
#include "synpop/parallel.hpp"

namespace synpop {

void CandidatePopulation::Set(std::size_t i, std::span<const CategoryIndex> assignments) {
  std::copy(assignments.begin(), assignments.end(), entity(i).begin());
}

bool ValidationRule::ViolatedBy(std::span<const CategoryIndex> entity) const {
  if (clauses.empty()) return false;
  for (const auto& c : clauses) {
    const CategoryIndex v = entity[c.attribute];
    if (v >= c.forbidden.size() || !c.forbidden[v]) return false;
  }
  return true;
}

std::vector<ValidationRule> ParseRules(const nlohmann::json& doc, const AttributeSchema& schema) {
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    Fail(ErrorKind::kData, "rules: expected an object with a 'rules' array");
  }
  std::vector<ValidationRule> rules;
  for (const auto& item : doc["rules"]) {
    ValidationRule rule;
    rule.name = item.value("name", "rule" + std::to_string(rules.size()));
    rule.message = item.value("message", rule.name);
    if (!item.contains("when") || !item["when"].is_object() || item["when"].empty()) {
      Fail(ErrorKind::kData, "rule '" + rule.name + "': 'when' must be a non-empty object");
    }
    for (const auto& [attr_name, codes] : item["when"].items()) {
      auto a = schema.Find(attr_name);
      if (!a) Fail(ErrorKind::kData, "rule '" + rule.name + "': unknown attribute '" + attr_name + "'");
      const auto& attr = schema.attribute(*a);
      ValidationRule::Clause clause{*a, std::vector<bool>(attr.size(), false)};
      if (!codes.is_array()) {
        Fail(ErrorKind::kData, "rule '" + rule.name + "': categories of '" + attr_name +
                                   "' must be a list");
      }
      for (const auto& code : codes) {
        auto c = code.is_string() ? attr.FindCategory(code.get<std::string>()) : std::nullopt;
        if (!c) {
          Fail(ErrorKind::kData, "rule '" + rule.name + "': unknown category " + code.dump() +
                                     " for '" + attr_name + "'");
        }
        clause.forbidden[*c] = true;
      }
      rule.clauses.push_back(std::move(clause));
    }
    // Clauses in schema order regardless of object key order.
    std::sort(rule.clauses.begin(), rule.clauses.end(),
              [](const auto& x, const auto& y) { return x.attribute < y.attribute; });
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<ValidationRule> LoadRules(const std::filesystem::path& path,
                                      const AttributeSchema& schema) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorKind::kData, "rules " + path.string() + ": " + e.what());
  }
  return ParseRules(doc, schema);
}

std::vector<const ValidationRule*> ValidatePerson(std::span<const CategoryIndex> entity,
                                                  std::span<const ValidationRule> rules) {
  std::vector<const ValidationRule*> violated;
  for (const auto& r : rules) {
    if (r.ViolatedBy(entity)) violated.push_back(&r);
  }
  return violated;
}

bool IsValid(std::span<const CategoryIndex> entity, std::span<const ValidationRule> rules) {
  return std::none_of(rules.begin(), rules.end(),
                      [&](const ValidationRule& r) { return r.ViolatedBy(entity); });
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
  cumulative_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) Fail(ErrorKind::kData, "sampler: invalid weight");
    total += w;
    cumulative_.push_back(total);
  }
  if (!(total > 0)) Fail(ErrorKind::kData, "sampler: weights sum to zero");
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

std::size_t CategoricalSampler::Draw(RandomStream& rng) const {
  const double u = rng.Uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // Zero-weight categories have empty intervals, so upper_bound never lands
  // on them.
  return static_cast<std::size_t>(it - cumulative_.begin());
}

SamplingPlan MakeSamplingPlan(const AttributeSchema& schema,
                              std::span<const ContingencyTable> tables,
                              const std::vector<std::pair<std::string, std::string>>& sources,
                              const std::optional<std::string>& joint_table) {
  SamplingPlan plan;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const auto& name = schema.attribute(a).name;
    const ContingencyTable* table = nullptr;
    for (const auto& [attr, source] : sources) {
      if (attr != name) continue;
      table = FindTable(tables, source);
      if (!table) Fail(ErrorKind::kData, "weight source table '" + source + "' not found");
    }
    if (!table) table = FirstTableWith(tables, name);
    if (!table) Fail(ErrorKind::kData, "no table provides weights for attribute '" + name + "'");
    plan.weights.push_back(AttributeWeights(Marginalize(*table, name)));
    plan.independent.emplace_back(plan.weights.back());
  }
  if (joint_table) {
    const ContingencyTable* table = FindTable(tables, *joint_table);
    if (!table) Fail(ErrorKind::kData, "joint sampling table '" + *joint_table + "' not found");
    SamplingPlan::Joint joint;
    for (const auto& axis : table->axes()) joint.attributes.push_back(schema.IndexOf(axis));
    joint.extents = table->extents();
    std::vector<double> cells(table->cells().begin(), table->cells().end());
    joint.cells = CategoricalSampler(cells);
    plan.joint = std::move(joint);
  }
  return plan;
}

SamplingPlan MakeSamplingPlan(const std::vector<std::vector<double>>& weights) {
  SamplingPlan plan;
  plan.weights = weights;
  for (const auto& w : weights) plan.independent.emplace_back(w);
  return plan;
}

void SampleInto(const SamplingPlan& plan, RandomStream& rng, std::span<CategoryIndex> out) {
  std::size_t joint_mask = 0;
  if (plan.joint) {
    std::size_t cell = plan.joint->cells.Draw(rng);
    const auto& ext = plan.joint->extents;
    for (std::size_t i = ext.size(); i-- > 0;) {
      out[plan.joint->attributes[i]] = static_cast<CategoryIndex>(cell % ext[i]);
      cell /= ext[i];
      joint_mask |= std::size_t{1} << plan.joint->attributes[i];
    }
  }
  for (std::size_t a = 0; a < plan.independent.size(); ++a) {
    if (a < 64 && (joint_mask >> a) & 1U) continue;
    out[a] = static_cast<CategoryIndex>(plan.independent[a].Draw(rng));
  }
}

SyntheticEntity SamplePerson(const SamplingPlan& plan, RandomStream& rng) {
  SyntheticEntity e;
  e.assignments.resize(plan.independent.size());
  SampleInto(plan, rng, e.assignments);
  return e;
}

bool SampleValid(const EntityModel& model, RandomStream& rng, std::span<CategoryIndex> out) {
  for (std::size_t attempt = 0; attempt < model.max_retries; ++attempt) {
    SampleInto(model.sampling, rng, out);
    if (IsValid(out, model.rules)) return true;
  }
  return false;
}

CandidatePopulation GenerateCandidate(const EntityModel& model, std::size_t size,
                                      std::uint64_t seed, std::size_t workers) {
  if (size == 0) Fail(ErrorKind::kConfig, "candidate size must be positive");
  if (model.max_retries == 0) Fail(ErrorKind::kConfig, "max_retries must be at least 1");
  if (model.schema.size() > 64) Fail(ErrorKind::kConfig, "at most 64 attributes are supported");
  CandidatePopulation candidate(size, model.schema.size());
  ParallelFor(size, workers, [&](std::size_t slot) {
    RandomStream rng(DeriveSeed(seed, {slot}));
    if (!SampleValid(model, rng, candidate.entity(slot))) {
      Fail(ErrorKind::kEvolution, "sampling retries exhausted for slot " + std::to_string(slot) +
                                      " (contradictory rules or weights?)");
    }
  });
  return candidate;
}

std::vector<double> CountCategories(const CandidatePopulation& candidate, std::size_t attribute,
                                    std::size_t category_count) {
  std::vector<std::size_t> counts(category_count, 0);
  const std::size_t stride = candidate.attribute_count();
  const auto& genes = candidate.genes();
  for (std::size_t i = attribute; i < genes.size(); i += stride) ++counts[genes[i]];
  return {counts.begin(), counts.end()};
}

FrequencyVector ObservedFrequencies(const CandidatePopulation& candidate,
                                    const AttributeSchema& schema, std::string_view attribute) {
  const std::size_t a = schema.IndexOf(attribute);
  return {std::string(attribute), CountCategories(candidate, a, schema.attribute(a).size())};
}

}  // namespace synpop
