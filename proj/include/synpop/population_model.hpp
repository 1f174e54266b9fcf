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

// Candidate populations (GA individuals), weighted sampling of synthetic
// entities and rule-based validation.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "synpop/census_data.hpp"
#include "synpop/random.hpp"

namespace synpop {

using CategoryIndex = std::uint16_t;

// One synthetic entity (a person or a household): a category index per
// schema attribute, in schema order.
struct SyntheticEntity {
  std::vector<CategoryIndex> assignments;

  bool operator==(const SyntheticEntity&) const = default;
};
using SyntheticPerson = SyntheticEntity;

// A fixed-length roster of entities stored row-major. Length never changes
// after construction.
class CandidatePopulation {
 public:
  CandidatePopulation() = default;
  CandidatePopulation(std::size_t entity_count, std::size_t attribute_count)
      : attribute_count_(attribute_count), genes_(entity_count * attribute_count, 0) {}

  std::size_t size() const { return attribute_count_ == 0 ? 0 : genes_.size() / attribute_count_; }
  std::size_t attribute_count() const { return attribute_count_; }

  std::span<const CategoryIndex> entity(std::size_t i) const {
    return {genes_.data() + i * attribute_count_, attribute_count_};
  }
  std::span<CategoryIndex> entity(std::size_t i) {
    return {genes_.data() + i * attribute_count_, attribute_count_};
  }
  CategoryIndex at(std::size_t i, std::size_t attribute) const {
    return genes_[i * attribute_count_ + attribute];
  }
  CategoryIndex& at(std::size_t i, std::size_t attribute) {
    return genes_[i * attribute_count_ + attribute];
  }
  void Set(std::size_t i, std::span<const CategoryIndex> assignments);

  const std::vector<CategoryIndex>& genes() const { return genes_; }

  bool operator==(const CandidatePopulation&) const = default;

 private:
  std::size_t attribute_count_ = 0;
  std::vector<CategoryIndex> genes_;
};

// Forbids a combination of categories: an entity violates the rule when, for
// every clause, its category of the clause attribute is in the forbidden set.
struct ValidationRule {
  struct Clause {
    std::size_t attribute;
    std::vector<bool> forbidden;  // indexed by category
  };

  std::string name;
  std::vector<Clause> clauses;
  std::string message;

  bool ViolatedBy(std::span<const CategoryIndex> entity) const;
};

// {"rules": [{"name": ..., "message": ..., "when": {attr: [codes...]}}]}
std::vector<ValidationRule> ParseRules(const nlohmann::json& doc, const AttributeSchema& schema);
std::vector<ValidationRule> LoadRules(const std::filesystem::path& path,
                                      const AttributeSchema& schema);

// All rules the entity violates; empty means valid.
std::vector<const ValidationRule*> ValidatePerson(std::span<const CategoryIndex> entity,
                                                  std::span<const ValidationRule> rules);
bool IsValid(std::span<const CategoryIndex> entity, std::span<const ValidationRule> rules);

// Draws an index from a fixed categorical distribution by inverse CDF.
class CategoricalSampler {
 public:
  CategoricalSampler() = default;
  explicit CategoricalSampler(std::span<const double> weights);

  std::size_t Draw(RandomStream& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

// How entities are drawn: each attribute independently from its weight
// vector, except the axes of an optional joint table, which are drawn
// together from that table's cells.
struct SamplingPlan {
  std::vector<CategoricalSampler> independent;  // per schema attribute
  std::vector<std::vector<double>> weights;     // per schema attribute
  struct Joint {
    std::vector<std::size_t> attributes;  // schema index per table axis
    std::vector<std::size_t> extents;
    CategoricalSampler cells;
  };
  std::optional<Joint> joint;
};

// Builds the plan for `schema`. Each attribute's weights come from
// `sources` (attribute -> table name) when listed, otherwise from the first
// table with that attribute as an axis. Throws Error(kData) when an
// attribute has no source table.
SamplingPlan MakeSamplingPlan(const AttributeSchema& schema,
                              std::span<const ContingencyTable> tables,
                              const std::vector<std::pair<std::string, std::string>>& sources,
                              const std::optional<std::string>& joint_table);

// Plan from explicit per-attribute probability vectors.
SamplingPlan MakeSamplingPlan(const std::vector<std::vector<double>>& weights);

// Draws one entity; rules are not checked.
SyntheticEntity SamplePerson(const SamplingPlan& plan, RandomStream& rng);
void SampleInto(const SamplingPlan& plan, RandomStream& rng, std::span<CategoryIndex> out);

// Everything needed to create valid entities of one kind.
struct EntityModel {
  AttributeSchema schema;
  SamplingPlan sampling;
  std::vector<ValidationRule> rules;
  std::size_t max_retries = 100;
};

// Rejection-samples a valid entity into `out`. Returns false when
// `max_retries` draws were all rejected.
bool SampleValid(const EntityModel& model, RandomStream& rng, std::span<CategoryIndex> out);

// Builds a roster of `size` valid entities. Slot i uses its own stream
// derived from `seed`, so the result is independent of `workers`. Throws
// Error(kConfig) when size is zero and Error(kEvolution) when a slot
// exhausts its retries.
CandidatePopulation GenerateCandidate(const EntityModel& model, std::size_t size,
                                      std::uint64_t seed, std::size_t workers = 1);

// Category counts of one attribute over the roster.
FrequencyVector ObservedFrequencies(const CandidatePopulation& candidate,
                                    const AttributeSchema& schema, std::string_view attribute);
std::vector<double> CountCategories(const CandidatePopulation& candidate, std::size_t attribute,
                                    std::size_t category_count);

}  // namespace synpop
