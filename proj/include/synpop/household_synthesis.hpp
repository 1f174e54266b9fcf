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

// Second pipeline stage: households fitted to household tables, then filled
// with persons from the first stage according to their composition code.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synpop/census_data.hpp"
#include "synpop/nsga2.hpp"
#include "synpop/population_model.hpp"

namespace synpop {

enum class AgeClass { kAdult = 0, kChild = 1, kElder = 2 };
inline constexpr std::size_t kAgeClassCount = 3;

char AgeClassLetter(AgeClass c);

// Household requirement such as "2A 3C": required members per age class.
struct CompositionSpec {
  std::array<int, kAgeClassCount> required{};  // indexed by AgeClass
  int total = 0;

  int count(AgeClass c) const { return required[static_cast<std::size_t>(c)]; }
  bool operator==(const CompositionSpec&) const = default;
};

// Whitespace-separated <count><letter> tokens, letters A (adult), C (child),
// E (elder). Repeated letters are summed. Throws Error(kData).
CompositionSpec ParseComposition(std::string_view code);

// Maps the person's age bin through the age attribute's grouping
// (ch -> C, ad -> A, el -> E). Throws Error(kData) for an unmapped bin.
AgeClass ClassifyPerson(std::span<const CategoryIndex> person, const AttributeSchema& schema,
                        std::size_t age_attribute);

// Household stage: the same evolutionary loop over household entities.
EvolutionResult GenerateHouseholds(const EntityModel& model, const Evaluator& evaluator,
                                   std::size_t household_count, const EvolutionConfig& config,
                                   const ProgressFn& progress = {});

struct HouseholdFill {
  std::size_t household = 0;         // index in the household roster
  std::vector<std::size_t> members;  // person indices
  bool complete = false;
  std::array<int, kAgeClassCount> shortage{};
};

struct AllocationResult {
  std::vector<HouseholdFill> households;  // in household roster order
  std::vector<std::size_t> unallocated;   // ascending person indices
  std::size_t complete_count = 0;

  double complete_rate() const {
    return households.empty() ? 0.0
                              : static_cast<double>(complete_count) /
                                    static_cast<double>(households.size());
  }
};

enum class AllocationOrder {
  kLargestFirst,  // households by descending total size, stable
  kRosterOrder,
};

// Greedy first-fit: each household (in `order`) takes the first unused
// persons of each required class in roster order. Shortages leave the
// household partial; nothing is raised.
AllocationResult Allocate(std::span<const AgeClass> persons,
                          std::span<const CompositionSpec> households,
                          AllocationOrder order = AllocationOrder::kLargestFirst);

// Convenience overload reading classes and composition codes from rosters.
AllocationResult Allocate(const CandidatePopulation& persons, const AttributeSchema& person_schema,
                          std::size_t age_attribute, const CandidatePopulation& households,
                          const AttributeSchema& household_schema,
                          std::size_t composition_attribute,
                          AllocationOrder order = AllocationOrder::kLargestFirst);

}  // namespace synpop
