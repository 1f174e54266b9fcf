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

#include "synpop/household_synthesis.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <numeric>

#include "synpop/error.hpp"

namespace synpop {

char AgeClassLetter(AgeClass c) {
  switch (c) {
    case AgeClass::kAdult: return 'A';
    case AgeClass::kChild: return 'C';
    case AgeClass::kElder: return 'E';
  }
  return '?';
}

CompositionSpec ParseComposition(std::string_view code) {
  CompositionSpec spec;
  bool any = false;
  std::size_t pos = 0;
  while (pos < code.size()) {
    while (pos < code.size() && (code[pos] == ' ' || code[pos] == '\t')) ++pos;
    if (pos >= code.size()) break;
    std::size_t end = pos;
    while (end < code.size() && code[end] != ' ' && code[end] != '\t') ++end;
    const std::string_view token = code.substr(pos, end - pos);
    pos = end;

    const std::string where = "composition '" + std::string(code) + "'";
    if (token.size() < 2) Fail(ErrorKind::kData, where + ": malformed token '" + std::string(token) + "'");
    int count = 0;
    const char* digits_end = token.data() + token.size() - 1;
    auto [p, ec] = std::from_chars(token.data(), digits_end, count);
    if (ec != std::errc() || p != digits_end || count < 0) {
      Fail(ErrorKind::kData, where + ": malformed token '" + std::string(token) + "'");
    }
    AgeClass cls;
    switch (token.back()) {
      case 'A': cls = AgeClass::kAdult; break;
      case 'C': cls = AgeClass::kChild; break;
      case 'E': cls = AgeClass::kElder; break;
      default:
        Fail(ErrorKind::kData, where + ": unknown class letter '" + std::string(1, token.back()) + "'");
    }
    spec.required[static_cast<std::size_t>(cls)] += count;
    spec.total += count;
    any = true;
  }
  if (!any) Fail(ErrorKind::kData, "empty composition code");
  if (spec.total <= 0) Fail(ErrorKind::kData, "composition '" + std::string(code) + "' requires nobody");
  return spec;
}

AgeClass ClassifyPerson(std::span<const CategoryIndex> person, const AttributeSchema& schema,
                        std::size_t age_attribute) {
  const auto& age = schema.attribute(age_attribute);
  const CategoryIndex bin = person[age_attribute];
  const std::size_t group = bin < age.group_of.size() ? age.group_of[bin] : kNoGroup;
  if (group == kNoGroup) {
    Fail(ErrorKind::kData, "age bin '" + age.categories.at(bin) + "' has no age-class grouping");
  }
  const std::string& g = age.groups[group];
  if (g == "ch") return AgeClass::kChild;
  if (g == "ad") return AgeClass::kAdult;
  if (g == "el") return AgeClass::kElder;
  Fail(ErrorKind::kData, "age group '" + g + "' is not one of ch, ad, el");
}

EvolutionResult GenerateHouseholds(const EntityModel& model, const Evaluator& evaluator,
                                   std::size_t household_count, const EvolutionConfig& config,
                                   const ProgressFn& progress) {
  return Evolve(model, evaluator, household_count, config, progress);
}

AllocationResult Allocate(std::span<const AgeClass> persons,
                          std::span<const CompositionSpec> households, AllocationOrder order) {
  std::array<std::deque<std::size_t>, kAgeClassCount> pool;
  for (std::size_t i = 0; i < persons.size(); ++i) {
    pool[static_cast<std::size_t>(persons[i])].push_back(i);
  }
  std::vector<std::size_t> visit(households.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  if (order == AllocationOrder::kLargestFirst) {
    std::stable_sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) {
      return households[a].total > households[b].total;
    });
  }

  AllocationResult result;
  result.households.resize(households.size());
  for (std::size_t h : visit) {
    HouseholdFill& fill = result.households[h];
    fill.household = h;
    fill.complete = true;
    for (std::size_t c = 0; c < kAgeClassCount; ++c) {
      for (int need = households[h].required[c]; need > 0; --need) {
        if (pool[c].empty()) {
          fill.shortage[c] = need;
          fill.complete = false;
          break;
        }
        fill.members.push_back(pool[c].front());
        pool[c].pop_front();
      }
    }
    std::sort(fill.members.begin(), fill.members.end());
    if (fill.complete) ++result.complete_count;
  }
  for (const auto& q : pool) result.unallocated.insert(result.unallocated.end(), q.begin(), q.end());
  std::sort(result.unallocated.begin(), result.unallocated.end());
  return result;
}

AllocationResult Allocate(const CandidatePopulation& persons, const AttributeSchema& person_schema,
                          std::size_t age_attribute, const CandidatePopulation& households,
                          const AttributeSchema& household_schema,
                          std::size_t composition_attribute, AllocationOrder order) {
  std::vector<AgeClass> classes(persons.size());
  for (std::size_t i = 0; i < persons.size(); ++i) {
    classes[i] = ClassifyPerson(persons.entity(i), person_schema, age_attribute);
  }
  const auto& codes = household_schema.attribute(composition_attribute).categories;
  std::vector<CompositionSpec> parsed(codes.size());
  for (std::size_t c = 0; c < codes.size(); ++c) parsed[c] = ParseComposition(codes[c]);
  std::vector<CompositionSpec> specs(households.size());
  for (std::size_t h = 0; h < households.size(); ++h) {
    specs[h] = parsed[households.at(h, composition_attribute)];
  }
  return Allocate(classes, specs, order);
}

}  // namespace synpop
