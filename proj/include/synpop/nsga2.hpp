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

// NSGA-II over candidate populations: dominance, fast non-dominated sorting,
// crowding distance, binary tournament, two-point crossover, swap mutation,
// elitist environmental selection, a bounded Pareto archive and the
// generation loop.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synpop/fitness.hpp"
#include "synpop/population_model.hpp"
#include "synpop/random.hpp"

namespace synpop {

struct EvolutionConfig {
  std::size_t population_size = 100;
  std::size_t generations = 500;
  double crossover_probability = 0.9;
  double mutation_probability = 0.2;  // per offspring; one swap event per trigger
  std::uint64_t seed = 42;
  std::size_t max_retries = 100;
  std::size_t archive_capacity = 0;  // 0 means 10 x population_size
  // Per-entity probability of being replaced by a fresh valid sample. Off by
  // default: swap mutation alone conserves every marginal.
  double resample_probability = 0.0;
  std::size_t workers = 1;

  // Throws Error(kConfig).
  void Validate() const;
  std::size_t effective_archive_capacity() const {
    return archive_capacity == 0 ? 10 * population_size : archive_capacity;
  }
};

// Minimization: a is no worse everywhere and strictly better somewhere.
bool Dominates(std::span<const double> a, std::span<const double> b);

// Fronts of indices into `vectors`, best first; indices inside a front are
// ascending.
std::vector<std::vector<std::size_t>> FastNondominatedSort(std::span<const ObjectiveVector> vectors);

// Crowding distance of each member of one front (boundary points get
// +infinity, zero-range objectives contribute nothing).
std::vector<double> CrowdingDistance(std::span<const ObjectiveVector> front);

struct RankedCandidate {
  std::shared_ptr<const CandidatePopulation> candidate;
  ObjectiveVector objectives;
  std::size_t rank = 0;  // 1 = first front
  double crowding = 0.0;
  std::uint64_t id = 0;
};

// Fills rank and crowding for every member.
void AssignRankAndCrowding(std::vector<RankedCandidate>& population);

// Returns the index of the winner: lower rank, then larger crowding
// distance, then a coin flip from `rng`.
std::size_t BinaryTournament(std::span<const RankedCandidate> population, RandomStream& rng);

// Offspring exchange the roster segment [cut1, cut2).
std::pair<CandidatePopulation, CandidatePopulation> TwoPointCrossover(
    const CandidatePopulation& p1, const CandidatePopulation& p2, std::size_t cut1,
    std::size_t cut2);
// Draws the cuts uniformly with 0 <= cut1 <= cut2 <= length.
std::pair<CandidatePopulation, CandidatePopulation> TwoPointCrossover(
    const CandidatePopulation& p1, const CandidatePopulation& p2, RandomStream& rng);

// One swap event: exchange `attribute` between entities i and j, reverted
// if either entity then violates a rule. Returns true if the swap was kept.
bool SwapAttribute(CandidatePopulation& candidate, std::size_t i, std::size_t j,
                   std::size_t attribute, std::span<const ValidationRule> rules);

// With `probability`, performs one swap event on uniformly chosen entities
// and attribute. Every attribute's category multiset is preserved.
CandidatePopulation SwapMutation(CandidatePopulation candidate, double probability,
                                 RandomStream& rng, std::span<const ValidationRule> rules);

// Replaces each entity, independently with `probability`, by a fresh valid
// sample. An entity is kept if sampling exhausts its retries.
CandidatePopulation ResampleMutation(CandidatePopulation candidate, double probability,
                                     RandomStream& rng, const EntityModel& model);

// Whole fronts in rank order while they fit, then the split front by
// descending crowding distance (stable). Requires rank and crowding to be
// assigned.
std::vector<RankedCandidate> EnvironmentalSelection(const std::vector<RankedCandidate>& combined,
                                                    std::size_t target);

struct ArchiveMember {
  std::shared_ptr<const CandidatePopulation> candidate;
  ObjectiveVector objectives;
  std::uint64_t id = 0;
};

// Mutually non-dominated candidates seen so far. Members keep insertion
// order; when over capacity the most crowded member is dropped (per-objective
// extremes have infinite crowding and are never dropped).
class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t capacity = 1000) : capacity_(capacity) {}

  // Returns true if the candidate was added. Dominated candidates and exact
  // objective duplicates leave the archive unchanged.
  bool Insert(ArchiveMember member);

  const std::vector<ArchiveMember>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::vector<ObjectiveVector> objectives() const;

 private:
  void Prune();

  std::size_t capacity_;
  std::vector<ArchiveMember> members_;
};

struct GenerationRecord {
  std::size_t generation = 0;
  std::vector<double> best;             // raw, archive minimum per objective
  std::vector<double> mean;             // raw, population mean per objective
  std::vector<double> best_normalized;  // divided by the reference
  std::vector<double> mean_normalized;
  double elapsed_seconds = 0.0;
};

// Normalized values divide by a fixed per-objective reference (the mean of
// the initial population, or 1 when that mean is 0) so that curves are
// comparable across generations.
struct GenerationHistory {
  std::vector<std::string> objective_names;
  std::vector<double> references;
  std::vector<GenerationRecord> records;
};

struct EvolutionResult {
  ParetoArchive archive;
  GenerationHistory history;
  std::vector<RankedCandidate> final_population;
};

using ProgressFn = std::function<void(const GenerationRecord&)>;

// Runs the NSGA-II loop. Deterministic given config.seed, whatever
// config.workers is.
EvolutionResult Evolve(const EntityModel& model, const Evaluator& evaluator,
                       std::size_t roster_size, const EvolutionConfig& config,
                       const ProgressFn& progress = {});

}  // namespace synpop
