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

#include "synpop/nsga2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "synpop/error.hpp"
#include "synpop/parallel.hpp"

namespace synpop {

namespace {

// Operation tags for stream derivation.
enum : std::uint64_t { kInit = 1, kSelect = 2, kCross = 3, kMutate = 4, kResample = 5 };

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void EvolutionConfig::Validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    Fail(ErrorKind::kConfig, "population size must be even and at least 2");
  }
  if (!(crossover_probability >= 0 && crossover_probability <= 1)) {
    Fail(ErrorKind::kConfig, "crossover probability must be in [0, 1]");
  }
  if (!(mutation_probability >= 0 && mutation_probability <= 1)) {
    Fail(ErrorKind::kConfig, "mutation probability must be in [0, 1]");
  }
  if (!(resample_probability >= 0 && resample_probability <= 1)) {
    Fail(ErrorKind::kConfig, "resample probability must be in [0, 1]");
  }
  if (max_retries < 1) Fail(ErrorKind::kConfig, "max_retries must be at least 1");
  if (effective_archive_capacity() < 1) Fail(ErrorKind::kConfig, "archive capacity must be positive");
}

bool Dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) Fail(ErrorKind::kData, "dominance: objective vectors differ in length");
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::vector<std::size_t>> FastNondominatedSort(std::span<const ObjectiveVector> vectors) {
  const std::size_t n = vectors.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);  // S_p
  std::vector<std::size_t> domination_count(n, 0);        // n_p
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0) return fronts;

  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (Dominates(vectors[p], vectors[q])) {
        dominated_by[p].push_back(q);
        ++domination_count[q];
      } else if (Dominates(vectors[q], vectors[p])) {
        dominated_by[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    fronts.push_back(std::move(current));
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> CrowdingDistance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n == 0) return distance;
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  const std::size_t k = front.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < k; ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
    const double lo = front[order.front()][m];
    const double hi = front[order.back()][m];
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = hi - lo;
    if (!(range > 0)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      distance[order[i]] += (front[order[i + 1]][m] - front[order[i - 1]][m]) / range;
    }
  }
  return distance;
}

void AssignRankAndCrowding(std::vector<RankedCandidate>& population) {
  std::vector<ObjectiveVector> objectives;
  objectives.reserve(population.size());
  for (const auto& c : population) objectives.push_back(c.objectives);
  const auto fronts = FastNondominatedSort(objectives);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<ObjectiveVector> members;
    members.reserve(fronts[f].size());
    for (std::size_t i : fronts[f]) members.push_back(objectives[i]);
    const auto distance = CrowdingDistance(members);
    for (std::size_t j = 0; j < fronts[f].size(); ++j) {
      population[fronts[f][j]].rank = f + 1;
      population[fronts[f][j]].crowding = distance[j];
    }
  }
}

std::size_t BinaryTournament(std::span<const RankedCandidate> population, RandomStream& rng) {
  if (population.empty()) Fail(ErrorKind::kData, "tournament: empty population");
  const std::size_t a = rng.Below(population.size());
  const std::size_t b = rng.Below(population.size());
  const auto& x = population[a];
  const auto& y = population[b];
  if (x.rank != y.rank) return x.rank < y.rank ? a : b;
  if (x.crowding != y.crowding) return x.crowding > y.crowding ? a : b;
  return rng.Below(2) == 0 ? a : b;
}

std::pair<CandidatePopulation, CandidatePopulation> TwoPointCrossover(
    const CandidatePopulation& p1, const CandidatePopulation& p2, std::size_t cut1,
    std::size_t cut2) {
  if (p1.size() != p2.size() || p1.attribute_count() != p2.attribute_count()) {
    Fail(ErrorKind::kData, "crossover: parents differ in shape");
  }
  if (cut1 > cut2 || cut2 > p1.size()) Fail(ErrorKind::kData, "crossover: invalid cut points");
  CandidatePopulation c1 = p1;
  CandidatePopulation c2 = p2;
  for (std::size_t i = cut1; i < cut2; ++i) {
    c1.Set(i, p2.entity(i));
    c2.Set(i, p1.entity(i));
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<CandidatePopulation, CandidatePopulation> TwoPointCrossover(
    const CandidatePopulation& p1, const CandidatePopulation& p2, RandomStream& rng) {
  const std::size_t a = rng.Below(p1.size() + 1);
  const std::size_t b = rng.Below(p1.size() + 1);
  return TwoPointCrossover(p1, p2, std::min(a, b), std::max(a, b));
}

bool SwapAttribute(CandidatePopulation& candidate, std::size_t i, std::size_t j,
                   std::size_t attribute, std::span<const ValidationRule> rules) {
  std::swap(candidate.at(i, attribute), candidate.at(j, attribute));
  if (IsValid(candidate.entity(i), rules) && IsValid(candidate.entity(j), rules)) return true;
  std::swap(candidate.at(i, attribute), candidate.at(j, attribute));
  return false;
}

CandidatePopulation SwapMutation(CandidatePopulation candidate, double probability,
                                 RandomStream& rng, std::span<const ValidationRule> rules) {
  if (candidate.size() == 0 || candidate.attribute_count() == 0) return candidate;
  if (!rng.Bernoulli(probability)) return candidate;
  const std::size_t i = rng.Below(candidate.size());
  const std::size_t j = rng.Below(candidate.size());
  const std::size_t a = rng.Below(candidate.attribute_count());
  SwapAttribute(candidate, i, j, a, rules);
  return candidate;
}

CandidatePopulation ResampleMutation(CandidatePopulation candidate, double probability,
                                     RandomStream& rng, const EntityModel& model) {
  if (!(probability > 0)) return candidate;
  std::vector<CategoryIndex> fresh(candidate.attribute_count());
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (!rng.Bernoulli(probability)) continue;
    if (SampleValid(model, rng, fresh)) candidate.Set(i, fresh);
  }
  return candidate;
}

std::vector<RankedCandidate> EnvironmentalSelection(const std::vector<RankedCandidate>& combined,
                                                    std::size_t target) {
  if (combined.size() < target) {
    Fail(ErrorKind::kData, "environmental selection: fewer candidates than the target size");
  }
  std::vector<std::size_t> order(combined.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return combined[a].rank < combined[b].rank;
  });
  std::vector<RankedCandidate> out;
  out.reserve(target);
  std::size_t pos = 0;
  while (pos < order.size() && out.size() < target) {
    std::size_t end = pos;
    while (end < order.size() && combined[order[end]].rank == combined[order[pos]].rank) ++end;
    if (out.size() + (end - pos) <= target) {
      for (std::size_t i = pos; i < end; ++i) out.push_back(combined[order[i]]);
    } else {
      std::vector<std::size_t> front(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
        return combined[a].crowding > combined[b].crowding;
      });
      for (std::size_t i = 0; out.size() < target; ++i) out.push_back(combined[front[i]]);
    }
    pos = end;
  }
  return out;
}

bool ParetoArchive::Insert(ArchiveMember member) {
  for (const auto& m : members_) {
    if (m.objectives == member.objectives || Dominates(m.objectives, member.objectives)) {
      return false;
    }
  }
  std::erase_if(members_, [&](const ArchiveMember& m) {
    return Dominates(member.objectives, m.objectives);
  });
  members_.push_back(std::move(member));
  if (members_.size() > capacity_) Prune();
  return true;
}

std::vector<ObjectiveVector> ParetoArchive::objectives() const {
  std::vector<ObjectiveVector> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.objectives);
  return out;
}

void ParetoArchive::Prune() {
  while (members_.size() > capacity_) {
    const auto distance = CrowdingDistance(objectives());
    // Most crowded member; among ties the most recently inserted goes.
    std::size_t victim = 0;
    for (std::size_t i = 1; i < distance.size(); ++i) {
      if (distance[i] <= distance[victim]) victim = i;
    }
    members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

namespace {

GenerationRecord MakeRecord(std::size_t generation, const ParetoArchive& archive,
                            const std::vector<RankedCandidate>& population,
                            const std::vector<double>& references, double elapsed) {
  const std::size_t k = references.size();
  GenerationRecord r;
  r.generation = generation;
  r.best.assign(k, kInf);
  r.mean.assign(k, 0.0);
  for (const auto& m : archive.members()) {
    for (std::size_t i = 0; i < k; ++i) r.best[i] = std::min(r.best[i], m.objectives[i]);
  }
  for (const auto& c : population) {
    for (std::size_t i = 0; i < k; ++i) r.mean[i] += c.objectives[i];
  }
  for (std::size_t i = 0; i < k; ++i) r.mean[i] /= static_cast<double>(population.size());
  r.best_normalized.resize(k);
  r.mean_normalized.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    r.best_normalized[i] = r.best[i] / references[i];
    r.mean_normalized[i] = r.mean[i] / references[i];
  }
  r.elapsed_seconds = elapsed;
  return r;
}

void ArchiveFirstFront(ParetoArchive& archive, const std::vector<RankedCandidate>& population) {
  for (const auto& c : population) {
    if (c.rank == 1) archive.Insert({c.candidate, c.objectives, c.id});
  }
}

}  // namespace

EvolutionResult Evolve(const EntityModel& model, const Evaluator& evaluator,
                       std::size_t roster_size, const EvolutionConfig& config,
                       const ProgressFn& progress) {
  config.Validate();
  if (roster_size == 0) Fail(ErrorKind::kConfig, "roster size must be positive");
  using Clock = std::chrono::steady_clock;
  const std::size_t pop = config.population_size;
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  EntityModel local = model;
  local.max_retries = config.max_retries;

  EvolutionResult result{ParetoArchive(config.effective_archive_capacity()), {}, {}};
  result.history.objective_names = evaluator.names();

  auto start = Clock::now();
  std::vector<RankedCandidate> population(pop);
  ParallelFor(pop, workers, [&](std::size_t i) {
    auto candidate = std::make_shared<CandidatePopulation>(
        GenerateCandidate(local, roster_size, DeriveSeed(config.seed, {0, kInit, i})));
    population[i].objectives = evaluator.Evaluate(*candidate);
    population[i].candidate = std::move(candidate);
    population[i].id = i;
  });
  AssignRankAndCrowding(population);
  ArchiveFirstFront(result.archive, population);

  const std::size_t k = evaluator.size();
  result.history.references.assign(k, 0.0);
  for (const auto& c : population) {
    for (std::size_t i = 0; i < k; ++i) result.history.references[i] += c.objectives[i];
  }
  for (double& r : result.history.references) {
    r /= static_cast<double>(pop);
    if (!(r > 0)) r = 1.0;
  }
  auto record = MakeRecord(0, result.archive, population, result.history.references,
                           std::chrono::duration<double>(Clock::now() - start).count());
  if (progress) progress(record);
  result.history.records.push_back(std::move(record));

  for (std::size_t g = 1; g <= config.generations; ++g) {
    start = Clock::now();
    std::vector<RankedCandidate> offspring(pop);
    ParallelFor(pop / 2, workers, [&](std::size_t pair) {
      RandomStream select_rng(DeriveSeed(config.seed, {g, kSelect, pair}));
      const auto& p1 = *population[BinaryTournament(population, select_rng)].candidate;
      const auto& p2 = *population[BinaryTournament(population, select_rng)].candidate;

      RandomStream cross_rng(DeriveSeed(config.seed, {g, kCross, pair}));
      std::pair<CandidatePopulation, CandidatePopulation> children =
          cross_rng.Bernoulli(config.crossover_probability)
              ? TwoPointCrossover(p1, p2, cross_rng)
              : std::pair<CandidatePopulation, CandidatePopulation>{p1, p2};

      CandidatePopulation* kids[2] = {&children.first, &children.second};
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t index = 2 * pair + c;
        RandomStream mutate_rng(DeriveSeed(config.seed, {g, kMutate, index}));
        *kids[c] = SwapMutation(std::move(*kids[c]), config.mutation_probability, mutate_rng,
                                local.rules);
        if (config.resample_probability > 0) {
          RandomStream resample_rng(DeriveSeed(config.seed, {g, kResample, index}));
          *kids[c] = ResampleMutation(std::move(*kids[c]), config.resample_probability,
                                      resample_rng, local);
        }
        auto child = std::make_shared<CandidatePopulation>(std::move(*kids[c]));
        offspring[index].objectives = evaluator.Evaluate(*child);
        offspring[index].candidate = std::move(child);
        offspring[index].id = static_cast<std::uint64_t>(g) * pop + index;
      }
    });

    std::vector<RankedCandidate> combined = std::move(population);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    AssignRankAndCrowding(combined);
    population = EnvironmentalSelection(combined, pop);
    ArchiveFirstFront(result.archive, population);

    record = MakeRecord(g, result.archive, population, result.history.references,
                        std::chrono::duration<double>(Clock::now() - start).count());
    if (progress) progress(record);
    result.history.records.push_back(std::move(record));
  }
  result.final_population = std::move(population);
  return result;
}

}  // namespace synpop
