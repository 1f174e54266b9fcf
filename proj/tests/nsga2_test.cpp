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
#include <limits>
#include <random>

#include "doctest.h"
#include "synpop/error.hpp"
#include "synpop/pipeline.hpp"
#include "test_support.hpp"

namespace synpop {
namespace {

using testing::ChildMarriageRule;
using testing::TinySchema;
using V = std::vector<double>;
using Fronts = std::vector<std::vector<std::size_t>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("dominates") {
  CHECK(Dominates(V{1, 2}, V{2, 3}));
  CHECK_FALSE(Dominates(V{1, 2}, V{1, 2}));
  CHECK_FALSE(Dominates(V{1, 3}, V{2, 2}));
  CHECK_FALSE(Dominates(V{2, 2}, V{1, 3}));
  CHECK(Dominates(V{1, 2}, V{1, 3}));
  CHECK_THROWS_AS(Dominates(V{1}, V{1, 2}), Error);
}

TEST_CASE("fast non-dominated sort examples") {
  const std::vector<ObjectiveVector> grid{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  CHECK(FastNondominatedSort(grid) == Fronts{{0}, {1, 2}, {3}});
  const std::vector<ObjectiveVector> line{{1, 4}, {2, 3}, {3, 2}, {4, 1}};
  CHECK(FastNondominatedSort(line) == Fronts{{0, 1, 2, 3}});
  const std::vector<ObjectiveVector> one{{5, 5, 5}};
  CHECK(FastNondominatedSort(one) == Fronts{{0}});
}

TEST_CASE("fast non-dominated sort matches the brute-force oracle") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto points = testing::RandomPoints(gen, 1 + gen() % 50, 2 + gen() % 3);
    CHECK(FastNondominatedSort(points) == testing::BruteForceFronts(points));
  }
}

TEST_CASE("crowding distance") {
  const std::vector<ObjectiveVector> front{{1, 3}, {2, 2}, {3, 1}};
  const auto d = CrowdingDistance(front);
  CHECK(d[0] == kInf);
  CHECK(d[1] == doctest::Approx(2).epsilon(1e-12));
  CHECK(d[2] == kInf);

  const std::vector<ObjectiveVector> pair{{0, 1}, {1, 0}};
  CHECK(CrowdingDistance(pair) == V{kInf, kInf});

  const std::vector<ObjectiveVector> same{{4, 4}, {4, 4}, {4, 4}};
  const auto s = CrowdingDistance(same);
  CHECK(std::count(s.begin(), s.end(), kInf) == 2);
  CHECK(std::count(s.begin(), s.end(), 0.0) == 1);
}

RankedCandidate Ranked(std::size_t rank, double crowding, std::uint64_t id = 0) {
  RankedCandidate r;
  r.rank = rank;
  r.crowding = crowding;
  r.id = id;
  return r;
}

// Expected winner from replaying the stream's two index draws.
std::size_t ReplayTournament(std::span<const RankedCandidate> pop, std::uint64_t seed) {
  RandomStream probe(seed);
  const std::size_t a = probe.Below(pop.size());
  const std::size_t b = probe.Below(pop.size());
  if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
  if (pop[a].crowding != pop[b].crowding) return pop[a].crowding > pop[b].crowding ? a : b;
  return probe.Below(2) == 0 ? a : b;
}

TEST_CASE("binary tournament prefers rank then crowding") {
  const std::vector<RankedCandidate> by_rank{Ranked(1, 0.0), Ranked(2, 9.0)};
  const std::vector<RankedCandidate> by_crowding{Ranked(1, 5.0), Ranked(1, 2.0)};
  const std::vector<RankedCandidate> tied{Ranked(1, 1.0), Ranked(1, 1.0)};
  int contested = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    RandomStream probe(seed);
    const bool distinct = probe.Below(2) != probe.Below(2);
    contested += distinct;
    RandomStream r1(seed), r2(seed), r3(seed);
    const auto w1 = BinaryTournament(by_rank, r1);
    const auto w2 = BinaryTournament(by_crowding, r2);
    if (distinct) {
      CHECK(w1 == 0);
      CHECK(w2 == 0);
    }
    CHECK(w1 == ReplayTournament(by_rank, seed));
    CHECK(BinaryTournament(tied, r3) == ReplayTournament(tied, seed));
  }
  CHECK(contested > 100);
}

CandidatePopulation Letters(const std::string& s) {
  CandidatePopulation c(s.size(), 1);
  for (std::size_t i = 0; i < s.size(); ++i) c.at(i, 0) = static_cast<CategoryIndex>(s[i]);
  return c;
}

TEST_CASE("two-point crossover") {
  const auto p1 = Letters("ABCDE");
  const auto p2 = Letters("VWXYZ");
  auto [a, b] = TwoPointCrossover(p1, p2, 1, 3);
  CHECK(a == Letters("AWXDE"));
  CHECK(b == Letters("VBCYZ"));
  auto [c, d] = TwoPointCrossover(p1, p2, 0, 5);
  CHECK(c == p2);
  CHECK(d == p1);
  auto [e, f] = TwoPointCrossover(p1, p2, 2, 2);
  CHECK(e == p1);
  CHECK(f == p2);

  RandomStream rng(4);
  for (int i = 0; i < 100; ++i) {
    auto [x, y] = TwoPointCrossover(p1, p2, rng);
    CHECK(x.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
      const bool straight = x.at(k, 0) == p1.at(k, 0) && y.at(k, 0) == p2.at(k, 0);
      const bool crossed = x.at(k, 0) == p2.at(k, 0) && y.at(k, 0) == p1.at(k, 0);
      CHECK((straight || crossed));
    }
  }
  CHECK_THROWS_AS(TwoPointCrossover(p1, Letters("VW"), 0, 1), Error);
}

TEST_CASE("swap mutation examples") {
  const auto schema = TinySchema();
  const auto rules = ChildMarriageRule(schema);
  CandidatePopulation c(2, 3);
  c.at(0, 1) = 0;  // child, single
  c.at(1, 1) = 1;  // adult, married
  c.at(1, 2) = 1;

  auto swapped = c;
  CHECK(SwapAttribute(swapped, 0, 1, 1, rules) == false);  // child would marry
  CHECK(swapped == c);

  auto ages = c;
  ages.at(1, 2) = 0;
  CHECK(SwapAttribute(ages, 0, 1, 1, rules));
  CHECK(ages.at(0, 1) == 1);
  CHECK(ages.at(1, 1) == 0);

  RandomStream rng(1);
  CHECK(SwapMutation(c, 0.0, rng, rules) == c);
}

std::vector<std::vector<double>> Marginals(const CandidatePopulation& c, const AttributeSchema& s) {
  std::vector<std::vector<double>> out;
  for (std::size_t a = 0; a < s.size(); ++a) out.push_back(CountCategories(c, a, s.attribute(a).size()));
  return out;
}

TEST_CASE("swap mutation conserves every marginal") {
  const auto schema = TinySchema();
  EntityModel model{schema, MakeSamplingPlan({{1, 1}, {1, 1, 1}, {1, 1}}), ChildMarriageRule(schema)};
  auto c = GenerateCandidate(model, 500, 3);
  const auto before = Marginals(c, schema);
  RandomStream rng(8);
  for (int i = 0; i < 1000; ++i) {
    c = SwapMutation(std::move(c), 1.0, rng, model.rules);
    CHECK(Marginals(c, schema) == before);
  }
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(IsValid(c.entity(i), model.rules));
}

TEST_CASE("resample mutation keeps rules and roster length") {
  const auto schema = TinySchema();
  EntityModel model{schema, MakeSamplingPlan({{1, 1}, {1, 1, 1}, {1, 1}}), ChildMarriageRule(schema)};
  const auto c = GenerateCandidate(model, 200, 9);
  RandomStream off(1);
  CHECK(ResampleMutation(c, 0.0, off, model) == c);
  RandomStream on(1);
  const auto r = ResampleMutation(c, 0.5, on, model);
  CHECK(r.size() == c.size());
  CHECK_FALSE(r == c);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(IsValid(r.entity(i), model.rules));
}

TEST_CASE("environmental selection") {
  SUBCASE("truncates the split front by crowding") {
    std::vector<RankedCandidate> combined{Ranked(1, kInf, 0), Ranked(1, 1, 1), Ranked(1, kInf, 2),
                                          Ranked(2, 0.5, 3),  Ranked(2, 1, 4), Ranked(2, kInf, 5)};
    std::vector<std::uint64_t> ids;
    for (const auto& r : EnvironmentalSelection(combined, 4)) ids.push_back(r.id);
    CHECK(ids == std::vector<std::uint64_t>{0, 1, 2, 5});
  }
  SUBCASE("whole first front") {
    std::vector<RankedCandidate> combined{Ranked(2, 1, 0), Ranked(1, 1, 1), Ranked(1, 2, 2)};
    std::vector<std::uint64_t> ids;
    for (const auto& r : EnvironmentalSelection(combined, 2)) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::uint64_t>{1, 2});
  }
  SUBCASE("identical candidates keep input order") {
    std::vector<RankedCandidate> combined;
    for (std::uint64_t i = 0; i < 6; ++i) combined.push_back(Ranked(1, 0.0, i));
    std::vector<std::uint64_t> ids;
    for (const auto& r : EnvironmentalSelection(combined, 3)) ids.push_back(r.id);
    CHECK(ids == std::vector<std::uint64_t>{0, 1, 2});
  }
}

ArchiveMember Member(V objectives, std::uint64_t id) {
  return ArchiveMember{std::make_shared<CandidatePopulation>(), std::move(objectives), id};
}

bool MutuallyNondominated(const ParetoArchive& archive) {
  const auto& m = archive.members();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j && Dominates(m[i].objectives, m[j].objectives)) return false;
  return true;
}

TEST_CASE("pareto archive") {
  ParetoArchive archive(3);
  CHECK(archive.Insert(Member({2, 2}, 0)));
  CHECK_FALSE(archive.Insert(Member({3, 3}, 1)));  // dominated
  CHECK_FALSE(archive.Insert(Member({2, 2}, 2)));  // duplicate
  CHECK(archive.size() == 1);
  CHECK(archive.Insert(Member({1, 3}, 3)));
  CHECK(archive.Insert(Member({3, 1}, 4)));
  CHECK(archive.Insert(Member({1, 1}, 5)));  // dominates all
  CHECK(archive.size() == 1);
  CHECK(archive.members()[0].id == 5);

  ParetoArchive bounded(3);
  for (int i = 0; i < 10; ++i) bounded.Insert(Member({double(i), double(9 - i)}, i));
  CHECK(bounded.size() == 3);
  CHECK(MutuallyNondominated(bounded));
  std::vector<std::uint64_t> ids;
  for (const auto& m : bounded.members()) ids.push_back(m.id);
  CHECK(std::count(ids.begin(), ids.end(), 0u) == 1);  // extremes survive pruning
  CHECK(std::count(ids.begin(), ids.end(), 9u) == 1);
}

TEST_CASE("archive never holds a dominated member") {
  std::mt19937_64 gen(77);
  ParetoArchive archive(40);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    archive.Insert(Member(testing::RandomPoints(gen, 1, 3)[0], i));
    if (i % 100 == 0) CHECK(MutuallyNondominated(archive));
  }
  CHECK(MutuallyNondominated(archive));
  CHECK(archive.size() <= 40);
}

TEST_CASE("config validation") {
  EvolutionConfig c;
  CHECK_NOTHROW(c.Validate());
  CHECK(c.effective_archive_capacity() == 1000);
  c.population_size = 3;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = {};
  c.crossover_probability = 1.5;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = {};
  c.max_retries = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
}

struct SmallFixture {
  Pipeline pipeline{RunConfig::Load(SYNPOP_FIXTURE_DIR "/config_small.json")};
  EntityModel model = pipeline.PersonModel();
  Evaluator evaluator{pipeline.dataset().person_schema, pipeline.dataset().person_tables,
                      pipeline.config().persons.objectives};
  EvolutionConfig config = pipeline.config().persons.evolution;
  std::size_t roster = static_cast<std::size_t>(pipeline.config().target_persons);
};

TEST_CASE("zero generations archive the initial non-dominated set") {
  SmallFixture f;
  f.config.generations = 0;
  const auto result = Evolve(f.model, f.evaluator, f.roster, f.config);
  std::vector<ObjectiveVector> initial;
  for (const auto& r : result.final_population) initial.push_back(r.objectives);
  const auto fronts = FastNondominatedSort(initial);
  CHECK(result.archive.size() == fronts[0].size());
  CHECK(result.history.records.size() == 1);
}

TEST_CASE("evolution is deterministic and rule-compliant") {
  SmallFixture f;
  f.config.generations = 50;
  f.config.workers = 1;
  const auto one = Evolve(f.model, f.evaluator, f.roster, f.config);
  f.config.workers = 4;
  const auto four = Evolve(f.model, f.evaluator, f.roster, f.config);

  REQUIRE(one.archive.size() == four.archive.size());
  for (std::size_t i = 0; i < one.archive.size(); ++i) {
    CHECK(one.archive.members()[i].id == four.archive.members()[i].id);
    CHECK(one.archive.members()[i].objectives == four.archive.members()[i].objectives);
    CHECK(*one.archive.members()[i].candidate == *four.archive.members()[i].candidate);
  }
  for (std::size_t g = 0; g < one.history.records.size(); ++g)
    CHECK(one.history.records[g].best == four.history.records[g].best);

  CHECK(MutuallyNondominated(one.archive));
  for (const auto& r : one.final_population) {
    CHECK(r.candidate->size() == f.roster);
    for (std::size_t i = 0; i < r.candidate->size(); ++i)
      CHECK(IsValid(r.candidate->entity(i), f.model.rules));
  }
}

TEST_CASE("archive best of each normalized objective never increases") {
  SmallFixture f;
  f.config.population_size = 20;
  f.config.generations = 50;
  const auto result = Evolve(f.model, f.evaluator, f.roster, f.config);
  const auto& records = result.history.records;
  REQUIRE(records.size() == 51);
  for (std::size_t g = 1; g < records.size(); ++g)
    for (std::size_t k = 0; k < records[g].best_normalized.size(); ++k)
      CHECK(records[g].best_normalized[k] <= records[g - 1].best_normalized[k]);
}

}  // namespace
}  // namespace synpop
