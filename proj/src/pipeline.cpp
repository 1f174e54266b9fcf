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

#include "synpop/pipeline.hpp"

#include <algorithm>

#include "io_util.hpp"
#include "synpop/error.hpp"
#include "synpop/reporting.hpp"

namespace synpop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return fs::absolute(path).lexically_normal();
}

std::vector<TableRef> ParseTables(const json& doc, const char* key, const fs::path& base) {
  std::vector<TableRef> out;
  if (!doc.contains(key)) return out;
  for (const auto& t : doc.at(key)) {
    out.push_back({t.at("name").get<std::string>(), Resolve(base, t.at("path").get<std::string>())});
  }
  return out;
}

json TablesJson(const std::vector<TableRef>& tables) {
  json out = json::array();
  for (const auto& t : tables) out.push_back({{"name", t.name}, {"path", t.path.string()}});
  return out;
}

EvolutionConfig ParseEvolution(const json& doc) {
  EvolutionConfig c;
  if (doc.is_null()) return c;
  c.population_size = doc.value("population_size", c.population_size);
  c.generations = doc.value("generations", c.generations);
  c.crossover_probability = doc.value("crossover_probability", c.crossover_probability);
  c.mutation_probability = doc.value("mutation_probability", c.mutation_probability);
  c.seed = doc.value("seed", c.seed);
  c.max_retries = doc.value("max_retries", c.max_retries);
  c.archive_capacity = doc.value("archive_capacity", c.archive_capacity);
  c.resample_probability = doc.value("resample_probability", c.resample_probability);
  return c;
}

json EvolutionJson(const EvolutionConfig& c) {
  return {{"population_size", c.population_size},
          {"generations", c.generations},
          {"crossover_probability", c.crossover_probability},
          {"mutation_probability", c.mutation_probability},
          {"seed", c.seed},
          {"max_retries", c.max_retries},
          {"archive_capacity", c.archive_capacity},
          {"resample_probability", c.resample_probability}};
}

StageConfig ParseStage(const json& doc) {
  StageConfig s;
  if (doc.is_null()) return s;
  for (const auto& o : doc.value("objectives", json::array())) {
    ObjectiveSpec spec;
    spec.name = o.at("name").get<std::string>();
    spec.table = o.at("table").get<std::string>();
    spec.full_cell = o.value("full_cell", false);
    spec.attribute = o.value("attribute", std::string());
    if (!spec.full_cell && spec.attribute.empty()) {
      throw Error(ErrorKind::kConfig, "objective '" + spec.name + "' needs an attribute");
    }
    spec.metric = ParseMetric(o.value("metric", std::string("trapezoid")));
    spec.weight = o.value("weight", 1.0);
    s.objectives.push_back(std::move(spec));
  }
  s.evolution = ParseEvolution(doc.value("evolution", json()));
  if (doc.contains("weight_sources")) {
    for (const auto& [attr, table] : doc["weight_sources"].items()) {
      s.weight_sources.emplace_back(attr, table.get<std::string>());
    }
  }
  if (doc.contains("joint_sampling_table") && !doc["joint_sampling_table"].is_null()) {
    s.joint_table = doc["joint_sampling_table"].get<std::string>();
  }
  return s;
}

json StageJson(const StageConfig& s) {
  json objectives = json::array();
  for (const auto& o : s.objectives) {
    json j = {{"name", o.name}, {"table", o.table}, {"metric", std::string(MetricName(o.metric))},
              {"weight", o.weight}};
    if (o.full_cell) {
      j["full_cell"] = true;
    } else {
      j["attribute"] = o.attribute;
    }
    objectives.push_back(std::move(j));
  }
  json sources = json::object();
  for (const auto& [a, t] : s.weight_sources) sources[a] = t;
  return {{"objectives", std::move(objectives)},
          {"evolution", EvolutionJson(s.evolution)},
          {"weight_sources", std::move(sources)},
          {"joint_sampling_table", s.joint_table ? json(*s.joint_table) : json(nullptr)}};
}

std::vector<ContingencyTable> LoadTables(const std::vector<TableRef>& refs,
                                         const AttributeSchema& schema) {
  std::vector<ContingencyTable> tables;
  for (const auto& r : refs) tables.push_back(LoadContingencyTable(r.path, schema, r.name));
  return tables;
}

}  // namespace

RunConfig RunConfig::FromJson(const json& input, const fs::path& base_dir) {
  try {
    const json& doc = input.contains("config") && input.contains("manifest_version")
                          ? input.at("config")
                          : input;
    RunConfig c;
    c.region_id = doc.value("region_id", std::string("region"));
    c.schema = Resolve(base_dir, doc.at("schema").get<std::string>());
    c.person_tables = ParseTables(doc, "person_tables", base_dir);
    c.household_tables = ParseTables(doc, "household_tables", base_dir);
    if (doc.contains("person_rules") && !doc["person_rules"].is_null()) {
      c.person_rules = Resolve(base_dir, doc["person_rules"].get<std::string>());
    }
    if (doc.contains("household_rules") && !doc["household_rules"].is_null()) {
      c.household_rules = Resolve(base_dir, doc["household_rules"].get<std::string>());
    }
    c.output_dir = Resolve(base_dir, doc.value("output_dir", std::string("out")));
    const json targets = doc.value("targets", json::object());
    c.target_persons = targets.value("persons", std::int64_t{0});
    c.target_households = targets.value("households", std::int64_t{0});
    c.age_attribute = doc.value("age_attribute", c.age_attribute);
    c.composition_attribute = doc.value("composition_attribute", c.composition_attribute);
    c.size_attribute = doc.value("size_attribute", c.size_attribute);
    const std::string order = doc.value("allocation_order", std::string("largest_first"));
    if (order == "largest_first") {
      c.allocation_order = AllocationOrder::kLargestFirst;
    } else if (order == "roster") {
      c.allocation_order = AllocationOrder::kRosterOrder;
    } else {
      throw Error(ErrorKind::kConfig, "allocation_order must be 'largest_first' or 'roster'");
    }
    const json validation = doc.value("validation", json::object());
    c.tolerance = validation.value("tolerance", c.tolerance);
    c.strict = validation.value("strict", c.strict);
    c.workers = doc.value("workers", c.workers);
    c.persons = ParseStage(doc.value("persons", json()));
    c.households = ParseStage(doc.value("households", json()));
    if (c.person_tables.empty()) throw Error(ErrorKind::kConfig, "no person tables configured");
    if (c.persons.objectives.empty()) throw Error(ErrorKind::kConfig, "no person objectives configured");
    if (c.target_persons <= 0) throw Error(ErrorKind::kConfig, "targets.persons must be positive");
    if (!(c.tolerance >= 0)) throw Error(ErrorKind::kConfig, "validation tolerance must be >= 0");
    c.persons.evolution.Validate();
    if (!c.household_tables.empty()) {
      if (c.target_households <= 0) {
        throw Error(ErrorKind::kConfig, "targets.households must be positive");
      }
      c.households.evolution.Validate();
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::Load(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) Fail(ErrorKind::kConfig, "missing config file: " + path.string());
  json doc;
  try {
    doc = json::parse(detail::ReadFile(path));
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kConfig, "config " + path.string() + ": " + e.what());
  }
  return FromJson(doc, fs::absolute(path).parent_path());
}

json RunConfig::Snapshot() const {
  json doc = {
      {"region_id", region_id},
      {"schema", schema.string()},
      {"person_tables", TablesJson(person_tables)},
      {"household_tables", TablesJson(household_tables)},
      {"person_rules", person_rules ? json(person_rules->string()) : json(nullptr)},
      {"household_rules", household_rules ? json(household_rules->string()) : json(nullptr)},
      {"targets", {{"persons", target_persons}, {"households", target_households}}},
      {"age_attribute", age_attribute},
      {"composition_attribute", composition_attribute},
      {"size_attribute", size_attribute},
      {"allocation_order",
       allocation_order == AllocationOrder::kLargestFirst ? "largest_first" : "roster"},
      {"validation", {{"tolerance", tolerance}, {"strict", strict}}},
      {"persons", StageJson(persons)},
      {"households", StageJson(households)},
  };
  return doc;
}

void RunConfig::CheckPaths() const {
  std::error_code ec;
  auto check = [&](const fs::path& p) {
    if (!fs::is_regular_file(p, ec)) Fail(ErrorKind::kConfig, "missing input file: " + p.string());
  };
  check(schema);
  for (const auto& t : person_tables) check(t.path);
  for (const auto& t : household_tables) check(t.path);
  if (person_rules) check(*person_rules);
  if (household_rules) check(*household_rules);
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  config_.CheckPaths();
  SchemaFile schemas = LoadSchemaFile(config_.schema);
  dataset_.region_id = config_.region_id;
  dataset_.person_schema = std::move(schemas.persons);
  dataset_.household_schema = std::move(schemas.households);
  dataset_.person_tables = LoadTables(config_.person_tables, dataset_.person_schema);
  dataset_.household_tables = LoadTables(config_.household_tables, dataset_.household_schema);
  dataset_.target_persons = config_.target_persons;
  dataset_.target_households = config_.target_households;
  dataset_.Check();
  if (config_.person_rules) person_rules_ = LoadRules(*config_.person_rules, dataset_.person_schema);
  if (config_.household_rules) {
    household_rules_ = LoadRules(*config_.household_rules, dataset_.household_schema);
  }
}

EntityModel Pipeline::PersonModel() const {
  EntityModel m;
  m.schema = dataset_.person_schema;
  m.sampling = MakeSamplingPlan(m.schema, dataset_.person_tables, config_.persons.weight_sources,
                                config_.persons.joint_table);
  m.rules = person_rules_;
  m.max_retries = config_.persons.evolution.max_retries;
  return m;
}

EntityModel Pipeline::HouseholdModel() const {
  if (dataset_.household_tables.empty()) Fail(ErrorKind::kConfig, "no household tables configured");
  EntityModel m;
  m.schema = dataset_.household_schema;
  m.sampling = MakeSamplingPlan(m.schema, dataset_.household_tables,
                                config_.households.weight_sources, config_.households.joint_table);
  m.rules = household_rules_;
  m.max_retries = config_.households.evolution.max_retries;
  return m;
}

void Pipeline::EnsureOutputDir() const {
  std::error_code ec;
  fs::create_directories(config_.output_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create output directory " + config_.output_dir.string());
}

ValidationReport Pipeline::ValidateData() {
  EnsureOutputDir();
  ValidationReport report = ValidateDataset(dataset_, config_.tolerance);
  detail::WriteFile(Out("validation_report.txt"), report.ToText());
  if (config_.strict && report.flag_count() > 0) {
    Fail(ErrorKind::kData, std::to_string(report.flag_count()) +
                               " validation flag(s) in strict mode; see " +
                               Out("validation_report.txt").string());
  }
  return report;
}

namespace {

StageResult RunStage(const EntityModel& model, const Evaluator& evaluator, std::size_t roster,
                     EvolutionConfig evolution, std::size_t workers, const std::string& stage,
                     const StageProgressFn& progress) {
  evolution.workers = workers;
  ProgressFn fn;
  if (progress) fn = [&](const GenerationRecord& r) { progress(stage, r); };
  StageResult result{Evolve(model, evaluator, roster, evolution, fn), 0, evaluator.names(),
                     evaluator.weights()};
  result.selected = SelectBest(result.evolution.archive, result.weights);
  return result;
}

}  // namespace

void Pipeline::GeneratePersons() {
  EnsureOutputDir();
  const EntityModel model = PersonModel();
  const Evaluator evaluator(model.schema, dataset_.person_tables, config_.persons.objectives);
  persons_ = RunStage(model, evaluator, static_cast<std::size_t>(config_.target_persons),
                      config_.persons.evolution, config_.workers, "persons", progress_);
  selected_persons_ = persons_->selected_member().candidate;
  ExportConvergence(persons_->evolution.history, Out("convergence_persons.csv"));
  SaveArchive(persons_->evolution.archive, persons_->objective_names, model.schema,
              Out("persons_archive.bin"));
  ExportPersonStage();
}

void Pipeline::ExportPersonStage() {
  ExportPersons(*selected_persons_, dataset_.person_schema, Out("persons.csv"));
  ExportParetoPairs(persons_->evolution.archive, persons_->objective_names, persons_->selected,
                    Out("pareto_persons.csv"));
  const auto rows = RmseSummary(*selected_persons_, dataset_.person_schema, dataset_.person_tables);
  detail::WriteFile(Out("rmse_summary.csv"), RmseCsv(rows));
}

void Pipeline::GenerateHouseholds() {
  EnsureOutputDir();
  if (!selected_persons_) {
    selected_persons_ = std::make_shared<CandidatePopulation>(
        LoadPersons(Out("persons.csv"), dataset_.person_schema));
  }
  const EntityModel model = HouseholdModel();
  const Evaluator evaluator(model.schema, dataset_.household_tables, config_.households.objectives);
  households_ = RunStage(model, evaluator, static_cast<std::size_t>(config_.target_households),
                         config_.households.evolution, config_.workers, "households", progress_);
  selected_households_ = households_->selected_member().candidate;
  ExportConvergence(households_->evolution.history, Out("convergence_households.csv"));
  SaveArchive(households_->evolution.archive, households_->objective_names, model.schema,
              Out("households_archive.bin"));
  ExportHouseholdStage();
}

void Pipeline::ExportHouseholdStage() {
  const auto& hschema = dataset_.household_schema;
  const std::size_t composition = hschema.IndexOf(config_.composition_attribute);
  const std::size_t size = hschema.Find(config_.size_attribute).value_or(static_cast<std::size_t>(-1));
  allocation_ = Allocate(*selected_persons_, dataset_.person_schema,
                         dataset_.person_schema.IndexOf(config_.age_attribute),
                         *selected_households_, hschema, composition, config_.allocation_order);
  ExportHouseholds(*allocation_, *selected_households_, hschema, composition, size,
                   Out("households.csv"));
  ExportParetoPairs(households_->evolution.archive, households_->objective_names,
                    households_->selected, Out("pareto_households.csv"));
}

void Pipeline::Run() {
  ValidateData();
  GeneratePersons();
  if (!dataset_.household_tables.empty()) GenerateHouseholds();
  WriteManifest();
}

void Pipeline::Report() {
  EnsureOutputDir();
  auto reload = [&](const char* file, const AttributeSchema& schema, const StageConfig& stage) {
    LoadedArchive loaded = LoadArchive(Out(file), schema);
    if (loaded.archive.empty()) Fail(ErrorKind::kData, std::string(file) + ": empty archive");
    StageResult r;
    r.evolution.archive = std::move(loaded.archive);
    r.objective_names = std::move(loaded.objective_names);
    for (const auto& o : stage.objectives) r.weights.push_back(o.weight);
    r.selected = SelectBest(r.evolution.archive, r.weights);
    return r;
  };
  persons_ = reload("persons_archive.bin", dataset_.person_schema, config_.persons);
  selected_persons_ = persons_->selected_member().candidate;
  ExportPersonStage();
  std::error_code ec;
  if (!dataset_.household_tables.empty() && fs::exists(Out("households_archive.bin"), ec)) {
    households_ = reload("households_archive.bin", dataset_.household_schema, config_.households);
    selected_households_ = households_->selected_member().candidate;
    ExportHouseholdStage();
  }
  WriteManifest();
}

namespace {

json StageManifest(const StageResult& r) {
  const auto normalized = NormalizeObjectives(r.evolution.archive.objectives());
  const auto& member = r.selected_member();
  json objectives = json::array();
  for (std::size_t i = 0; i < r.objective_names.size(); ++i) {
    objectives.push_back({{"name", r.objective_names[i]},
                          {"weight", r.weights[i]},
                          {"raw", member.objectives[i]},
                          {"normalized", normalized[r.selected][i]}});
  }
  json out = {{"selected_member", member.id},
              {"archive_size", r.evolution.archive.size()},
              {"objectives", std::move(objectives)}};
  const auto& records = r.evolution.history.records;
  if (!records.empty()) {
    out["generations_run"] = records.back().generation;
    out["initial_best_normalized"] = records.front().best_normalized;
    out["final_best_normalized"] = records.back().best_normalized;
  }
  return out;
}

json FileEntry(const fs::path& p) {
  return {{"path", p.string()}, {"fnv1a64", detail::Fingerprint(detail::ReadFile(p))}};
}

}  // namespace

void Pipeline::WriteManifest() const {
  json inputs = {{"schema", FileEntry(config_.schema)}};
  json tables = json::array();
  for (const auto& t : config_.person_tables) tables.push_back(FileEntry(t.path));
  for (const auto& t : config_.household_tables) tables.push_back(FileEntry(t.path));
  inputs["tables"] = std::move(tables);
  if (config_.person_rules) inputs["person_rules"] = FileEntry(*config_.person_rules);
  if (config_.household_rules) inputs["household_rules"] = FileEntry(*config_.household_rules);

  json manifest = {{"manifest_version", kManifestVersion},
                   {"region_id", config_.region_id},
                   {"config", config_.Snapshot()},
                   {"seeds",
                    {{"persons", config_.persons.evolution.seed},
                     {"households", config_.households.evolution.seed}}},
                   {"inputs", std::move(inputs)},
                   {"timings_file", "timings.json"}};
  json timings = json::object();
  if (persons_) {
    manifest["persons"] = StageManifest(*persons_);
    std::vector<double> t;
    for (const auto& r : persons_->evolution.history.records) t.push_back(r.elapsed_seconds);
    timings["persons_seconds_per_generation"] = t;
  }
  if (households_) {
    manifest["households"] = StageManifest(*households_);
    std::vector<double> t;
    for (const auto& r : households_->evolution.history.records) t.push_back(r.elapsed_seconds);
    timings["households_seconds_per_generation"] = t;
  }
  if (allocation_) {
    manifest["allocation"] = {{"households", allocation_->households.size()},
                              {"complete", allocation_->complete_count},
                              {"complete_rate", allocation_->complete_rate()},
                              {"unallocated_persons", allocation_->unallocated.size()}};
  }
  if (selected_persons_) {
    json rmse = json::array();
    for (const auto& row :
         RmseSummary(*selected_persons_, dataset_.person_schema, dataset_.person_tables)) {
      rmse.push_back({{"attribute", row.attribute}, {"level", row.level}, {"rmse", row.rmse}});
    }
    manifest["rmse"] = std::move(rmse);
  }
  json outputs = json::object();
  for (const char* f : {"persons.csv", "households.csv", "convergence_persons.csv",
                        "convergence_households.csv", "pareto_persons.csv",
                        "pareto_households.csv", "rmse_summary.csv"}) {
    std::error_code ec;
    if (fs::exists(Out(f), ec)) outputs[f] = detail::Fingerprint(detail::ReadFile(Out(f)));
  }
  manifest["outputs"] = std::move(outputs);
  detail::WriteFile(Out("manifest.json"), manifest.dump(2) + "\n");
  detail::WriteFile(Out("timings.json"), timings.dump(2) + "\n");
}

}  // namespace synpop
