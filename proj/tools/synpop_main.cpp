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

// Command-line driver. Talks to the engine only through the C API.

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "synpop/synpop.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> generations;
  std::optional<std::size_t> population_size;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

int ExitCode(synpop_status status) {
  switch (status) {
    case SYNPOP_OK: return 0;
    case SYNPOP_ERROR_EVOLUTION: return 2;
    case SYNPOP_ERROR_IO: return 3;
    default: return 1;
  }
}

int Report(synpop_status status, const char* what) {
  if (status != SYNPOP_OK) {
    std::fprintf(stderr, "synpop: %s failed (%s): %s\n", what, synpop_status_name(status),
                 synpop_last_error());
  }
  return ExitCode(status);
}

void PrintProgress(void*, const char* stage, size_t generation, const double* best, size_t count,
                   double elapsed) {
  std::printf("%s gen %zu best", stage, generation);
  for (size_t i = 0; i < count; ++i) std::printf(" %.6g", best[i]);
  std::printf(" elapsed %.3fs\n", elapsed);
  std::fflush(stdout);
}

struct ConfigHandle {
  synpop_config* ptr = nullptr;
  ~ConfigHandle() { synpop_config_free(ptr); }
};

struct PipelineHandle {
  synpop_pipeline* ptr = nullptr;
  ~PipelineHandle() { synpop_pipeline_free(ptr); }
};

int Execute(const std::string& command, const Options& o) {
  ConfigHandle config;
  synpop_status s = synpop_config_load(o.config.c_str(), &config.ptr);
  if (s != SYNPOP_OK) return Report(s, "loading config");
  if (o.seed) s = synpop_config_set_seed(config.ptr, *o.seed);
  if (s == SYNPOP_OK && o.generations) s = synpop_config_set_generations(config.ptr, *o.generations);
  if (s == SYNPOP_OK && o.population_size) {
    s = synpop_config_set_population_size(config.ptr, *o.population_size);
  }
  if (s == SYNPOP_OK && o.workers) s = synpop_config_set_workers(config.ptr, *o.workers);
  if (s == SYNPOP_OK && o.out_dir) s = synpop_config_set_output_dir(config.ptr, o.out_dir->c_str());
  if (s != SYNPOP_OK) return Report(s, "applying overrides");

  PipelineHandle pipeline;
  s = synpop_pipeline_create(config.ptr, &pipeline.ptr);
  if (s != SYNPOP_OK) return Report(s, "loading data");
  if (!o.quiet) synpop_pipeline_set_progress(pipeline.ptr, PrintProgress, nullptr);

  if (command == "validate-data") {
    size_t flags = 0;
    s = synpop_pipeline_validate(pipeline.ptr, &flags);
    if (s == SYNPOP_OK) std::printf("validation: %zu flag(s)\n", flags);
  } else if (command == "generate-persons") {
    s = synpop_pipeline_generate_persons(pipeline.ptr);
  } else if (command == "generate-households") {
    s = synpop_pipeline_generate_households(pipeline.ptr);
  } else if (command == "run") {
    s = synpop_pipeline_run(pipeline.ptr);
    double rate = 0.0;
    if (s == SYNPOP_OK && synpop_pipeline_complete_rate(pipeline.ptr, &rate) == SYNPOP_OK) {
      std::printf("households complete: %.2f%%\n", 100.0 * rate);
    }
  } else if (command == "report") {
    s = synpop_pipeline_report(pipeline.ptr);
  }
  return Report(s, command.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic population generation by multi-objective evolutionary search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", synpop_version());

  Options options;
  const char* commands[][2] = {
      {"validate-data", "Check table consistency and write validation_report.txt"},
      {"generate-persons", "Evolve and export the person population"},
      {"generate-households", "Evolve households and allocate persons from persons.csv"},
      {"run", "Full pipeline: validate, persons, households, manifest"},
      {"report", "Re-select and re-export from saved archives"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", options.config, "Run config (or manifest) file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", options.seed, "Master seed for both stages");
    sub->add_option("--generations", options.generations, "Generations for both stages");
    sub->add_option("--population-size", options.population_size, "GA population size");
    sub->add_option("--workers", options.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", options.out_dir, "Output directory");
    sub->add_flag("-q,--quiet", options.quiet, "No per-generation progress lines");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return Execute(app.get_subcommands().front()->get_name(), options);
}
