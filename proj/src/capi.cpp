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

#include "synpop/synpop.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "synpop/error.hpp"
#include "synpop/fitness.hpp"
#include "synpop/household_synthesis.hpp"
#include "synpop/pipeline.hpp"

struct synpop_config {
  synpop::RunConfig config;
};

struct synpop_pipeline {
  explicit synpop_pipeline(synpop::RunConfig c) : pipeline(std::move(c)) {}
  synpop::Pipeline pipeline;
  synpop_progress_fn progress = nullptr;
  void* progress_user = nullptr;
};

namespace {

thread_local std::string g_last_error;

synpop_status StatusOf(synpop::ErrorKind kind) {
  switch (kind) {
    case synpop::ErrorKind::kConfig: return SYNPOP_ERROR_CONFIG;
    case synpop::ErrorKind::kData: return SYNPOP_ERROR_DATA;
    case synpop::ErrorKind::kEvolution: return SYNPOP_ERROR_EVOLUTION;
    case synpop::ErrorKind::kIo: return SYNPOP_ERROR_IO;
  }
  return SYNPOP_ERROR_INTERNAL;
}

synpop_status Invalid(const char* message) {
  g_last_error = message;
  return SYNPOP_ERROR_INVALID_ARGUMENT;
}

template <typename Fn>
synpop_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SYNPOP_OK;
  } catch (const synpop::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SYNPOP_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SYNPOP_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SYNPOP_ERROR_INTERNAL;
  }
}

template <typename Kernel>
synpop_status RunKernel(Kernel kernel, const double* actual, const double* observed, size_t n,
                        double* out) {
  if ((!actual || !observed) && n > 0) return Invalid("null input array");
  if (!out) return Invalid("null output pointer");
  return Guard([&] {
    *out = kernel(std::span<const double>(actual, n), std::span<const double>(observed, n));
  });
}

}  // namespace

extern "C" {

const char* synpop_version(void) { return "1.0.0"; }

const char* synpop_last_error(void) { return g_last_error.c_str(); }

const char* synpop_status_name(synpop_status status) {
  switch (status) {
    case SYNPOP_OK: return "ok";
    case SYNPOP_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case SYNPOP_ERROR_CONFIG: return "config error";
    case SYNPOP_ERROR_DATA: return "data error";
    case SYNPOP_ERROR_EVOLUTION: return "evolution error";
    case SYNPOP_ERROR_IO: return "i/o error";
    case SYNPOP_ERROR_INTERNAL: return "internal error";
  }
  return "unknown";
}

synpop_status synpop_config_load(const char* path, synpop_config** out) {
  if (!path || !out) return Invalid("null argument");
  *out = nullptr;
  return Guard([&] {
    auto config = std::make_unique<synpop_config>(synpop_config{synpop::RunConfig::Load(path)});
    *out = config.release();
  });
}

void synpop_config_free(synpop_config* config) { delete config; }

synpop_status synpop_config_set_seed(synpop_config* config, uint64_t seed) {
  if (!config) return Invalid("null config");
  config->config.persons.evolution.seed = seed;
  config->config.households.evolution.seed = seed;
  return SYNPOP_OK;
}

synpop_status synpop_config_set_generations(synpop_config* config, size_t generations) {
  if (!config) return Invalid("null config");
  config->config.persons.evolution.generations = generations;
  config->config.households.evolution.generations = generations;
  return SYNPOP_OK;
}

synpop_status synpop_config_set_population_size(synpop_config* config, size_t size) {
  if (!config) return Invalid("null config");
  return Guard([&] {
    auto persons = config->config.persons.evolution;
    auto households = config->config.households.evolution;
    persons.population_size = size;
    households.population_size = size;
    persons.Validate();
    households.Validate();
    config->config.persons.evolution = persons;
    config->config.households.evolution = households;
  });
}

synpop_status synpop_config_set_workers(synpop_config* config, size_t workers) {
  if (!config) return Invalid("null config");
  if (workers == 0) return Invalid("workers must be at least 1");
  config->config.workers = workers;
  return SYNPOP_OK;
}

synpop_status synpop_config_set_output_dir(synpop_config* config, const char* path) {
  if (!config || !path) return Invalid("null argument");
  return Guard([&] {
    config->config.output_dir = std::filesystem::absolute(path).lexically_normal();
  });
}

synpop_status synpop_config_output_dir(const synpop_config* config, char* buf, size_t buf_size) {
  if (!config || !buf || buf_size == 0) return Invalid("null argument");
  const std::string s = config->config.output_dir.string();
  const size_t n = std::min(s.size(), buf_size - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  return SYNPOP_OK;
}

synpop_status synpop_pipeline_create(const synpop_config* config, synpop_pipeline** out) {
  if (!config || !out) return Invalid("null argument");
  *out = nullptr;
  return Guard([&] {
    auto p = std::make_unique<synpop_pipeline>(config->config);
    *out = p.release();
  });
}

void synpop_pipeline_free(synpop_pipeline* pipeline) { delete pipeline; }

synpop_status synpop_pipeline_set_progress(synpop_pipeline* pipeline, synpop_progress_fn fn,
                                           void* user) {
  if (!pipeline) return Invalid("null pipeline");
  pipeline->progress = fn;
  pipeline->progress_user = user;
  if (!fn) {
    pipeline->pipeline.set_progress({});
  } else {
    pipeline->pipeline.set_progress(
        [pipeline](const std::string& stage, const synpop::GenerationRecord& r) {
          pipeline->progress(pipeline->progress_user, stage.c_str(), r.generation,
                             r.best_normalized.data(), r.best_normalized.size(),
                             r.elapsed_seconds);
        });
  }
  return SYNPOP_OK;
}

synpop_status synpop_pipeline_validate(synpop_pipeline* pipeline, size_t* flag_count) {
  if (!pipeline) return Invalid("null pipeline");
  return Guard([&] {
    if (flag_count) *flag_count = 0;
    const auto report = pipeline->pipeline.ValidateData();
    if (flag_count) *flag_count = report.flag_count();
  });
}

synpop_status synpop_pipeline_generate_persons(synpop_pipeline* pipeline) {
  if (!pipeline) return Invalid("null pipeline");
  return Guard([&] { pipeline->pipeline.GeneratePersons(); });
}

synpop_status synpop_pipeline_generate_households(synpop_pipeline* pipeline) {
  if (!pipeline) return Invalid("null pipeline");
  return Guard([&] { pipeline->pipeline.GenerateHouseholds(); });
}

synpop_status synpop_pipeline_run(synpop_pipeline* pipeline) {
  if (!pipeline) return Invalid("null pipeline");
  return Guard([&] { pipeline->pipeline.Run(); });
}

synpop_status synpop_pipeline_report(synpop_pipeline* pipeline) {
  if (!pipeline) return Invalid("null pipeline");
  return Guard([&] { pipeline->pipeline.Report(); });
}

synpop_status synpop_pipeline_complete_rate(const synpop_pipeline* pipeline, double* rate) {
  if (!pipeline || !rate) return Invalid("null argument");
  const auto& allocation = pipeline->pipeline.allocation();
  if (!allocation) return Invalid("household stage has not run");
  *rate = allocation->complete_rate();
  return SYNPOP_OK;
}

synpop_status synpop_l1_objective(const double* actual, const double* observed, size_t n,
                                  double* out) {
  return RunKernel([](auto a, auto b) { return synpop::L1Objective(a, b); }, actual, observed, n,
                   out);
}

synpop_status synpop_trapezoid_area(const double* actual, const double* observed, size_t n,
                                    double* out) {
  return RunKernel([](auto a, auto b) { return synpop::TrapezoidArea(a, b); }, actual, observed,
                   n, out);
}

synpop_status synpop_rmse(const double* actual, const double* observed, size_t n, double* out) {
  return RunKernel([](auto a, auto b) { return synpop::Rmse(a, b); }, actual, observed, n, out);
}

synpop_status synpop_parse_composition(const char* code, int* adults, int* children, int* elders,
                                       int* total) {
  if (!code) return Invalid("null code");
  return Guard([&] {
    const auto spec = synpop::ParseComposition(code);
    if (adults) *adults = spec.count(synpop::AgeClass::kAdult);
    if (children) *children = spec.count(synpop::AgeClass::kChild);
    if (elders) *elders = spec.count(synpop::AgeClass::kElder);
    if (total) *total = spec.total;
  });
}

}  // extern "C"
