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

// Attribute schemas, contingency tables and the marginal frequency vectors
// derived from them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace synpop {

inline constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);

// One categorical attribute. Category order is canonical: it fixes the
// layout of frequency vectors and the x-axis of trapezoid integration.
struct AttributeDescriptor {
  std::string name;
  std::vector<std::string> categories;
  // Coarse groups in order of first appearance along `categories`, and the
  // group index of each category (kNoGroup when a category is unmapped).
  std::vector<std::string> groups;
  std::vector<std::size_t> group_of;

  std::size_t size() const { return categories.size(); }
  bool has_grouping() const { return !groups.empty(); }
  std::optional<std::size_t> FindCategory(std::string_view code) const;
};

class AttributeSchema {
 public:
  AttributeSchema() = default;
  // Throws Error(kData) on duplicate names, duplicate codes, empty category
  // lists or grouping keys that are not declared categories.
  explicit AttributeSchema(std::vector<AttributeDescriptor> attributes);

  std::size_t size() const { return attributes_.size(); }
  const AttributeDescriptor& attribute(std::size_t i) const { return attributes_.at(i); }
  const std::vector<AttributeDescriptor>& attributes() const { return attributes_; }

  std::optional<std::size_t> Find(std::string_view name) const;
  // Like Find but throws Error(kData) naming the attribute.
  std::size_t IndexOf(std::string_view name) const;

 private:
  std::vector<AttributeDescriptor> attributes_;
};

// {"attributes": [{"name": ..., "categories": [...], "grouping": {code: group}}]}
AttributeSchema ParseSchema(const nlohmann::json& doc);

// A schema file carries one schema per entity kind.
struct SchemaFile {
  AttributeSchema persons;
  AttributeSchema households;
};
SchemaFile LoadSchemaFile(const std::filesystem::path& path);

// Observed joint counts over 1-3 attributes, stored densely in row-major
// order over the axes' category lists.
class ContingencyTable {
 public:
  ContingencyTable(std::string name, std::vector<std::string> axes,
                   std::vector<std::size_t> extents, std::vector<std::int64_t> cells);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& axes() const { return axes_; }
  const std::vector<std::size_t>& extents() const { return extents_; }
  const std::vector<std::int64_t>& cells() const { return cells_; }
  std::int64_t total() const { return total_; }

  std::optional<std::size_t> AxisOf(std::string_view attribute) const;
  std::size_t CellIndex(std::span<const std::size_t> coordinates) const;
  std::int64_t count(std::span<const std::size_t> coordinates) const {
    return cells_[CellIndex(coordinates)];
  }

 private:
  std::string name_;
  std::vector<std::string> axes_;
  std::vector<std::size_t> extents_;
  std::vector<std::int64_t> cells_;
  std::int64_t total_ = 0;
};

// Counts aligned with an attribute's category order.
struct FrequencyVector {
  std::string attribute;
  std::vector<double> values;

  double sum() const;
};

// Reads a table CSV: header = axis attribute names then `count`, one row per
// cell. Cells not listed are zero. Rows may appear in any order; a repeated
// cell is an error.
ContingencyTable LoadContingencyTable(const std::filesystem::path& path,
                                      const AttributeSchema& schema, std::string name);
ContingencyTable ParseContingencyTable(std::string_view csv_text,
                                       const AttributeSchema& schema, std::string name);

FrequencyVector Marginalize(const ContingencyTable& table, std::string_view attribute);

// Normalizes a frequency vector to a probability vector.
std::vector<double> AttributeWeights(const FrequencyVector& vector);

struct RegionDataset {
  std::string region_id;
  AttributeSchema person_schema;
  AttributeSchema household_schema;
  std::vector<ContingencyTable> person_tables;
  std::vector<ContingencyTable> household_tables;
  std::int64_t target_persons = 0;
  std::int64_t target_households = 0;

  // Throws Error(kData) if an invariant does not hold.
  void Check() const;
};

const ContingencyTable* FindTable(std::span<const ContingencyTable> tables, std::string_view name);
// First table (in declaration order) that has `attribute` as an axis.
const ContingencyTable* FirstTableWith(std::span<const ContingencyTable> tables,
                                       std::string_view attribute);

struct TableDiscrepancy {
  std::string attribute;
  std::string table_a;
  std::string table_b;
  std::int64_t total_a = 0;
  std::int64_t total_b = 0;
  double discrepancy = 0.0;  // |total_a - total_b| / max(total_a, total_b)
  bool flagged = false;
};

struct TargetCheck {
  std::string table;
  std::string entity;  // "persons" or "households"
  std::int64_t table_total = 0;
  std::int64_t target = 0;
  double discrepancy = 0.0;  // |table_total - target| / target
  bool flagged = false;
};

struct ValidationReport {
  double tolerance = 0.0;
  std::vector<TableDiscrepancy> discrepancies;
  std::vector<TargetCheck> targets;

  std::size_t flag_count() const;
  std::string ToText() const;
};

ValidationReport ValidateDataset(const RegionDataset& dataset, double tolerance);

}  // namespace synpop
