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

#include "synpop/census_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "csv_util.hpp"
#include "io_util.hpp"
#include "synpop/error.hpp"

namespace synpop {

std::optional<std::size_t> AttributeDescriptor::FindCategory(std::string_view code) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == code) return i;
  }
  return std::nullopt;
}

AttributeSchema::AttributeSchema(std::vector<AttributeDescriptor> attributes)
    : attributes_(std::move(attributes)) {
  std::set<std::string> names;
  for (auto& a : attributes_) {
    if (a.name.empty()) Fail(ErrorKind::kData, "schema: attribute with empty name");
    if (!names.insert(a.name).second) {
      Fail(ErrorKind::kData, "schema: duplicate attribute '" + a.name + "'");
    }
    if (a.categories.empty()) {
      Fail(ErrorKind::kData, "schema: attribute '" + a.name + "' has no categories");
    }
    if (a.categories.size() > 0xffff) {
      Fail(ErrorKind::kData, "schema: attribute '" + a.name + "' has too many categories");
    }
    std::set<std::string> codes;
    for (const auto& c : a.categories) {
      if (c.empty() || c.find(',') != std::string::npos) {
        Fail(ErrorKind::kData, "schema: invalid category code '" + c + "' in '" + a.name + "'");
      }
      if (!codes.insert(c).second) {
        Fail(ErrorKind::kData, "schema: duplicate category '" + c + "' in '" + a.name + "'");
      }
    }
    if (a.group_of.empty()) a.group_of.assign(a.categories.size(), kNoGroup);
    if (a.group_of.size() != a.categories.size()) {
      Fail(ErrorKind::kData, "schema: grouping of '" + a.name + "' does not cover its categories");
    }
    for (std::size_t g : a.group_of) {
      if (g != kNoGroup && g >= a.groups.size()) {
        Fail(ErrorKind::kData, "schema: bad group index in '" + a.name + "'");
      }
    }
  }
}

std::optional<std::size_t> AttributeSchema::Find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t AttributeSchema::IndexOf(std::string_view name) const {
  auto i = Find(name);
  if (!i) Fail(ErrorKind::kData, "unknown attribute '" + std::string(name) + "'");
  return *i;
}

AttributeSchema ParseSchema(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
    Fail(ErrorKind::kData, "schema: expected an object with an 'attributes' array");
  }
  std::vector<AttributeDescriptor> out;
  for (const auto& item : doc["attributes"]) {
    AttributeDescriptor a;
    try {
      a.name = item.at("name").get<std::string>();
      a.categories = item.at("categories").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorKind::kData, std::string("schema: bad attribute entry: ") + e.what());
    }
    a.group_of.assign(a.categories.size(), kNoGroup);
    if (item.contains("grouping")) {
      const auto& grouping = item["grouping"];
      if (!grouping.is_object()) {
        Fail(ErrorKind::kData, "schema: grouping of '" + a.name + "' must be an object");
      }
      for (const auto& [code, group] : grouping.items()) {
        auto c = a.FindCategory(code);
        if (!c) {
          Fail(ErrorKind::kData,
               "schema: grouping key '" + code + "' is not a category of '" + a.name + "'");
        }
        if (!group.is_string()) {
          Fail(ErrorKind::kData, "schema: group of '" + code + "' must be a string");
        }
        (void)c;
      }
      // Group order follows category order, not the (sorted) key order.
      for (std::size_t c = 0; c < a.categories.size(); ++c) {
        if (!grouping.contains(a.categories[c])) continue;
        const auto g = grouping[a.categories[c]].get<std::string>();
        auto it = std::find(a.groups.begin(), a.groups.end(), g);
        if (it == a.groups.end()) {
          a.groups.push_back(g);
          it = a.groups.end() - 1;
        }
        a.group_of[c] = static_cast<std::size_t>(it - a.groups.begin());
      }
    }
    out.push_back(std::move(a));
  }
  return AttributeSchema(std::move(out));
}

SchemaFile LoadSchemaFile(const std::filesystem::path& path) {
  const std::string text = detail::ReadFile(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorKind::kData, "schema " + path.string() + ": " + e.what());
  }
  if (!doc.contains("persons")) {
    Fail(ErrorKind::kData, "schema " + path.string() + ": missing 'persons' section");
  }
  SchemaFile file;
  file.persons = ParseSchema(doc["persons"]);
  if (doc.contains("households")) file.households = ParseSchema(doc["households"]);
  return file;
}

ContingencyTable::ContingencyTable(std::string name, std::vector<std::string> axes,
                                   std::vector<std::size_t> extents,
                                   std::vector<std::int64_t> cells)
    : name_(std::move(name)),
      axes_(std::move(axes)),
      extents_(std::move(extents)),
      cells_(std::move(cells)) {
  if (axes_.empty() || axes_.size() > 3) {
    Fail(ErrorKind::kData, "table '" + name_ + "': expected 1-3 axes");
  }
  if (axes_.size() != extents_.size()) {
    Fail(ErrorKind::kData, "table '" + name_ + "': axes/extents mismatch");
  }
  const std::size_t expected = std::accumulate(extents_.begin(), extents_.end(), std::size_t{1},
                                                std::multiplies<>());
  if (cells_.size() != expected) {
    Fail(ErrorKind::kData, "table '" + name_ + "': cell count does not match extents");
  }
  bool positive = false;
  for (auto c : cells_) {
    if (c < 0) Fail(ErrorKind::kData, "table '" + name_ + "': negative count");
    positive = positive || c > 0;
    total_ += c;
  }
  if (!positive) Fail(ErrorKind::kData, "table '" + name_ + "': no positive cell");
}

std::optional<std::size_t> ContingencyTable::AxisOf(std::string_view attribute) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i] == attribute) return i;
  }
  return std::nullopt;
}

std::size_t ContingencyTable::CellIndex(std::span<const std::size_t> coordinates) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < extents_.size(); ++i) index = index * extents_[i] + coordinates[i];
  return index;
}

double FrequencyVector::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

ContingencyTable ParseContingencyTable(std::string_view csv_text, const AttributeSchema& schema,
                                       std::string name) {
  const auto lines = detail::SplitLines(csv_text);
  if (lines.empty()) Fail(ErrorKind::kData, "table '" + name + "': empty file");

  auto header = detail::SplitRecord(lines.front().text);
  if (!header.empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header.front().erase(0, 3);
  }
  if (header.size() < 2 || header.back() != "count") {
    Fail(ErrorKind::kData, "table '" + name + "': header must list axes then 'count'");
  }
  header.pop_back();
  if (header.size() > 3) Fail(ErrorKind::kData, "table '" + name + "': more than 3 axes");

  std::vector<std::size_t> attr(header.size());
  std::vector<std::size_t> extents(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto a = schema.Find(header[i]);
    if (!a) {
      Fail(ErrorKind::kData, "table '" + name + "': unknown attribute '" + header[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (attr[j] == *a) Fail(ErrorKind::kData, "table '" + name + "': repeated axis");
    }
    attr[i] = *a;
    extents[i] = schema.attribute(*a).size();
  }
  const std::size_t cell_count =
      std::accumulate(extents.begin(), extents.end(), std::size_t{1}, std::multiplies<>());
  std::vector<std::int64_t> cells(cell_count, 0);
  std::vector<bool> seen(cell_count, false);

  std::vector<std::size_t> coords(header.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& line = lines[r];
    const auto fields = detail::SplitRecord(line.text);
    const std::string where = "table '" + name + "' line " + std::to_string(line.number);
    if (fields.size() != header.size() + 1) Fail(ErrorKind::kData, where + ": malformed row");
    for (std::size_t i = 0; i < header.size(); ++i) {
      auto c = schema.attribute(attr[i]).FindCategory(fields[i]);
      if (!c) {
        Fail(ErrorKind::kData, where + ": unknown category '" + fields[i] + "' for '" +
                                   header[i] + "'");
      }
      coords[i] = *c;
    }
    const std::string& count_text = fields.back();
    std::int64_t count = 0;
    auto [end, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || end != count_text.data() + count_text.size()) {
      Fail(ErrorKind::kData, where + ": malformed count '" + count_text + "'");
    }
    if (count < 0) Fail(ErrorKind::kData, where + ": negative count");
    std::size_t index = 0;
    for (std::size_t i = 0; i < extents.size(); ++i) index = index * extents[i] + coords[i];
    if (seen[index]) Fail(ErrorKind::kData, where + ": duplicate cell");
    seen[index] = true;
    cells[index] = count;
  }
  if (std::none_of(cells.begin(), cells.end(), [](std::int64_t c) { return c > 0; })) {
    Fail(ErrorKind::kData, "table '" + name + "': no positive cell");
  }
  return ContingencyTable(std::move(name), std::move(header), std::move(extents), std::move(cells));
}

ContingencyTable LoadContingencyTable(const std::filesystem::path& path,
                                      const AttributeSchema& schema, std::string name) {
  return ParseContingencyTable(detail::ReadFile(path), schema, std::move(name));
}

FrequencyVector Marginalize(const ContingencyTable& table, std::string_view attribute) {
  auto axis = table.AxisOf(attribute);
  if (!axis) {
    Fail(ErrorKind::kData,
         "attribute '" + std::string(attribute) + "' is not an axis of table '" + table.name() + "'");
  }
  const auto& extents = table.extents();
  std::size_t inner = 1;
  for (std::size_t i = *axis + 1; i < extents.size(); ++i) inner *= extents[i];
  const std::size_t extent = extents[*axis];

  FrequencyVector out{std::string(attribute), std::vector<double>(extent, 0.0)};
  const auto& cells = table.cells();
  for (std::size_t index = 0; index < cells.size(); ++index) {
    out.values[(index / inner) % extent] += static_cast<double>(cells[index]);
  }
  return out;
}

std::vector<double> AttributeWeights(const FrequencyVector& vector) {
  double total = 0.0;
  for (double v : vector.values) {
    if (v < 0 || !std::isfinite(v)) {
      Fail(ErrorKind::kData, "attribute weights: invalid count for '" + vector.attribute + "'");
    }
    total += v;
  }
  if (!(total > 0)) {
    Fail(ErrorKind::kData, "attribute weights: all-zero vector for '" + vector.attribute + "'");
  }
  std::vector<double> weights(vector.values.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = vector.values[i] / total;
  return weights;
}

namespace {

void CheckTables(const std::vector<ContingencyTable>& tables, const AttributeSchema& schema,
                 const char* kind) {
  std::set<std::string> names;
  for (const auto& t : tables) {
    if (!names.insert(t.name()).second) {
      Fail(ErrorKind::kData, std::string(kind) + " table name '" + t.name() + "' is repeated");
    }
    for (std::size_t i = 0; i < t.axes().size(); ++i) {
      auto a = schema.Find(t.axes()[i]);
      if (!a) {
        Fail(ErrorKind::kData, "table '" + t.name() + "': axis '" + t.axes()[i] +
                                   "' is not in the " + kind + " schema");
      }
      if (schema.attribute(*a).size() != t.extents()[i]) {
        Fail(ErrorKind::kData, "table '" + t.name() + "': axis '" + t.axes()[i] +
                                   "' has the wrong number of categories");
      }
    }
  }
}

}  // namespace

void RegionDataset::Check() const {
  if (target_persons <= 0) Fail(ErrorKind::kData, "target person count must be positive");
  if (!household_tables.empty() && target_households <= 0) {
    Fail(ErrorKind::kData, "target household count must be positive");
  }
  CheckTables(person_tables, person_schema, "person");
  CheckTables(household_tables, household_schema, "household");
}

const ContingencyTable* FindTable(std::span<const ContingencyTable> tables, std::string_view name) {
  for (const auto& t : tables) {
    if (t.name() == name) return &t;
  }
  return nullptr;
}

const ContingencyTable* FirstTableWith(std::span<const ContingencyTable> tables,
                                       std::string_view attribute) {
  for (const auto& t : tables) {
    if (t.AxisOf(attribute)) return &t;
  }
  return nullptr;
}

std::size_t ValidationReport::flag_count() const {
  std::size_t n = 0;
  for (const auto& d : discrepancies) n += d.flagged ? 1 : 0;
  for (const auto& t : targets) n += t.flagged ? 1 : 0;
  return n;
}

std::string ValidationReport::ToText() const {
  std::ostringstream out;
  out << "tolerance " << tolerance << "\n";
  for (const auto& d : discrepancies) {
    out << (d.flagged ? "FLAG " : "ok   ") << "marginal-total attribute=" << d.attribute << " "
        << d.table_a << "=" << d.total_a << " " << d.table_b << "=" << d.total_b
        << " discrepancy=" << d.discrepancy << "\n";
  }
  for (const auto& t : targets) {
    out << (t.flagged ? "FLAG " : "ok   ") << "target-count " << t.entity << " table=" << t.table
        << " total=" << t.table_total << " target=" << t.target
        << " discrepancy=" << t.discrepancy << "\n";
  }
  out << flag_count() << " flag(s)\n";
  return out.str();
}

namespace {

void CompareTables(const std::vector<ContingencyTable>& tables, double tolerance,
                   ValidationReport& report) {
  for (std::size_t a = 0; a < tables.size(); ++a) {
    for (std::size_t b = a + 1; b < tables.size(); ++b) {
      for (const auto& axis : tables[a].axes()) {
        if (!tables[b].AxisOf(axis)) continue;
        const double ta = Marginalize(tables[a], axis).sum();
        const double tb = Marginalize(tables[b], axis).sum();
        TableDiscrepancy d;
        d.attribute = axis;
        d.table_a = tables[a].name();
        d.table_b = tables[b].name();
        d.total_a = static_cast<std::int64_t>(ta);
        d.total_b = static_cast<std::int64_t>(tb);
        d.discrepancy = std::abs(ta - tb) / std::max(ta, tb);
        d.flagged = d.discrepancy > tolerance;
        report.discrepancies.push_back(std::move(d));
      }
    }
  }
}

void CompareTargets(const std::vector<ContingencyTable>& tables, std::int64_t target,
                    const char* entity, double tolerance, ValidationReport& report) {
  for (const auto& t : tables) {
    TargetCheck c;
    c.table = t.name();
    c.entity = entity;
    c.table_total = t.total();
    c.target = target;
    c.discrepancy = target > 0 ? std::abs(static_cast<double>(t.total() - target)) /
                                     static_cast<double>(target)
                               : 1.0;
    c.flagged = c.discrepancy > tolerance;
    report.targets.push_back(std::move(c));
  }
}

}  // namespace

ValidationReport ValidateDataset(const RegionDataset& dataset, double tolerance) {
  ValidationReport report;
  report.tolerance = tolerance;
  CompareTables(dataset.person_tables, tolerance, report);
  CompareTables(dataset.household_tables, tolerance, report);
  CompareTargets(dataset.person_tables, dataset.target_persons, "persons", tolerance, report);
  CompareTargets(dataset.household_tables, dataset.target_households, "households", tolerance,
                 report);
  return report;
}

}  // namespace synpop
