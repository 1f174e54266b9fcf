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

#include "synpop/reporting.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "csv_util.hpp"
#include "io_util.hpp"
#include "synpop/error.hpp"
#include "synpop/fitness.hpp"

namespace synpop {

std::size_t SelectBest(std::span<const ObjectiveVector> archive, std::span<const double> weights) {
  if (archive.empty()) Fail(ErrorKind::kConfig, "select: empty archive");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) Fail(ErrorKind::kConfig, "select: weights must be non-negative");
    weight_sum += w;
  }
  if (!(weight_sum > 0)) Fail(ErrorKind::kConfig, "select: all-zero weights");
  if (weights.size() != archive.front().size()) {
    Fail(ErrorKind::kConfig, "select: expected " + std::to_string(archive.front().size()) +
                                 " weights, got " + std::to_string(weights.size()));
  }
  const auto normalized = NormalizeObjectives(archive);
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < normalized.size(); ++m) {
    double score = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) score += weights[i] * normalized[m][i];
    if (score < best_score) {
      best_score = score;
      best = m;
    }
  }
  return best;
}

std::size_t SelectBest(const ParetoArchive& archive, std::span<const double> weights) {
  return SelectBest(archive.objectives(), weights);
}

std::string PersonsCsv(const CandidatePopulation& candidate, const AttributeSchema& schema) {
  std::string out = "person_id";
  for (const auto& a : schema.attributes()) out += "," + a.name;
  out += "\n";
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    out += std::to_string(i);
    const auto entity = candidate.entity(i);
    for (std::size_t a = 0; a < schema.size(); ++a) {
      out += ',';
      out += schema.attribute(a).categories[entity[a]];
    }
    out += '\n';
  }
  return out;
}

void ExportPersons(const CandidatePopulation& candidate, const AttributeSchema& schema,
                   const std::filesystem::path& path) {
  detail::WriteFile(path, PersonsCsv(candidate, schema));
}

CandidatePopulation ParsePersonsCsv(std::string_view csv_text, const AttributeSchema& schema) {
  const auto lines = detail::SplitLines(csv_text);
  if (lines.empty()) Fail(ErrorKind::kData, "persons csv: empty file");
  const auto header = detail::SplitRecord(lines.front().text);
  if (header.empty() || header.front() != "person_id") {
    Fail(ErrorKind::kData, "persons csv: first column must be person_id");
  }
  std::vector<std::size_t> column_of(schema.size(), 0);
  for (std::size_t a = 0; a < schema.size(); ++a) {
    auto it = std::find(header.begin() + 1, header.end(), schema.attribute(a).name);
    if (it == header.end()) {
      Fail(ErrorKind::kData, "persons csv: missing column '" + schema.attribute(a).name + "'");
    }
    column_of[a] = static_cast<std::size_t>(it - header.begin());
  }
  CandidatePopulation candidate(lines.size() - 1, schema.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::SplitRecord(lines[r].text);
    const std::string where = "persons csv line " + std::to_string(lines[r].number);
    if (fields.size() != header.size()) Fail(ErrorKind::kData, where + ": malformed row");
    if (fields.front() != std::to_string(r - 1)) {
      Fail(ErrorKind::kData, where + ": person ids must be 0..n-1 in order");
    }
    for (std::size_t a = 0; a < schema.size(); ++a) {
      auto c = schema.attribute(a).FindCategory(fields[column_of[a]]);
      if (!c) Fail(ErrorKind::kData, where + ": unknown category '" + fields[column_of[a]] + "'");
      candidate.at(r - 1, a) = static_cast<CategoryIndex>(*c);
    }
  }
  return candidate;
}

CandidatePopulation LoadPersons(const std::filesystem::path& path, const AttributeSchema& schema) {
  return ParsePersonsCsv(detail::ReadFile(path), schema);
}

std::string HouseholdsCsv(const AllocationResult& result, const CandidatePopulation& households,
                          const AttributeSchema& schema, std::size_t composition_attribute,
                          std::size_t size_attribute) {
  const auto& compositions = schema.attribute(composition_attribute).categories;
  std::string out = "household_id,size,composition,member_ids\n";
  for (std::size_t h = 0; h < households.size(); ++h) {
    const std::string& code = compositions[households.at(h, composition_attribute)];
    out += std::to_string(h) + ',';
    if (size_attribute < schema.size()) {
      out += schema.attribute(size_attribute).categories[households.at(h, size_attribute)];
    } else {
      out += std::to_string(ParseComposition(code).total);
    }
    out += ',' + code + ',';
    const auto& members = result.households.at(h).members;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (m) out += ';';
      out += std::to_string(members[m]);
    }
    out += '\n';
  }
  return out;
}

void ExportHouseholds(const AllocationResult& result, const CandidatePopulation& households,
                      const AttributeSchema& schema, std::size_t composition_attribute,
                      std::size_t size_attribute, const std::filesystem::path& path) {
  detail::WriteFile(path,
                    HouseholdsCsv(result, households, schema, composition_attribute, size_attribute));
}

std::string ConvergenceCsv(const GenerationHistory& history) {
  std::string out = "generation,objective,best,mean\n";
  for (const auto& r : history.records) {
    for (std::size_t i = 0; i < history.objective_names.size(); ++i) {
      out += std::to_string(r.generation) + ',' + history.objective_names[i] + ',' +
             detail::FormatDouble(r.best_normalized[i]) + ',' +
             detail::FormatDouble(r.mean_normalized[i]) + '\n';
    }
  }
  return out;
}

void ExportConvergence(const GenerationHistory& history, const std::filesystem::path& path) {
  detail::WriteFile(path, ConvergenceCsv(history));
}

std::string ParetoPairsCsv(const ParetoArchive& archive, std::span<const std::string> names,
                           std::size_t selected) {
  if (archive.empty()) Fail(ErrorKind::kConfig, "pareto export: empty archive");
  if (selected >= archive.size()) Fail(ErrorKind::kConfig, "pareto export: bad selection");
  const auto normalized = NormalizeObjectives(archive.objectives());
  std::string out = "member_id";
  for (const auto& n : names) out += ',' + n;
  out += ",selected\n";
  for (std::size_t m = 0; m < archive.size(); ++m) {
    out += std::to_string(archive.members()[m].id);
    for (double v : normalized[m]) out += ',' + detail::FormatDouble(v);
    out += m == selected ? ",true\n" : ",false\n";
  }
  return out;
}

void ExportParetoPairs(const ParetoArchive& archive, std::span<const std::string> names,
                       std::size_t selected, const std::filesystem::path& path) {
  detail::WriteFile(path, ParetoPairsCsv(archive, names, selected));
}

std::vector<double> GroupSums(const AttributeDescriptor& attribute, std::span<const double> values) {
  std::vector<double> out(attribute.groups.size(), 0.0);
  for (std::size_t c = 0; c < values.size() && c < attribute.group_of.size(); ++c) {
    if (attribute.group_of[c] != kNoGroup) out[attribute.group_of[c]] += values[c];
  }
  return out;
}

std::vector<RmseRow> RmseSummary(const CandidatePopulation& candidate,
                                 const AttributeSchema& schema,
                                 std::span<const ContingencyTable> tables) {
  std::vector<RmseRow> rows;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const auto& attr = schema.attribute(a);
    const ContingencyTable* table = FirstTableWith(tables, attr.name);
    if (!table) continue;
    const auto actual = Rescale(Marginalize(*table, attr.name).values,
                                static_cast<double>(candidate.size()));
    const auto observed = CountCategories(candidate, a, attr.size());
    rows.push_back({attr.name, "raw", Rmse(actual, observed)});
    if (attr.has_grouping()) {
      rows.push_back({attr.name, "grouped", Rmse(GroupSums(attr, actual), GroupSums(attr, observed))});
    }
  }
  return rows;
}

std::string RmseCsv(std::span<const RmseRow> rows) {
  std::string out = "attribute,level,rmse\n";
  for (const auto& r : rows) {
    out += r.attribute + ',' + r.level + ',' + detail::FormatDouble(r.rmse) + '\n';
  }
  return out;
}

namespace {

constexpr char kArchiveMagic[8] = {'S', 'Y', 'N', 'P', 'O', 'P', 'A', 'R'};
constexpr std::uint32_t kArchiveVersion = 1;

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void U16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint64_t Uint(int bytes) {
    Need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_++])) << (8 * i);
    }
    return v;
  }
  double F64() { return std::bit_cast<double>(Uint(8)); }
  std::string Str() {
    const auto n = static_cast<std::size_t>(Uint(4));
    Need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void Expect(const char* bytes, std::size_t n) {
    Need(n);
    if (std::memcmp(in_.data() + pos_, bytes, n) != 0) Fail(ErrorKind::kData, "archive: bad magic");
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void Need(std::size_t n) {
    if (in_.size() - pos_ < n) Fail(ErrorKind::kData, "archive: truncated file");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

void SaveArchive(const ParetoArchive& archive, std::span<const std::string> objective_names,
                 const AttributeSchema& schema, const std::filesystem::path& path) {
  Writer w;
  w.Bytes(kArchiveMagic, sizeof(kArchiveMagic));
  w.U32(kArchiveVersion);
  w.U32(static_cast<std::uint32_t>(schema.size()));
  for (const auto& a : schema.attributes()) w.Str(a.name);
  w.U32(static_cast<std::uint32_t>(objective_names.size()));
  for (const auto& n : objective_names) w.Str(n);
  w.U64(archive.capacity());
  w.U64(archive.size());
  const std::size_t roster = archive.empty() ? 0 : archive.members().front().candidate->size();
  w.U64(roster);
  for (const auto& m : archive.members()) {
    w.U64(m.id);
    for (double v : m.objectives) w.F64(v);
    for (CategoryIndex g : m.candidate->genes()) w.U16(g);
  }
  detail::WriteFile(path, w.str());
}

LoadedArchive LoadArchive(const std::filesystem::path& path, const AttributeSchema& schema) {
  const std::string bytes = detail::ReadFile(path);
  Reader r(bytes);
  r.Expect(kArchiveMagic, sizeof(kArchiveMagic));
  if (r.Uint(4) != kArchiveVersion) Fail(ErrorKind::kData, "archive: unsupported version");
  const auto attributes = static_cast<std::size_t>(r.Uint(4));
  if (attributes != schema.size()) Fail(ErrorKind::kData, "archive: schema mismatch");
  for (std::size_t a = 0; a < attributes; ++a) {
    if (r.Str() != schema.attribute(a).name) Fail(ErrorKind::kData, "archive: schema mismatch");
  }
  LoadedArchive out{ParetoArchive(0), {}};
  const auto objectives = static_cast<std::size_t>(r.Uint(4));
  for (std::size_t i = 0; i < objectives; ++i) out.objective_names.push_back(r.Str());
  const auto capacity = static_cast<std::size_t>(r.Uint(8));
  const auto members = static_cast<std::size_t>(r.Uint(8));
  const auto roster = static_cast<std::size_t>(r.Uint(8));
  out.archive = ParetoArchive(capacity);
  for (std::size_t m = 0; m < members; ++m) {
    ArchiveMember member;
    member.id = r.Uint(8);
    member.objectives.resize(objectives);
    for (double& v : member.objectives) v = r.F64();
    auto candidate = std::make_shared<CandidatePopulation>(roster, attributes);
    for (std::size_t i = 0; i < roster; ++i) {
      for (std::size_t a = 0; a < attributes; ++a) {
        const auto g = static_cast<CategoryIndex>(r.Uint(2));
        if (g >= schema.attribute(a).size()) Fail(ErrorKind::kData, "archive: category out of range");
        candidate->at(i, a) = g;
      }
    }
    member.candidate = std::move(candidate);
    if (!out.archive.Insert(std::move(member))) {
      Fail(ErrorKind::kData, "archive: members are not mutually non-dominated");
    }
  }
  if (!r.done()) Fail(ErrorKind::kData, "archive: trailing bytes");
  return out;
}

}  // namespace synpop
