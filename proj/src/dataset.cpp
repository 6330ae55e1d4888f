//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "mollm/canonical.h"
#include "mollm/scaffold.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"

namespace mollm {

using nlohmann::json;

namespace {

constexpr std::pair<TaskGroup, std::string_view> kTaskGroups[] = {
  {TaskGroup::kPropertyRegression, "property_regression"},
  {TaskGroup::kPropertyClassification, "property_classification"},
  {TaskGroup::kReaction, "reaction"},
  {TaskGroup::kMolgen, "molgen"},
  {TaskGroup::kCaptioning, "captioning"},
  {TaskGroup::kNameConversion, "name_conversion"},
};

constexpr std::pair<Split, std::string_view> kSplits[] = {
  {Split::kTrain, "train"},
  {Split::kTest, "test"},
  {Split::kOod, "ood"},
};

std::string required_string(const json &j, const char *field) {
  auto it = j.find(field);
  if (it == j.end()) throw DatasetError(std::string("missing field '") + field + "'");
  if (!it->is_string()) {
    throw DatasetError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<std::string> component_scaffolds(const MolGraph &g) {
  int count = 0;
  const std::vector<int> comp = connected_components(g, &count);
  std::vector<std::string> out;
  for (int c = 0; c < count; ++c) {
    std::vector<bool> keep(g.num_atoms());
    for (int v = 0; v < g.num_atoms(); ++v) keep[v] = comp[v] == c;
    out.push_back(scaffold_key(induced_subgraph(g, keep)));
  }
  return out;
}

}  // namespace

std::string_view to_string(TaskGroup group) {
  for (auto [g, name]: kTaskGroups) {
    if (g == group) return name;
  }
  return "?";
}

std::string_view to_string(Split split) {
  for (auto [s, name]: kSplits) {
    if (s == split) return name;
  }
  return "?";
}

TaskGroup parse_task_group(std::string_view text) {
  for (auto [g, name]: kTaskGroups) {
    if (name == text) return g;
  }
  throw DatasetError("unknown task_group '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  for (auto [s, name]: kSplits) {
    if (name == text) return s;
  }
  throw DatasetError("unknown split '" + std::string(text) + "'");
}

InstructionRecord record_from_json(const json &j) {
  if (!j.is_object()) throw DatasetError("record must be a JSON object");
  InstructionRecord r;
  r.task_id = required_string(j, "task_id");
  r.task_group = parse_task_group(required_string(j, "task_group"));
  r.instruction = required_string(j, "instruction");
  if (auto it = j.find("input_selfies"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DatasetError("field 'input_selfies' must be a string");
    r.input_selfies = it->get<std::string>();
  }
  r.target = required_string(j, "target");
  if (r.target.empty()) throw DatasetError("field 'target' must be non-empty");
  r.source = required_string(j, "source");
  r.split = parse_split(required_string(j, "split"));
  return r;
}

json record_to_json(const InstructionRecord &r) {
  json j;
  j["task_id"] = r.task_id;
  j["task_group"] = std::string(to_string(r.task_group));
  j["instruction"] = r.instruction;
  j["input_selfies"] = r.input_selfies ? json(*r.input_selfies) : json(nullptr);
  j["target"] = r.target;
  j["source"] = r.source;
  j["split"] = std::string(to_string(r.split));
  return j;
}

std::vector<json> read_json_lines(std::istream &in) {
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error &e) {
      throw DatasetError(std::string("invalid JSON: ") + e.what(), lineno);
    }
  }
  return out;
}

std::vector<json> read_json_lines_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path);
  return read_json_lines(in);
}

std::vector<InstructionRecord> read_records(std::istream &in) {
  std::vector<InstructionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error &e) {
      throw DatasetError(std::string("invalid JSON: ") + e.what(), lineno);
    } catch (const DatasetError &e) {
      throw DatasetError(e.what(), lineno);
    }
  }
  return out;
}

std::vector<InstructionRecord> read_records_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path);
  return read_records(in);
}

void write_records(std::ostream &out, const std::vector<InstructionRecord> &records) {
  for (const InstructionRecord &r: records) out << record_to_json(r).dump() << '\n';
}

std::optional<std::string> record_selfies(const InstructionRecord &r) {
  if (r.input_selfies) return r.input_selfies;
  if (r.task_group == TaskGroup::kMolgen) return r.target;
  return std::nullopt;
}

std::optional<std::string> molecule_key(const InstructionRecord &r) {
  const auto s = record_selfies(r);
  if (!s) return std::nullopt;
  return canonical_smiles(parse_selfies(*s));
}

std::vector<InstructionRecord> dedup(const std::vector<InstructionRecord> &records) {
  std::vector<std::optional<std::string>> keys(records.size());
  std::unordered_map<std::string, std::unordered_set<std::string>> test_keys;
  for (std::size_t i = 0; i < records.size(); ++i) {
    keys[i] = molecule_key(records[i]);
    if (keys[i] && records[i].split == Split::kTest) {
      test_keys[records[i].task_id].insert(*keys[i]);
    }
  }
  std::vector<InstructionRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const InstructionRecord &r = records[i];
    if (r.split == Split::kTrain && keys[i]) {
      auto it = test_keys.find(r.task_id);
      if (it != test_keys.end() && it->second.contains(*keys[i])) continue;
    }
    out.push_back(r);
  }
  return out;
}

SplitResult scaffold_split(const std::vector<InstructionRecord> &records,
                           double test_fraction) {
  if (test_fraction < 0.0 || test_fraction > 1.0) {
    throw std::invalid_argument("test_fraction must lie in [0, 1]");
  }
  SplitResult result;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::size_t> no_molecule;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto s = record_selfies(records[i]);
    if (!s) {
      no_molecule.push_back(i);
      continue;
    }
    groups[scaffold_key(parse_selfies(*s))].push_back(i);
  }

  std::vector<const std::vector<std::size_t> *> order;
  for (const auto &[key, members]: groups) order.push_back(&members);
  std::stable_sort(order.begin(), order.end(), [](auto *a, auto *b) {
    return a->size() > b->size();
  });

  const double n = static_cast<double>(records.size());
  double remaining = n;
  std::vector<bool> in_test(records.size(), false);
  for (const auto *members: order) {
    if (remaining > test_fraction * n + 1e-9) {
      remaining -= static_cast<double>(members->size());
    } else {
      for (std::size_t i: *members) in_test[i] = true;
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    InstructionRecord r = records[i];
    r.split = in_test[i] ? Split::kTest : Split::kTrain;
    (in_test[i] ? result.test : result.train).push_back(std::move(r));
  }
  if (result.test.empty() && test_fraction > 0.0 && !records.empty()) {
    result.warnings.push_back("scaffold split produced an empty test set ("
                              + std::to_string(groups.size())
                              + " scaffold group(s))");
  }
  return result;
}

double sample_std(const std::vector<double> &values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v: values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v: values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<InstructionRecord> ood_solubility_filter(
    const std::vector<LabeledSolubility> &entries,
    const std::set<std::string> &exclude_keys, double std_max,
    const std::string &task_id) {
  if (!(std_max > 0.0)) throw std::invalid_argument("std_max must be positive");
  std::vector<InstructionRecord> out;
  for (const LabeledSolubility &e: entries) {
    if (e.labels.empty()) {
      throw std::invalid_argument("solubility entry " + e.molecule_key + " has no labels");
    }
    if (exclude_keys.contains(e.molecule_key)) continue;
    if (e.labels.size() > 1 && !(sample_std(e.labels) < std_max)) continue;
    double mean = 0.0;
    for (double v: e.labels) mean += v;
    mean /= static_cast<double>(e.labels.size());

    InstructionRecord r;
    r.task_id = task_id;
    r.task_group = TaskGroup::kPropertyRegression;
    r.instruction = "Predict the aqueous solubility (LogS) of the molecule.";
    r.input_selfies = to_selfies(parse_smiles(e.molecule_key));
    r.target = format_value(mean);
    r.source = "solubility_ood";
    r.split = Split::kOod;
    out.push_back(std::move(r));
  }
  return out;
}

SplitResult ood_reaction_filter(const std::vector<InstructionRecord> &candidates,
                                const std::vector<InstructionRecord> &train_records,
                                double test_fraction,
                                std::set<std::string> *used_reactions) {
  std::unordered_set<std::string> train_scaffolds;
  for (const InstructionRecord &r: train_records) {
    if (!r.input_selfies) continue;
    for (std::string &s: component_scaffolds(parse_selfies(*r.input_selfies))) {
      if (!s.empty()) train_scaffolds.insert(std::move(s));
    }
  }
  std::vector<InstructionRecord> kept;
  for (const InstructionRecord &r: candidates) {
    if (!r.input_selfies) continue;
    const MolGraph input = parse_selfies(*r.input_selfies);
    bool overlap = false;
    for (const std::string &s: component_scaffolds(input)) {
      overlap = overlap || (!s.empty() && train_scaffolds.contains(s));
    }
    if (overlap) continue;
    if (used_reactions) {
      std::string key = canonical_smiles(input) + ">>" + r.target;
      if (!used_reactions->insert(std::move(key)).second) continue;
    }
    kept.push_back(r);
  }
  return scaffold_split(kept, test_fraction);
}

std::string render_template(std::string_view text, const InstructionRecord &r) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if ((ch == '{' || ch == '}') && i + 1 < text.size() && text[i + 1] == ch) {
      out += ch;
      i += 2;
      continue;
    }
    if (ch == '}') throw DatasetError("unmatched '}' in template");
    if (ch != '{') {
      out += ch;
      ++i;
      continue;
    }
    const std::size_t close = text.find('}', i);
    if (close == std::string_view::npos) throw DatasetError("unterminated slot in template");
    const std::string_view slot = text.substr(i + 1, close - i - 1);
    if (slot == "selfies") {
      if (!r.input_selfies) throw DatasetError("template needs {selfies} but the record has none");
      out += *r.input_selfies;
    } else if (slot == "target") {
      out += r.target;
    } else if (slot == "task_id") {
      out += r.task_id;
    } else if (slot == "task_group") {
      out += to_string(r.task_group);
    } else if (slot == "source") {
      out += r.source;
    } else if (slot == "instruction") {
      out += r.instruction;
    } else {
      throw DatasetError("unknown template slot {" + std::string(slot) + "}");
    }
    i = close + 1;
  }
  return out;
}

void TemplateSet::add(std::string id, std::string text) {
  templates_[std::move(id)] = std::move(text);
}

std::string TemplateSet::render(const std::string &id, const InstructionRecord &r) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw DatasetError("unknown template '" + id + "'");
  return render_template(it->second, r);
}

}  // namespace mollm
