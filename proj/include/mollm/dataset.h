//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_DATASET_H_
#define MOLLM_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mollm/molgraph.h"

namespace mollm {

enum class TaskGroup : std::uint8_t {
  kPropertyRegression,
  kPropertyClassification,
  kReaction,
  kMolgen,
  kCaptioning,
  kNameConversion,
};

enum class Split : std::uint8_t { kTrain, kTest, kOod };

std::string_view to_string(TaskGroup group);
std::string_view to_string(Split split);
TaskGroup parse_task_group(std::string_view text);
Split parse_split(std::string_view text);

struct InstructionRecord {
  std::string task_id;
  TaskGroup task_group = TaskGroup::kPropertyRegression;
  std::string instruction;
  std::optional<std::string> input_selfies;
  std::string target;
  std::string source;
  Split split = Split::kTrain;
};

/// Schema violation in an input record. line() is 1-based, 0 when unknown.
class DatasetError: public std::runtime_error {
public:
  DatasetError(const std::string &what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) { }

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

InstructionRecord record_from_json(const nlohmann::json &j);
nlohmann::json record_to_json(const InstructionRecord &r);

/// Reads one JSON object per non-empty line. Errors carry the line number.
std::vector<nlohmann::json> read_json_lines(std::istream &in);
std::vector<nlohmann::json> read_json_lines_file(const std::string &path);
std::vector<InstructionRecord> read_records(std::istream &in);
std::vector<InstructionRecord> read_records_file(const std::string &path);
void write_records(std::ostream &out, const std::vector<InstructionRecord> &records);

/// The molecule a record is about: its input, or the target of a
/// molecule-generation record. nullopt when the record carries none.
std::optional<std::string> record_selfies(const InstructionRecord &r);

/// Canonical SMILES of record_selfies(r); throws MolError when unparseable.
std::optional<std::string> molecule_key(const InstructionRecord &r);

/// Per task, drops training records whose molecule key also occurs in the
/// task's test split. Order is otherwise preserved.
std::vector<InstructionRecord> dedup(const std::vector<InstructionRecord> &records);

struct SplitResult {
  std::vector<InstructionRecord> train;
  std::vector<InstructionRecord> test;
  std::vector<std::string> warnings;
};

/// Groups records by Murcko scaffold key and assigns whole groups, largest
/// first, to train while more than test_fraction of the records remain
/// unassigned; the rest go to test. Records without a molecule stay in
/// train. Split fields are rewritten.
SplitResult scaffold_split(const std::vector<InstructionRecord> &records,
                           double test_fraction);

struct LabeledSolubility {
  std::string molecule_key;  // canonical SMILES
  std::vector<double> labels;
};

/// Sample standard deviation (n - 1); 0 for a single value.
double sample_std(const std::vector<double> &values);

/// Keeps molecules outside exclude_keys whose labels are unique or have a
/// sample standard deviation below std_max; the target is the mean label.
std::vector<InstructionRecord> ood_solubility_filter(
    const std::vector<LabeledSolubility> &entries,
    const std::set<std::string> &exclude_keys, double std_max,
    const std::string &task_id = "logs_ood");

/// Removes reaction candidates any of whose input molecules has a (non-empty)
/// scaffold seen among the training inputs, or whose reaction was already
/// taken by an earlier source (used_reactions, updated with the kept ones),
/// then scaffold-splits the remainder.
SplitResult ood_reaction_filter(const std::vector<InstructionRecord> &candidates,
                                const std::vector<InstructionRecord> &train_records,
                                double test_fraction,
                                std::set<std::string> *used_reactions = nullptr);

/// Substitutes {slot} placeholders (selfies, target, task_id, task_group,
/// source, instruction); `{{` and `}}` are literal braces. Unknown slots
/// and a missing selfies value are errors.
std::string render_template(std::string_view text, const InstructionRecord &r);

class TemplateSet {
public:
  void add(std::string id, std::string text);
  std::string render(const std::string &id, const InstructionRecord &r) const;
  bool contains(const std::string &id) const { return templates_.contains(id); }

private:
  std::map<std::string, std::string> templates_;
};

}  // namespace mollm

#endif  // MOLLM_DATASET_H_
