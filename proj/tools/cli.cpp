//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mollm/canonical.h"
#include "mollm/dataset.h"
#include "mollm/fingerprint.h"
#include "mollm/metrics.h"
#include "mollm/molpo.h"
#include "mollm/perturb.h"
#include "mollm/random.h"
#include "mollm/sampling.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"
#include "mollm/substruct.h"
#include "mollm/toymodel.h"

namespace mollm::cli {

using nlohmann::json;

namespace {

constexpr std::size_t kBatchLines = 4096;

class InputError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Logger {
public:
  explicit Logger(std::ostream &err): err_(err) { }

  void event(const std::string &name, json fields = json::object()) {
    fields["event"] = name;
    err_ << fields.dump() << '\n';
  }

private:
  std::ostream &err_;
};

std::ifstream open_in(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

void require_readable(const std::string &path) {
  if (!path.empty()) open_in(path);
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int default_workers() {
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads; the first
/// exception (lowest index) is rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next {0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const int count = static_cast<int>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> threads;
  for (int t = 0; t < count; ++t) threads.emplace_back(body);
  for (std::thread &t: threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Line {
  std::size_t number;
  std::string text;
};

/// Reads up to max non-blank lines; returns false at end of input.
bool read_batch(std::istream &in, std::size_t &line_no, std::size_t max,
                std::vector<Line> &batch) {
  batch.clear();
  std::string text;
  while (batch.size() < max && std::getline(in, text)) {
    ++line_no;
    if (trim(text).empty()) continue;
    batch.push_back({line_no, std::move(text)});
  }
  return !batch.empty();
}

json parse_json_line(const Line &line) {
  try {
    return json::parse(line.text);
  } catch (const json::parse_error &e) {
    throw DatasetError(std::string("invalid JSON: ") + e.what(), line.number);
  }
}

template <class Fn>
auto with_line(std::size_t line, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DatasetError &e) {
    if (e.line() != 0) throw;
    throw DatasetError(e.what(), line);
  } catch (const MolError &e) {
    throw DatasetError(e.what(), line);
  } catch (const json::exception &e) {
    throw DatasetError(e.what(), line);
  }
}

bool looks_like_selfies(std::string_view text) {
  if (text.empty() || text.front() != '[') return false;
  bool inside = false;
  for (char ch: text) {
    if (ch == '[') {
      if (inside) return false;
      inside = true;
    } else if (ch == ']') {
      if (!inside) return false;
      inside = false;
    } else if (!inside && ch != '.') {
      return false;
    }
  }
  return !inside;
}

MolFormat parse_format(const std::string &name) {
  if (name == "auto") return MolFormat::kAuto;
  if (name == "smiles") return MolFormat::kSmiles;
  if (name == "selfies") return MolFormat::kSelfies;
  throw InputError("unknown molecule format '" + name + "'");
}

MolGraph parse_input(const std::string &text, MolFormat format) {
  if (format == MolFormat::kSelfies) return parse_selfies(text);
  if (format == MolFormat::kSmiles) return parse_smiles(text);
  if (looks_like_selfies(text)) {
    try {
      return parse_selfies(text);
    } catch (const MolError &) {
    }
  }
  return parse_smiles(text);
}

const KeyTable &key_table(const std::string &path, std::optional<KeyTable> &storage) {
  if (path.empty()) return default_key_table();
  storage = KeyTable::load(path);
  return *storage;
}

std::vector<Line> gather_molecules(const std::vector<std::string> &positional,
                                   const std::string &in_path) {
  std::vector<Line> lines;
  for (std::size_t i = 0; i < positional.size(); ++i) lines.push_back({i + 1, positional[i]});
  if (!in_path.empty()) {
    std::ifstream in = open_in(in_path);
    std::size_t line_no = 0;
    std::string text;
    while (std::getline(in, text)) {
      ++line_no;
      text = trim(text);
      if (!text.empty()) lines.push_back({line_no, text});
    }
  }
  if (lines.empty()) throw InputError("no molecules given (pass them as arguments or with --in)");
  return lines;
}

void write_lines(const std::vector<std::string> &lines, const std::string &out_path,
                 std::ostream &out) {
  if (out_path.empty()) {
    for (const std::string &l: lines) out << l << '\n';
    return;
  }
  std::ofstream file = open_out(out_path);
  for (const std::string &l: lines) file << l << '\n';
}

// canonicalize / fingerprint

struct MoleculeArgs {
  std::vector<std::string> molecules;
  std::string in;
  std::string out;
  std::string from = "auto";
  int workers = default_workers();
};

void add_molecule_args(CLI::App *cmd, MoleculeArgs &a) {
  cmd->add_option("molecules", a.molecules, "SMILES or SELFIES strings");
  cmd->add_option("--in", a.in, "File with one molecule per line");
  cmd->add_option("--out", a.out, "Output file (default: standard output)");
  cmd->add_option("--from", a.from, "Input notation: auto, smiles or selfies");
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
}

template <class Fn>
std::vector<std::string> map_molecules(const MoleculeArgs &a, Fn fn) {
  const std::vector<Line> lines = gather_molecules(a.molecules, a.in);
  const MolFormat format = parse_format(a.from);
  std::vector<std::string> results(lines.size());
  parallel_for(lines.size(), a.workers, [&](std::size_t i) {
    results[i] = with_line(lines[i].number, [&] { return fn(parse_input(lines[i].text, format)); });
  });
  return results;
}

struct CanonicalizeArgs {
  MoleculeArgs mol;
  std::string to = "smiles";
};

int cmd_canonicalize(const CanonicalizeArgs &a, std::ostream &out) {
  if (a.to != "smiles" && a.to != "selfies") throw InputError("--to must be smiles or selfies");
  const bool selfies = a.to == "selfies";
  write_lines(map_molecules(a.mol,
                            [&](const MolGraph &g) {
                              if (!selfies) return canonical_smiles(g);
                              return to_selfies(parse_smiles(canonical_smiles(g)));
                            }),
              a.mol.out, out);
  return kExitOk;
}

struct FingerprintArgs {
  MoleculeArgs mol;
  std::string kind = "morgan";
  int radius = 2;
  int width = kDefaultFingerprintWidth;
  int min_path = 1;
  int max_path = 7;
  std::string key_table;
};

int cmd_fingerprint(const FingerprintArgs &a, std::ostream &out) {
  std::optional<KeyTable> storage;
  const KeyTable *table = nullptr;
  if (a.kind == "maccs") {
    table = &key_table(a.key_table, storage);
  } else if (a.kind != "morgan" && a.kind != "path") {
    throw InputError("--kind must be maccs, morgan or path");
  }
  if (a.width <= 0) throw InputError("--width must be positive");
  if (a.radius < 0) throw InputError("--radius must be non-negative");
  if (a.kind == "path" && (a.min_path < 1 || a.min_path > a.max_path || a.max_path > 7)) {
    throw InputError("path lengths must satisfy 1 <= --min-path <= --max-path <= 7");
  }
  write_lines(map_molecules(a.mol,
                            [&](const MolGraph &g) {
                              if (table) return maccs_keys(g, *table).to_hex();
                              if (a.kind == "morgan") return morgan(g, a.radius, a.width).to_hex();
                              return path_fp(g, a.min_path, a.max_path, a.width).to_hex();
                            }),
              a.mol.out, out);
  return kExitOk;
}

// make-pairs

struct MakePairsArgs {
  std::string in;
  std::string out;
  double ratio = 0.3;
  std::uint64_t seed = 0;
  std::string key_table;
  int workers = default_workers();
};

int cmd_make_pairs(const MakePairsArgs &a, Logger &log) {
  if (!(a.ratio >= 0.0 && a.ratio <= 1.0)) throw InputError("--ratio must lie in [0, 1]");
  std::optional<KeyTable> storage;
  const KeyTable &table = key_table(a.key_table, storage);
  std::ifstream in = open_in(a.in);
  std::ofstream out = open_out(a.out);
  log.event("seed", {{"command", "make-pairs"}, {"seed", a.seed}});

  std::size_t line_no = 0, index = 0, written = 0, skipped = 0;
  std::vector<Line> batch;
  while (read_batch(in, line_no, kBatchLines, batch)) {
    std::vector<std::optional<std::string>> rows(batch.size());
    parallel_for(batch.size(), a.workers, [&](std::size_t i) {
      rows[i] = with_line(batch[i].number, [&]() -> std::optional<std::string> {
        const InstructionRecord r = record_from_json(parse_json_line(batch[i]));
        if (!r.input_selfies) return std::nullopt;
        const PreferencePair pair = make_pair(r, table, a.ratio, derive_seed(a.seed, index + i));
        json j = record_to_json(r);
        j["rejected_selfies"] = to_selfies(pair.rejected);
        j["perturb_log"] = perturb_log_to_json(pair.log, table);
        return j.dump();
      });
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i]) {
        out << *rows[i] << '\n';
        ++written;
      } else {
        log.event("skip", {{"line", batch[i].number}, {"reason", "record has no input molecule"}});
        ++skipped;
      }
    }
    index += batch.size();
  }
  log.event("done", {{"command", "make-pairs"}, {"pairs", written}, {"skipped", skipped}});
  return kExitOk;
}

// sample-pretrain

struct SamplePretrainArgs {
  std::string labels;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool filter = false;
  std::string retained;
  std::string group_table;
};

GroupLabel label_from_json(const json &j, const KeyTable &groups) {
  auto from_array = [](const json &arr) {
    if (!arr.is_array()) throw DatasetError("group labels must be a JSON array");
    GroupLabel label;
    for (const json &v: arr) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw DatasetError("group labels must be 0 or 1");
      }
      label.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    return label;
  };
  if (j.is_array()) return from_array(j);
  if (!j.is_object()) throw DatasetError("expected a JSON array or object");
  if (auto it = j.find("groups"); it != j.end()) return from_array(*it);
  if (auto it = j.find("selfies"); it != j.end()) {
    return functional_groups(parse_selfies(it->get<std::string>()), groups);
  }
  if (auto it = j.find("smiles"); it != j.end()) {
    return functional_groups(parse_smiles(it->get<std::string>()), groups);
  }
  throw DatasetError("expected a 'groups', 'selfies' or 'smiles' field");
}

std::vector<int> read_columns(const std::string &path) {
  std::ifstream in = open_in(path);
  std::vector<int> columns;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      columns.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception &) {
      throw InputError("'" + path + "': bad column index '" + token + "'");
    }
  }
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  return columns;
}

int cmd_sample_pretrain(const SamplePretrainArgs &a, Logger &log) {
  if (a.n == 0) throw InputError("--n must be positive");
  if (a.filter && !a.retained.empty()) throw InputError("--filter and --retained exclude each other");
  std::optional<KeyTable> storage;
  const KeyTable &groups = a.group_table.empty() ? default_group_table()
                                                 : *(storage = KeyTable::load(a.group_table));
  std::vector<GroupLabel> labels;
  {
    std::ifstream in = open_in(a.labels);
    std::size_t line_no = 0;
    std::vector<Line> batch;
    while (read_batch(in, line_no, kBatchLines, batch)) {
      for (const Line &l: batch) {
        labels.push_back(with_line(l.number, [&] { return label_from_json(parse_json_line(l), groups); }));
        if (labels.back().size() != labels.front().size()) {
          throw DatasetError("label width differs from the first line", l.number);
        }
      }
    }
  }
  if (labels.empty()) throw InputError("'" + a.labels + "' holds no labels");
  log.event("seed", {{"command", "sample-pretrain"}, {"seed", a.seed}});

  std::vector<GroupLabel> selected = labels;
  if (a.filter || !a.retained.empty()) {
    std::vector<int> columns;
    if (a.filter) {
      const GroupFilter f = filter_groups(count_groups(labels).counts);
      columns = f.retained;
      log.event("filter", {{"dropped_common", f.dropped_common},
                           {"dropped_rare", f.dropped_rare},
                           {"retained", f.retained.size()}});
    } else {
      columns = read_columns(a.retained);
      for (int c: columns) {
        if (c < 0 || c >= static_cast<int>(labels.front().size())) {
          throw InputError("retained column " + std::to_string(c) + " is out of range");
        }
      }
    }
    selected = select_groups(labels, columns);
  }
  const GroupStats stats = count_groups(selected);
  const SamplingWeights w = weights(selected, stats);
  const std::vector<std::size_t> idx = sample(w, a.n, a.seed);

  std::ofstream out = open_out(a.out);
  for (std::size_t i: idx) out << i << '\n';
  log.event("done", {{"command", "sample-pretrain"},
                     {"molecules", labels.size()},
                     {"groups", stats.num_groups()},
                     {"draws", idx.size()},
                     {"entropy_before", count_entropy(stats.counts)},
                     {"entropy_after", count_entropy(sampled_counts(selected, idx))}});
  return kExitOk;
}

// build-dataset

struct BuildDatasetArgs {
  std::string config;
  std::string in;
  std::string out;
  std::string train_out;
  std::string test_out;
  std::string exclude;
  std::string train;
  std::string task_id = "logs_ood";
  double test_fraction = 0.1;
  double std_max = 0.1;
};

void apply_dataset_config(BuildDatasetArgs &a, CLI::App *cmd) {
  if (a.config.empty()) return;
  std::ifstream in = open_in(a.config);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error &e) {
    throw InputError("'" + a.config + "': " + e.what());
  }
  if (!cfg.is_object()) throw InputError("'" + a.config + "' must hold a JSON object");
  const std::map<std::string, std::string *> strings = {
    {"in", &a.in},         {"out", &a.out},     {"train_out", &a.train_out},
    {"test_out", &a.test_out}, {"exclude", &a.exclude}, {"train", &a.train},
    {"task_id", &a.task_id},
  };
  const std::map<std::string, double *> numbers = {
    {"test_fraction", &a.test_fraction},
    {"std_max", &a.std_max},
  };
  for (const auto &[key, value]: cfg.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const bool overridden = cmd->count(flag) > 0;
    if (auto it = strings.find(key); it != strings.end()) {
      if (!value.is_string()) throw InputError("config key '" + key + "' must be a string");
      if (!overridden) *it->second = value.get<std::string>();
    } else if (auto it2 = numbers.find(key); it2 != numbers.end()) {
      if (!value.is_number()) throw InputError("config key '" + key + "' must be a number");
      if (!overridden) *it2->second = value.get<double>();
    } else {
      throw InputError("unknown config key '" + key + "'");
    }
  }
}

void require(const std::string &value, const char *flag) {
  if (value.empty()) throw InputError(std::string(flag) + " is required");
}

void write_record_file(const std::string &path, const std::vector<InstructionRecord> &records) {
  std::ofstream out = open_out(path);
  write_records(out, records);
}

int cmd_dedup(const BuildDatasetArgs &a, Logger &log) {
  require(a.in, "--in");
  require(a.out, "--out");
  const std::vector<InstructionRecord> records = read_records_file(a.in);
  const std::vector<InstructionRecord> kept = dedup(records);
  write_record_file(a.out, kept);
  log.event("done", {{"command", "dedup"}, {"records", records.size()}, {"kept", kept.size()}});
  return kExitOk;
}

int cmd_split(const BuildDatasetArgs &a, Logger &log) {
  require(a.in, "--in");
  require(a.train_out, "--train-out");
  require(a.test_out, "--test-out");
  if (!(a.test_fraction >= 0.0 && a.test_fraction <= 1.0)) {
    throw InputError("--test-fraction must lie in [0, 1]");
  }
  const SplitResult split = scaffold_split(read_records_file(a.in), a.test_fraction);
  for (const std::string &w: split.warnings) log.event("warning", {{"message", w}});
  write_record_file(a.train_out, split.train);
  write_record_file(a.test_out, split.test);
  log.event("done", {{"command", "split"}, {"train", split.train.size()}, {"test", split.test.size()}});
  return kExitOk;
}

int cmd_ood_logs(const BuildDatasetArgs &a, Logger &log) {
  require(a.in, "--in");
  require(a.out, "--out");
  std::set<std::string> exclude;
  if (!a.exclude.empty()) {
    for (const InstructionRecord &r: read_records_file(a.exclude)) {
      if (auto key = molecule_key(r)) exclude.insert(*key);
    }
  }
  std::vector<LabeledSolubility> entries;
  std::map<std::string, std::size_t> position;
  std::ifstream in = open_in(a.in);
  std::size_t line_no = 0;
  std::vector<Line> batch;
  while (read_batch(in, line_no, kBatchLines, batch)) {
    for (const Line &l: batch) {
      with_line(l.number, [&] {
        const json j = parse_json_line(l);
        if (!j.is_object()) throw DatasetError("expected a JSON object");
        std::string key;
        if (auto it = j.find("smiles"); it != j.end()) {
          key = canonical_smiles(parse_smiles(it->get<std::string>()));
        } else if (auto it2 = j.find("selfies"); it2 != j.end()) {
          key = canonical_smiles(parse_selfies(it2->get<std::string>()));
        } else {
          throw DatasetError("expected a 'smiles' or 'selfies' field");
        }
        std::vector<double> values;
        if (auto it = j.find("labels"); it != j.end()) {
          values = it->get<std::vector<double>>();
        } else if (auto it2 = j.find("label"); it2 != j.end()) {
          values.push_back(it2->get<double>());
        } else {
          throw DatasetError("expected a 'label' or 'labels' field");
        }
        auto [pos, fresh] = position.emplace(key, entries.size());
        if (fresh) entries.push_back({key, {}});
        std::vector<double> &dst = entries[pos->second].labels;
        dst.insert(dst.end(), values.begin(), values.end());
      });
    }
  }
  const std::vector<InstructionRecord> kept =
    ood_solubility_filter(entries, exclude, a.std_max, a.task_id);
  write_record_file(a.out, kept);
  log.event("done", {{"command", "ood-logs"}, {"molecules", entries.size()}, {"kept", kept.size()}});
  return kExitOk;
}

int cmd_ood_rxn(const BuildDatasetArgs &a, Logger &log) {
  require(a.in, "--in");
  require(a.train, "--train");
  require(a.train_out, "--train-out");
  require(a.test_out, "--test-out");
  std::set<std::string> used;
  const SplitResult split = ood_reaction_filter(read_records_file(a.in), read_records_file(a.train),
                                                a.test_fraction, &used);
  for (const std::string &w: split.warnings) log.event("warning", {{"message", w}});
  write_record_file(a.train_out, split.train);
  write_record_file(a.test_out, split.test);
  log.event("done", {{"command", "ood-rxn"}, {"train", split.train.size()}, {"test", split.test.size()}});
  return kExitOk;
}

// train-toy

struct TrainToyArgs {
  std::string mode = "sft_plus_molpo";
  std::string pairs;
  int synthetic = 0;
  double ratio = 0.3;
  std::string config;
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string key_table;
  std::string group_table;
};

std::vector<std::string> sequence_tokens(const std::string &text) {
  if (looks_like_selfies(text)) return split_selfies(text);
  return tokenize_text(text);
}

std::vector<toy::ToyExample> examples_from_pairs(const std::string &path, toy::Vocab &vocab,
                                                 bool need_pairs, const KeyTable *groups) {
  std::vector<toy::ToyExample> out;
  std::ifstream in = open_in(path);
  std::size_t line_no = 0;
  std::vector<Line> batch;
  auto encode = [&](const std::vector<std::string> &tokens, std::vector<int> &ids) {
    for (const std::string &t: tokens) {
      if (!vocab.contains(t) && vocab.size() >= toy::kMaxVocab) {
        throw DatasetError("vocabulary exceeds " + std::to_string(toy::kMaxVocab) + " tokens");
      }
      ids.push_back(vocab.add(t));
    }
  };
  while (read_batch(in, line_no, kBatchLines, batch)) {
    for (const Line &l: batch) {
      with_line(l.number, [&] {
        const json j = parse_json_line(l);
        const InstructionRecord r = record_from_json(j);
        if (!r.input_selfies) throw DatasetError("record has no input_selfies");
        toy::ToyExample ex;
        ex.task_id = r.task_id;
        const MolGraph chosen = parse_selfies(*r.input_selfies);
        ex.chosen = toy::featurize(chosen);
        if (auto it = j.find("rejected_selfies"); it != j.end()) {
          ex.rejected = toy::featurize(parse_selfies(it->get<std::string>()));
          ex.has_rejected = true;
        } else if (need_pairs) {
          throw DatasetError("record has no rejected_selfies");
        }
        encode(tokenize_text(r.instruction), ex.context);
        encode(split_selfies(*r.input_selfies), ex.context);
        encode(sequence_tokens(r.target), ex.target);
        if (ex.target.empty()) throw DatasetError("record has an empty target");
        if (groups) {
          for (std::uint8_t bit: functional_groups(chosen, *groups)) ex.groups.push_back(bit);
        }
        out.push_back(std::move(ex));
      });
    }
  }
  if (out.empty()) throw InputError("'" + path + "' holds no records");
  return out;
}

toy::TrainConfig train_config(const TrainToyArgs &a, int *synthetic, double *ratio,
                              bool *has_seed) {
  toy::TrainConfig cfg;
  cfg.mode = toy::parse_train_mode(a.mode);
  if (a.config.empty()) return cfg;
  std::ifstream in = open_in(a.config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw InputError("'" + a.config + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("'" + a.config + "' must hold a JSON object");
  static const std::set<std::string> kMolpoKeys = {"beta", "lambda_margin", "lambda_clip", "c",
                                                   "ema_decay", "preset"};
  static const std::set<std::string> kTrainKeys = {"steps", "batch_size", "learning_rate",
                                                   "trace_every", "seed", "zero_output_init",
                                                   "synthetic", "ratio"};
  json molpo = json::object();
  for (const auto &[key, value]: j.items()) {
    if (kMolpoKeys.contains(key)) {
      molpo[key] = value;
    } else if (!kTrainKeys.contains(key)) {
      throw InputError("unknown config key '" + key + "'");
    }
  }
  cfg.molpo = MolpoConfig::from_json(molpo);
  try {
    cfg.steps = j.value("steps", cfg.steps);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.trace_every = j.value("trace_every", cfg.trace_every);
    cfg.zero_output_init = j.value("zero_output_init", cfg.zero_output_init);
    *has_seed = j.contains("seed");
    if (*has_seed) cfg.seed = j.at("seed").get<std::uint64_t>();
    *synthetic = j.value("synthetic", *synthetic);
    *ratio = j.value("ratio", *ratio);
  } catch (const json::exception &e) {
    throw InputError("'" + a.config + "': " + e.what());
  }
  return cfg;
}

int cmd_train_toy(const TrainToyArgs &a, CLI::App *cmd, Logger &log) {
  int synthetic = 0;
  double ratio = 0.3;
  bool config_seed = false;
  toy::TrainConfig cfg = train_config(a, &synthetic, &ratio, &config_seed);
  if (cmd->count("--synthetic")) synthetic = a.synthetic;
  if (cmd->count("--ratio")) ratio = a.ratio;
  if (a.seed) {
    cfg.seed = *a.seed;
  } else if (!config_seed) {
    throw InputError("--seed is required (or a 'seed' config key)");
  }
  if (a.pairs.empty() == (synthetic <= 0)) {
    throw InputError("give exactly one of --pairs and --synthetic");
  }
  if (cfg.steps < 0 || cfg.batch_size < 1) throw InputError("steps must be >= 0 and batch_size >= 1");
  require(a.out, "--out");
  log.event("seed", {{"command", "train-toy"}, {"seed", cfg.seed}});

  std::optional<KeyTable> key_storage, group_storage;
  const KeyTable &groups = a.group_table.empty() ? default_group_table()
                                                 : *(group_storage = KeyTable::load(a.group_table));
  toy::Vocab vocab;
  std::vector<toy::ToyExample> examples;
  if (synthetic > 0) {
    toy::SyntheticTask task =
      toy::make_synthetic_task(synthetic, cfg.seed, key_table(a.key_table, key_storage), ratio);
    vocab = std::move(task.vocab);
    examples = std::move(task.examples);
  } else {
    examples = examples_from_pairs(a.pairs, vocab, cfg.mode == toy::TrainMode::kSftPlusMolpo,
                                   &groups);
  }
  toy::ModelDims dims;
  dims.vocab = vocab.size();
  dims.groups = groups.width();
  log.event("config", {{"mode", std::string(toy::to_string(cfg.mode))},
                       {"examples", examples.size()},
                       {"vocab", vocab.size()},
                       {"steps", cfg.steps},
                       {"batch_size", cfg.batch_size},
                       {"learning_rate", cfg.learning_rate},
                       {"molpo", cfg.molpo.to_json()}});

  const toy::TrainResult result = toy::train(examples, dims, cfg);
  std::ofstream params = open_out(a.out);
  result.params.save(params, vocab);
  if (!a.trace.empty()) {
    std::ofstream trace = open_out(a.trace);
    toy::write_trace_csv(trace, result.trace);
  }
  const toy::TraceRow &last = result.trace.back();
  json done = {{"command", "train-toy"}, {"step", last.step}};
  auto put = [&](const char *key, double v) { done[key] = std::isnan(v) ? json(nullptr) : json(v); };
  put("l_sft", last.l_sft);
  put("l_molpo", last.l_molpo);
  put("gdr", last.gdr);
  put("l_func", last.l_func);
  log.event("done", done);
  return kExitOk;
}

// eval

struct EvalArgs {
  std::string pred;
  std::string ref;
  std::string task_group;
  std::string out;
  std::optional<double> train_mean;
};

std::string json_text(const json &j, const char *field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end()) throw DatasetError(std::string("missing field '") + field + "'", line);
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw DatasetError(std::string("field '") + field + "' must be a string or number", line);
}

std::vector<std::string> read_field(const std::string &path, const char *field) {
  std::vector<std::string> values;
  std::ifstream in = open_in(path);
  std::size_t line_no = 0;
  std::vector<Line> batch;
  while (read_batch(in, line_no, kBatchLines, batch)) {
    for (const Line &l: batch) values.push_back(json_text(parse_json_line(l), field, l.number));
  }
  return values;
}

int parse_binary_label(const std::string &text, std::size_t line) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes") return 1;
  if (t == "0" || t == "false" || t == "no") return 0;
  throw DatasetError("reference label '" + text + "' is not binary", line);
}

double mean_of(const std::vector<double> &v) {
  double s = 0;
  for (double x: v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

int cmd_eval(const EvalArgs &a, std::ostream &out, Logger &log) {
  const TaskGroup group = [&] {
    try {
      return parse_task_group(a.task_group);
    } catch (const std::exception &) {
      throw InputError("unknown task group '" + a.task_group + "'");
    }
  }();
  const std::vector<std::string> preds = read_field(a.pred, "prediction");
  const std::vector<std::string> refs = read_field(a.ref, "target");
  if (preds.size() != refs.size()) {
    throw InputError("prediction and reference counts differ (" + std::to_string(preds.size())
                     + " vs " + std::to_string(refs.size()) + ")");
  }
  if (preds.empty()) throw InputError("no predictions to evaluate");
  const std::size_t n = preds.size();

  json report = {{"task_group", std::string(to_string(group))}, {"n", n}};
  switch (group) {
  case TaskGroup::kMolgen:
  case TaskGroup::kReaction: {
    std::vector<double> ex, maccs, mor, path;
    for (std::size_t i = 0; i < n; ++i) {
      with_line(i + 1, [&] {
        ex.push_back(exact(preds[i], refs[i]));
        maccs.push_back(fts(preds[i], refs[i], FtsKind::kMaccs));
        mor.push_back(fts(preds[i], refs[i], FtsKind::kMorgan));
        path.push_back(fts(preds[i], refs[i], FtsKind::kPath));
      });
    }
    const double valid = validity(preds);
    report["exact"] = mean_of(ex);
    report["validity"] = valid;
    report["maccs_fts"] = mean_of(maccs);
    report["morgan_fts"] = mean_of(mor);
    report["rdk_fts"] = mean_of(path);
    report["invalid_rate"] = 1.0 - valid;
    break;
  }
  case TaskGroup::kCaptioning: {
    std::vector<std::vector<std::string>> pt, rt;
    std::vector<double> r1, r2, rl, met;
    for (std::size_t i = 0; i < n; ++i) {
      pt.push_back(tokenize_text(preds[i]));
      rt.push_back(tokenize_text(refs[i]));
      r1.push_back(rouge(preds[i], refs[i], RougeVariant::kR1));
      r2.push_back(rouge(preds[i], refs[i], RougeVariant::kR2));
      rl.push_back(rouge(preds[i], refs[i], RougeVariant::kRL));
      met.push_back(meteor_lite(preds[i], refs[i]));
    }
    report["bleu2"] = corpus_bleu(pt, rt, 2);
    report["bleu4"] = corpus_bleu(pt, rt, 4);
    report["rouge1"] = mean_of(r1);
    report["rouge2"] = mean_of(r2);
    report["rougeL"] = mean_of(rl);
    report["meteor"] = mean_of(met);
    report["invalid_rate"] = 0.0;
    break;
  }
  case TaskGroup::kPropertyRegression: {
    std::vector<double> ref_values;
    for (std::size_t i = 0; i < n; ++i) {
      const std::optional<double> v = parse_number(refs[i]);
      if (!v) throw DatasetError("reference '" + refs[i] + "' is not a number", i + 1);
      ref_values.push_back(*v);
    }
    RegressionMetrics m;
    try {
      m = regression_metrics(preds, ref_values, a.train_mean);
    } catch (const std::invalid_argument &e) {
      throw InputError(std::string(e.what()) + " (pass --train-mean)");
    }
    report["rmse"] = m.rmse;
    report["mae"] = m.mae;
    report["invalid_rate"] = m.invalid_rate;
    break;
  }
  case TaskGroup::kPropertyClassification: {
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t invalid = 0;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(parse_binary_label(refs[i], i + 1));
      const std::optional<double> s = parse_number(preds[i]);
      if (s && *s >= 0.0 && *s <= 1.0) {
        scores.push_back(*s);
      } else {
        scores.push_back(0.5);
        ++invalid;
      }
    }
    try {
      report["roc_auc"] = roc_auc(scores, labels);
    } catch (const std::invalid_argument &e) {
      throw InputError(e.what());
    }
    report["invalid_rate"] = static_cast<double>(invalid) / static_cast<double>(n);
    break;
  }
  case TaskGroup::kNameConversion: {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += trim(preds[i]) == trim(refs[i]);
    report["exact_string"] = static_cast<double>(hits) / static_cast<double>(n);
    report["invalid_rate"] = 0.0;
    break;
  }
  }
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    std::ofstream file = open_out(a.out);
    file << text;
  }
  log.event("done", {{"command", "eval"}, {"n", n}});
  return kExitOk;
}

// gdr

int cmd_gdr(const std::string &path, std::ostream &out) {
  std::vector<std::pair<double, double>> pairs;
  std::ifstream in = open_in(path);
  std::size_t line_no = 0;
  std::vector<Line> batch;
  while (read_batch(in, line_no, kBatchLines, batch)) {
    for (const Line &l: batch) {
      with_line(l.number, [&] {
        const json j = parse_json_line(l);
        pairs.emplace_back(j.at("r_w").get<double>(), j.at("r_l").get<double>());
      });
    }
  }
  if (pairs.empty()) throw InputError("'" + path + "' holds no reward pairs");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", gdr(pairs));
  out << buf << '\n';
  return kExitOk;
}

std::string version_text() {
  std::string text = std::string("mollm-toolkit ") + kToolkitVersion;
  try {
    text += "\nkey table: " + default_key_table().version();
    text += "\ngroup table: " + default_group_table().version();
  } catch (const std::exception &e) {
    text += std::string("\ntables unavailable: ") + e.what();
  }
  return text;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Logger log(err);
  CLI::App app {"Molecular instruction-tuning data and preference-optimization toolkit",
                "mollm"};
  app.set_version_flag("--version", version_text);
  app.require_subcommand(1);

  CanonicalizeArgs canon;
  CLI::App *c_canon = app.add_subcommand("canonicalize", "Print canonical SMILES (or SELFIES)");
  add_molecule_args(c_canon, canon.mol);
  c_canon->add_option("--to", canon.to, "Output notation: smiles or selfies");

  FingerprintArgs fp;
  CLI::App *c_fp = app.add_subcommand("fingerprint", "Print width-prefixed hex fingerprints");
  add_molecule_args(c_fp, fp.mol);
  c_fp->add_option("--kind", fp.kind, "maccs, morgan or path");
  c_fp->add_option("--radius", fp.radius, "Morgan radius");
  c_fp->add_option("--width", fp.width, "Bit width for morgan and path");
  c_fp->add_option("--min-path", fp.min_path, "Shortest path length in bonds");
  c_fp->add_option("--max-path", fp.max_path, "Longest path length in bonds");
  c_fp->add_option("--key-table", fp.key_table, "Key table file");

  MakePairsArgs mp;
  CLI::App *c_mp = app.add_subcommand("make-pairs", "Build preference pairs by key perturbation");
  c_mp->add_option("--in", mp.in, "Instruction records (JSONL)")->required();
  c_mp->add_option("--out", mp.out, "Pairs output (JSONL)")->required();
  c_mp->add_option("--ratio", mp.ratio, "Fraction of keys to perturb");
  c_mp->add_option("--seed", mp.seed, "Global seed")->required();
  c_mp->add_option("--key-table", mp.key_table, "Key table file");
  c_mp->add_option("--workers", mp.workers, "Worker threads")->check(CLI::PositiveNumber);

  SamplePretrainArgs sp;
  CLI::App *c_sp = app.add_subcommand("sample-pretrain", "Draw a group-balanced pre-training sample");
  c_sp->add_option("--labels", sp.labels, "Group labels (JSONL)")->required();
  c_sp->add_option("--n", sp.n, "Number of draws")->required();
  c_sp->add_option("--seed", sp.seed, "Global seed")->required();
  c_sp->add_option("--out", sp.out, "Output index file")->required();
  c_sp->add_flag("--filter", sp.filter, "Drop the most common and the rarest groups first");
  c_sp->add_option("--retained", sp.retained, "File listing the group columns to keep");
  c_sp->add_option("--group-table", sp.group_table, "Functional-group table file");

  BuildDatasetArgs bd;
  CLI::App *c_bd = app.add_subcommand("build-dataset", "Dataset construction stages");
  c_bd->require_subcommand(1);
  std::map<std::string, CLI::App *> stages;
  for (const char *name: {"dedup", "split", "ood-logs", "ood-rxn"}) {
    CLI::App *s = c_bd->add_subcommand(name);
    s->add_option("--config", bd.config, "JSON config; flags override its keys");
    s->add_option("--in", bd.in, "Input file");
    s->add_option("--out", bd.out, "Output records");
    s->add_option("--train-out", bd.train_out, "Train records output");
    s->add_option("--test-out", bd.test_out, "Test records output");
    s->add_option("--exclude", bd.exclude, "Records whose molecules are excluded");
    s->add_option("--train", bd.train, "Training records for the overlap check");
    s->add_option("--task-id", bd.task_id, "Task id of the emitted records");
    s->add_option("--test-fraction", bd.test_fraction, "Target test fraction");
    s->add_option("--std-max", bd.std_max, "Largest allowed label standard deviation");
    stages[name] = s;
  }

  TrainToyArgs tt;
  CLI::App *c_tt = app.add_subcommand("train-toy", "Train the toy graph-conditioned scorer");
  c_tt->add_option("--mode", tt.mode, "sft_only, sft_plus_molpo or funcgroup_pretrain");
  c_tt->add_option("--pairs", tt.pairs, "Training pairs (JSONL)");
  c_tt->add_option("--synthetic", tt.synthetic, "Generate the synthetic task with N examples");
  c_tt->add_option("--ratio", tt.ratio, "Perturbation ratio for --synthetic");
  c_tt->add_option("--config", tt.config, "JSON config (MolPO and training keys)");
  c_tt->add_option("--out", tt.out, "Parameter file")->required();
  c_tt->add_option("--trace", tt.trace, "Trace CSV");
  c_tt->add_option("--seed", tt.seed, "Global seed");
  c_tt->add_option("--key-table", tt.key_table, "Key table file");
  c_tt->add_option("--group-table", tt.group_table, "Functional-group table file");

  EvalArgs ev;
  CLI::App *c_ev = app.add_subcommand("eval", "Score predictions against references");
  c_ev->add_option("--pred", ev.pred, "Predictions (JSONL with 'prediction')")->required();
  c_ev->add_option("--ref", ev.ref, "References (JSONL with 'target')")->required();
  c_ev->add_option("--task-group", ev.task_group, "Task group")->required();
  c_ev->add_option("--out", ev.out, "Report file (default: standard output)");
  c_ev->add_option("--train-mean", ev.train_mean, "Imputation value for unparseable numbers");

  std::string gdr_path;
  CLI::App *c_gdr = app.add_subcommand("gdr", "Graph discrimination ratio of scored pairs");
  c_gdr->add_option("--pairs", gdr_path, "JSONL with r_w and r_l")->required();

  std::vector<const char *> argv;
  for (const std::string &s: args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success &e) {
    out << (dynamic_cast<const CLI::CallForVersion *>(&e) ? e.what() : app.help()) << '\n';
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << e.what() << "\n\n" << app.help() << '\n';
    return kExitInputError;
  }

  try {
    if (c_canon->parsed()) return cmd_canonicalize(canon, out);
    if (c_fp->parsed()) return cmd_fingerprint(fp, out);
    if (c_mp->parsed()) return cmd_make_pairs(mp, log);
    if (c_sp->parsed()) return cmd_sample_pretrain(sp, log);
    if (c_bd->parsed()) {
      for (auto &[name, s]: stages) {
        if (!s->parsed()) continue;
        apply_dataset_config(bd, s);
        require_readable(bd.in);
        if (name == "dedup") return cmd_dedup(bd, log);
        if (name == "split") return cmd_split(bd, log);
        if (name == "ood-logs") return cmd_ood_logs(bd, log);
        return cmd_ood_rxn(bd, log);
      }
    }
    if (c_tt->parsed()) return cmd_train_toy(tt, c_tt, log);
    if (c_ev->parsed()) return cmd_eval(ev, out, log);
    if (c_gdr->parsed()) return cmd_gdr(gdr_path, out);
  } catch (const InputError &e) {
    log.event("error", {{"kind", "input"}, {"message", e.what()}});
    return kExitInputError;
  } catch (const DatasetError &e) {
    log.event("error", {{"kind", "input"}, {"message", e.what()}});
    return kExitInputError;
  } catch (const MolError &e) {
    log.event("error", {{"kind", "input"}, {"message", e.what()}});
    return kExitInputError;
  } catch (const std::invalid_argument &e) {
    log.event("error", {{"kind", "input"}, {"message", e.what()}});
    return kExitInputError;
  } catch (const json::exception &e) {
    log.event("error", {{"kind", "input"}, {"message", e.what()}});
    return kExitInputError;
  } catch (const std::exception &e) {
    log.event("error", {{"kind", "internal"}, {"message", e.what()}});
    return kExitInternalError;
  }
  err << app.help() << '\n';
  return kExitInputError;
}

int run(int argc, const char *const *argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mollm::cli
