//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_PERTURB_H_
#define MOLLM_PERTURB_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mollm/dataset.h"
#include "mollm/molgraph.h"
#include "mollm/substruct.h"

namespace mollm {

/// What a perturbation did, by key index. The selected lists are the keys
/// drawn before skip rules; removed/added are the ones that were applied.
struct PerturbLog {
  int num_present = 0;
  int num_selected = 0;
  std::vector<int> selected_removals;
  std::vector<int> selected_additions;
  std::vector<int> removed;
  std::vector<int> added;
};

nlohmann::json perturb_log_to_json(const PerturbLog &log, const KeyTable &table);

/// Rejected graph for preference training. With P the present keys and
/// n = ceil(ratio * |P|), removes one embedding of each of n distinct present
/// keys (skipping embeddings that overlap earlier removals or would empty the
/// molecule), then attaches the templates of up to n distinct absent keys by
/// a single bond to random heavy atoms with spare valence. Both key
/// draws are without replacement. Deterministic in (g, table, ratio, seed).
MolGraph perturb_graph(const MolGraph &g, const KeyTable &table, double ratio,
                       std::uint64_t seed, PerturbLog *log = nullptr);

struct PreferencePair {
  MolGraph chosen;
  MolGraph rejected;
  std::string selfies;
  std::string instruction;
  std::string target;
  std::string task_id;
  PerturbLog log;
};

/// Pairs the record's input molecule with a perturbed copy.
PreferencePair make_pair(const InstructionRecord &record, const KeyTable &table,
                         double ratio, std::uint64_t seed);

}  // namespace mollm

#endif  // MOLLM_PERTURB_H_
