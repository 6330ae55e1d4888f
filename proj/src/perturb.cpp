//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/perturb.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mollm/element.h"
#include "mollm/random.h"
#include "mollm/selfies.h"

namespace mollm {

namespace {

// 0: no spare valence; 1: under-filled atom that takes a bond as is;
// 2: takes a bond in place of a hydrogen.
int attach_mode(const MolGraph &g, int v) {
  const Atom &a = g.atom(v);
  if (a.element == 1) return 0;
  if (auto allowed = allowed_valences(a.element, a.formal_charge)) {
    const int used = g.bond_order_sum(v) + a.explicit_h + 1;
    if (std::find(allowed->begin(), allowed->end(), used) != allowed->end()) return 1;
  }
  return a.explicit_h > 0 ? 2 : 0;
}

std::vector<int> attachment_sites(const MolGraph &g) {
  std::vector<int> out;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (attach_mode(g, v) != 0) out.push_back(v);
  }
  return out;
}

std::vector<bool> choose_removals(const MolGraph &g, const KeyTable &table,
                                  const std::vector<int> &keys, Rng &rng,
                                  std::vector<int> &removed) {
  std::vector<bool> remove(g.num_atoms(), false);
  int remaining = g.num_atoms();
  for (int k: keys) {
    const auto embeddings = match(table.entry(k).pattern, g);
    std::vector<const std::vector<int> *> usable;
    for (const auto &emb: embeddings) {
      bool overlaps = false;
      for (int v: emb) overlaps = overlaps || remove[v];
      if (!overlaps && static_cast<int>(emb.size()) < remaining) usable.push_back(&emb);
    }
    if (usable.empty()) continue;
    const auto &emb = *usable[rng.uniform_index(usable.size())];
    for (int v: emb) remove[v] = true;
    remaining -= static_cast<int>(emb.size());
    removed.push_back(k);
  }
  return remove;
}

bool attach(MolGraph &g, const MolGraph &fragment, Rng &rng) {
  const auto sites = attachment_sites(g);
  const auto fsites = attachment_sites(fragment);
  if (sites.empty() || fsites.empty()) return false;
  const int site = sites[rng.uniform_index(sites.size())];
  const int fsite = fsites[rng.uniform_index(fsites.size())];
  const int offset = g.num_atoms();
  for (const Atom &a: fragment.atoms()) g.add_atom(a);
  for (const Bond &b: fragment.bonds()) g.add_bond(b.a + offset, b.b + offset, b.order);
  for (int v: {site, fsite + offset}) {
    if (attach_mode(g, v) == 2) g.atom(v).explicit_h -= 1;
  }
  g.add_bond(site, fsite + offset, BondOrder::kSingle);
  return true;
}

}  // namespace

nlohmann::json perturb_log_to_json(const PerturbLog &log, const KeyTable &table) {
  auto names = [&](const std::vector<int> &keys) {
    nlohmann::json arr = nlohmann::json::array();
    for (int k: keys) arr.push_back(table.entry(k).name);
    return arr;
  };
  nlohmann::json j;
  j["num_present"] = log.num_present;
  j["num_selected"] = log.num_selected;
  j["selected_removals"] = names(log.selected_removals);
  j["selected_additions"] = names(log.selected_additions);
  j["removed"] = names(log.removed);
  j["added"] = names(log.added);
  return j;
}

MolGraph perturb_graph(const MolGraph &g, const KeyTable &table, double ratio,
                       std::uint64_t seed, PerturbLog *log) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("perturbation ratio must lie in [0, 1]");
  }
  if (g.empty()) throw MolError(MolErrorKind::kInvalidGraph, "cannot perturb an empty molecule");
  if (table.width() == 0) throw std::invalid_argument("cannot perturb with an empty key table");

  PerturbLog local;
  PerturbLog &out = log ? *log : local;
  out = PerturbLog {};

  const KeyProfile profile = maccs_profile(g, table);
  const int np = static_cast<int>(profile.present.size());
  const int n = static_cast<int>(std::ceil(ratio * np - 1e-9));
  out.num_present = np;
  out.num_selected = n;

  Rng rng(seed);
  for (int i: rng.sample_without_replacement(np, n)) {
    out.selected_removals.push_back(profile.present[i]);
  }
  const int na = static_cast<int>(profile.absent.size());
  for (int i: rng.sample_without_replacement(na, n)) {
    out.selected_additions.push_back(profile.absent[i]);
  }

  MolGraph result = g;
  if (!out.selected_removals.empty()) {
    const std::vector<bool> remove =
        choose_removals(g, table, out.selected_removals, rng, out.removed);
    if (!out.removed.empty()) result = remove_atoms(g, remove);
  }

  if (!out.selected_additions.empty()) {
    result = kekulize(result);
    for (int k: out.selected_additions) {
      MolGraph fragment;
      try {
        fragment = kekulize(key_template(table.entry(k)));
      } catch (const MolError &) {
        continue;
      }
      if (attach(result, fragment, rng)) out.added.push_back(k);
    }
    perceive_aromaticity(result);
  }
  check_valence(result);
  return result;
}

PreferencePair make_pair(const InstructionRecord &record, const KeyTable &table,
                         double ratio, std::uint64_t seed) {
  if (!record.input_selfies) {
    throw std::invalid_argument("record " + record.task_id + " has no input molecule");
  }
  PreferencePair pair;
  pair.chosen = parse_selfies(*record.input_selfies);
  pair.rejected = perturb_graph(pair.chosen, table, ratio, seed, &pair.log);
  pair.selfies = *record.input_selfies;
  pair.instruction = record.instruction;
  pair.target = record.target;
  pair.task_id = record.task_id;
  return pair;
}

}  // namespace mollm
