//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/element.h"

#include <algorithm>
#include <array>

namespace mollm {
namespace {

constexpr std::array<std::string_view, kMaxAtomicNumber + 1> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

struct MainGroup {
  int z;
  int valence_electrons;
  int period;
};

// Elements with a valence model. Everything else is accepted as written.
constexpr std::array<MainGroup, 18> kMainGroup = {{
    {1, 1, 1},   {5, 3, 2},   {6, 4, 2},   {7, 5, 2},   {8, 6, 2},
    {9, 7, 2},   {14, 4, 3},  {15, 5, 3},  {16, 6, 3},  {17, 7, 3},
    {32, 4, 4},  {33, 5, 4},  {34, 6, 4},  {35, 7, 4},  {51, 5, 5},
    {52, 6, 5},  {53, 7, 5},  {50, 4, 5},
}};

}  // namespace

std::optional<int> atomic_number(std::string_view symbol) {
  for (int z = 1; z <= kMaxAtomicNumber; ++z) {
    if (kSymbols[z] == symbol) return z;
  }
  return std::nullopt;
}

std::string_view element_symbol(int z) {
  if (z < 1 || z > kMaxAtomicNumber) return {};
  return kSymbols[z];
}

bool is_organic_subset(int z) {
  switch (z) {
  case 5: case 6: case 7: case 8: case 9:
  case 15: case 16: case 17: case 35: case 53:
    return true;
  default:
    return false;
  }
}

bool may_be_aromatic(int z) {
  switch (z) {
  case 5: case 6: case 7: case 8: case 15: case 16:
  case 33: case 34: case 52:
    return true;
  default:
    return false;
  }
}

std::optional<std::vector<int>> allowed_valences(int z, int charge) {
  if (z == 1) {
    if (charge == 0) return std::vector<int> {1};
    return std::vector<int> {0};
  }

  auto it = std::find_if(kMainGroup.begin(), kMainGroup.end(),
                         [z](const MainGroup &g) { return g.z == z; });
  if (it == kMainGroup.end()) return std::nullopt;

  const int e = it->valence_electrons - charge;
  const bool second_period = it->period == 2;
  switch (e) {
  case 1: return std::vector<int> {1};
  case 2: return std::vector<int> {2};
  case 3: return std::vector<int> {3};
  case 4: return std::vector<int> {4};
  case 5:
    if (second_period) return std::vector<int> {3};
    return std::vector<int> {3, 5};
  case 6:
    if (second_period) return std::vector<int> {2};
    return std::vector<int> {2, 4, 6};
  case 7: return std::vector<int> {1};
  case 8: return std::vector<int> {0};
  default: return std::nullopt;
  }
}

std::optional<int> max_valence(int z, int charge) {
  auto vals = allowed_valences(z, charge);
  if (!vals) return std::nullopt;
  return vals->back();
}

std::optional<int> fill_valence(int z, int charge, int used) {
  auto vals = allowed_valences(z, charge);
  if (!vals) return std::nullopt;
  for (int v: *vals) {
    if (v >= used) return v;
  }
  return std::nullopt;
}

}  // namespace mollm
