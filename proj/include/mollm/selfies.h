//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_SELFIES_H_
#define MOLLM_SELFIES_H_

#include <string>
#include <string_view>
#include <vector>

#include "mollm/molgraph.h"

namespace mollm {

/// Splits a SELFIES string into bracketed symbols; '.' is returned as its
/// own symbol. Throws MolError(kUnknownToken) on text outside brackets.
std::vector<std::string> split_selfies(std::string_view text);

/// Decodes SELFIES. Every sequence of supported symbols yields a
/// valence-valid graph: bonds are truncated to the remaining capacity of
/// each atom, and branch/ring symbols that cannot be honoured are ignored.
/// The only error is MolError(kUnknownToken), whose position is the symbol
/// index.
MolGraph parse_selfies(std::string_view text);

/// Encodes a graph as SELFIES. Canonical atom order is used, so isomorphic
/// graphs encode identically. Throws MolError(kVocabulary) for elements or
/// charges without a valence rule.
std::string to_selfies(const MolGraph &g);

/// True when the symbol (e.g. "[=C]", "[Branch1]") is part of the decoder
/// vocabulary.
bool is_selfies_symbol(std::string_view symbol);

}  // namespace mollm

#endif  // MOLLM_SELFIES_H_
