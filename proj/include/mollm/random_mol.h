//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_RANDOM_MOL_H_
#define MOLLM_RANDOM_MOL_H_

#include "mollm/molgraph.h"
#include "mollm/random.h"

namespace mollm {

struct RandomMolOptions {
  int min_steps = 1;
  int max_steps = 8;
  int max_heavy_atoms = 40;
  double ring_closure_prob = 0.1;
  double charge_prob = 0.05;
};

/// A random valence-valid molecule grown from common ring and chain
/// fragments by substitution, occasional ring closure and ionization.
/// Deterministic for a given generator state.
MolGraph random_molecule(Rng &rng, const RandomMolOptions &opts = {});

}  // namespace mollm

#endif  // MOLLM_RANDOM_MOL_H_
