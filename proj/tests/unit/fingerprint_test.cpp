//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "mollm/fingerprint.h"
#include "mollm/hash.h"
#include "mollm/random_mol.h"
#include "mollm/smiles.h"
#include "oracles.h"

namespace {

using namespace mollm;

Fingerprint bits(int width, std::initializer_list<int> on) {
  Fingerprint fp(width);
  for (int b: on) fp.set(b);
  return fp;
}

TEST(MorganTest, MethaneRadiusZero) {
  EXPECT_EQ(morgan(parse_smiles("C"), 0).count(), 1);
}

TEST(MorganTest, EthaneCarbonsShareInvariant) {
  EXPECT_EQ(morgan(parse_smiles("CC"), 0).count(), 1);
  EXPECT_EQ(morgan(parse_smiles("CO"), 0).count(), 2);
}

TEST(MorganTest, PermutationInvariance) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const MolGraph g = random_molecule(rng);
    std::vector<int> perm(g.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    EXPECT_EQ(morgan(g), morgan(g.permuted(perm)));
  }
}

TEST(MorganTest, MethaneVersusBenzeneShareNothing) {
  const Fingerprint a = morgan(parse_smiles("C"));
  const Fingerprint b = morgan(parse_smiles("c1ccccc1"));
  EXPECT_EQ(a.count(), 3);
  EXPECT_EQ(b.count(), 3);
  EXPECT_DOUBLE_EQ(tanimoto(a, b), 0.0);
}

TEST(PathFpTest, SingleAtomIsEmpty) {
  EXPECT_EQ(path_fp(parse_smiles("C")).count(), 0);
}

TEST(PathFpTest, EthaneOneBond) {
  EXPECT_EQ(path_fp(parse_smiles("CC"), 1, 1).count(), 1);
}

TEST(PathFpTest, ButaneAndIsobutaneDiffer) {
  const MolGraph butane = parse_smiles("CCCC");
  const MolGraph isobutane = parse_smiles("CC(C)C");
  std::multiset<std::vector<std::int64_t>> a, b;
  for (const auto &p: oracle::simple_paths(butane, 1, 7)) a.insert(oracle::path_label(butane, p));
  for (const auto &p: oracle::simple_paths(isobutane, 1, 7)) {
    b.insert(oracle::path_label(isobutane, p));
  }
  EXPECT_NE(a, b);
  EXPECT_NE(path_fp(butane), path_fp(isobutane));
}

TEST(PathFpTest, BitsMatchPathEnumeration) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const MolGraph g = random_molecule(rng);
    const int min_len = 1 + i % 2;
    const int max_len = 3 + i % 5;
    Fingerprint expected(kDefaultFingerprintWidth);
    for (const auto &p: oracle::simple_paths(g, min_len, max_len)) {
      const std::vector<std::int64_t> label = oracle::path_label(g, p);
      expected.set(static_cast<int>(hash_words(label) % kDefaultFingerprintWidth));
    }
    EXPECT_EQ(path_fp(g, min_len, max_len), expected) << write_smiles(g);
  }
}

TEST(PathFpTest, RejectsBadLengths) {
  EXPECT_THROW(path_fp(parse_smiles("CC"), 0, 3), std::invalid_argument);
  EXPECT_THROW(path_fp(parse_smiles("CC"), 3, 2), std::invalid_argument);
  EXPECT_THROW(path_fp(parse_smiles("CC"), 1, 8), std::invalid_argument);
}

TEST(TanimotoTest, HandExamples) {
  EXPECT_DOUBLE_EQ(tanimoto(bits(8, {1, 2, 3}), bits(8, {2, 3, 4})), 0.5);
  EXPECT_DOUBLE_EQ(tanimoto(bits(8, {1, 2}), bits(8, {1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(tanimoto(bits(8, {1}), bits(8, {2})), 0.0);
  EXPECT_THROW(tanimoto(bits(8, {1}), bits(16, {1})), std::invalid_argument);
}

TEST(FingerprintTest, HexRoundTrip) {
  const Fingerprint fp = bits(20, {0, 9, 19});
  EXPECT_EQ(fp.to_hex(), "20:010208");
  EXPECT_EQ(Fingerprint::from_hex(fp.to_hex()), fp);
}

}  // namespace
