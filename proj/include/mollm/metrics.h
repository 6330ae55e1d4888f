//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_METRICS_H_
#define MOLLM_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mollm/molgraph.h"

namespace mollm {

enum class MolFormat : std::uint8_t { kAuto, kSmiles, kSelfies };

/// Parses and valence-checks a molecule string; nullopt when invalid.
/// kAuto reads text made only of bracketed symbols as SELFIES when that
/// succeeds and falls back to SMILES otherwise.
std::optional<MolGraph> parse_molecule(std::string_view text,
                                       MolFormat format = MolFormat::kAuto);

/// 1 when both molecules have the same canonical form, 0 otherwise or when
/// the prediction is invalid. Throws MolError for an invalid reference.
int exact(std::string_view pred, std::string_view ref, MolFormat format = MolFormat::kAuto);

/// Fraction of valid molecules; 0 for an empty list.
double validity(std::span<const std::string> preds, MolFormat format = MolFormat::kAuto);

enum class FtsKind : std::uint8_t { kMaccs, kMorgan, kPath };

/// Tanimoto similarity of the chosen fingerprints; 0 when either side is
/// invalid.
double fts(std::string_view pred, std::string_view ref, FtsKind kind,
           MolFormat format = MolFormat::kAuto);

/// Lowercased tokens split at whitespace and punctuation.
std::vector<std::string> tokenize_text(std::string_view text);

/// Sentence BLEU with uniform weights over 1..max_n grams, clipped counts,
/// brevity penalty and no smoothing.
double bleu(std::span<const std::string> pred, std::span<const std::string> ref, int max_n);

/// Corpus BLEU: n-gram statistics and lengths are pooled before combining.
double corpus_bleu(const std::vector<std::vector<std::string>> &preds,
                   const std::vector<std::vector<std::string>> &refs, int max_n);

enum class RougeVariant : std::uint8_t { kR1, kR2, kRL };

/// ROUGE F1 over tokenize_text tokens.
double rouge(std::string_view pred, std::string_view ref, RougeVariant variant);

/// Suffix-stripping stemmer used for METEOR matching ("running" -> "run").
std::string stem(std::string_view word);

/// METEOR without synonyms: exact then stem unigram alignment, recall-weighted
/// harmonic mean and a fragmentation penalty 0.5 * ((chunks - 1) / (m - 1))^3.
double meteor_lite(std::string_view pred, std::string_view ref);

struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double invalid_rate = 0.0;
};

/// Unparseable predictions are replaced by impute_value and counted.
RegressionMetrics regression_metrics(std::span<const std::string> preds,
                                     std::span<const double> refs,
                                     std::optional<double> impute_value = std::nullopt);

RegressionMetrics regression_metrics(std::span<const double> preds,
                                     std::span<const double> refs);

/// Parses a whole string as a finite number.
std::optional<double> parse_number(std::string_view text);

/// Area under the ROC curve via the Mann-Whitney statistic; ties count 1/2.
/// Throws unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace mollm

#endif  // MOLLM_METRICS_H_
