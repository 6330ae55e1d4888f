//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/metrics.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mollm/canonical.h"
#include "mollm/fingerprint.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"
#include "mollm/substruct.h"

namespace mollm {

namespace {

bool only_bracket_symbols(std::string_view text) {
  if (text.empty()) return false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[') return false;
    const std::size_t close = text.find(']', i);
    if (close == std::string_view::npos || close == i + 1) return false;
    i = close + 1;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return out;
}

int clipped_overlap(const NgramCounts &pred, const NgramCounts &ref) {
  int m = 0;
  for (const auto &[g, c]: pred) {
    auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

double f1(double overlap, double npred, double nref) {
  if (overlap <= 0 || npred <= 0 || nref <= 0) return 0.0;
  const double p = overlap / npred;
  const double r = overlap / nref;
  return 2 * p * r / (p + r);
}

int lcs_length(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

double bleu_from_counts(const std::vector<double> &matches,
                        const std::vector<double> &totals, double pred_len,
                        double ref_len) {
  if (pred_len <= 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < matches.size(); ++n) {
    if (totals[n] <= 0 || matches[n] <= 0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
  }
  const double bp = pred_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / pred_len);
  return bp * std::exp(log_sum / static_cast<double>(matches.size()));
}

}  // namespace

std::optional<MolGraph> parse_molecule(std::string_view text, MolFormat format) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  auto attempt = [&](bool selfies) -> std::optional<MolGraph> {
    try {
      MolGraph g = selfies ? parse_selfies(text) : parse_smiles(text);
      if (g.empty() || !valence_ok(g)) return std::nullopt;
      return g;
    } catch (const MolError &) {
      return std::nullopt;
    }
  };
  switch (format) {
  case MolFormat::kSmiles:
    return attempt(false);
  case MolFormat::kSelfies:
    return attempt(true);
  case MolFormat::kAuto:
    break;
  }
  if (only_bracket_symbols(text)) {
    if (auto g = attempt(true)) return g;
  }
  return attempt(false);
}

int exact(std::string_view pred, std::string_view ref, MolFormat format) {
  const auto r = parse_molecule(ref, format);
  if (!r) {
    throw MolError(MolErrorKind::kInvalidGraph,
                   "reference molecule '" + std::string(ref) + "' is invalid");
  }
  const auto p = parse_molecule(pred, format);
  if (!p) return 0;
  return canonical_smiles(*p) == canonical_smiles(*r) ? 1 : 0;
}

double validity(std::span<const std::string> preds, MolFormat format) {
  if (preds.empty()) return 0.0;
  std::size_t ok = 0;
  for (const std::string &p: preds) ok += parse_molecule(p, format) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(preds.size());
}

double fts(std::string_view pred, std::string_view ref, FtsKind kind, MolFormat format) {
  const auto p = parse_molecule(pred, format);
  const auto r = parse_molecule(ref, format);
  if (!p || !r) return 0.0;
  switch (kind) {
  case FtsKind::kMaccs:
    return tanimoto(maccs_keys(*p, default_key_table()), maccs_keys(*r, default_key_table()));
  case FtsKind::kMorgan:
    return tanimoto(morgan(*p), morgan(*r));
  case FtsKind::kPath:
    return tanimoto(path_fp(*p), path_fp(*r));
  }
  return 0.0;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch: text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double bleu(std::span<const std::string> pred, std::span<const std::string> ref, int max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
  std::vector<double> matches(max_n), totals(max_n);
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts pc = ngrams(pred, n);
    matches[n - 1] = clipped_overlap(pc, ngrams(ref, n));
    totals[n - 1] = pred.size() >= static_cast<std::size_t>(n) ? pred.size() - n + 1 : 0;
  }
  return bleu_from_counts(matches, totals, static_cast<double>(pred.size()),
                          static_cast<double>(ref.size()));
}

double corpus_bleu(const std::vector<std::vector<std::string>> &preds,
                   const std::vector<std::vector<std::string>> &refs, int max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
  if (preds.size() != refs.size()) {
    throw std::invalid_argument("corpus_bleu: prediction and reference counts differ");
  }
  std::vector<double> matches(max_n, 0.0), totals(max_n, 0.0);
  double pred_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_len += static_cast<double>(preds[i].size());
    ref_len += static_cast<double>(refs[i].size());
    for (int n = 1; n <= max_n; ++n) {
      matches[n - 1] += clipped_overlap(ngrams(preds[i], n), ngrams(refs[i], n));
      if (preds[i].size() >= static_cast<std::size_t>(n)) {
        totals[n - 1] += static_cast<double>(preds[i].size() - n + 1);
      }
    }
  }
  return bleu_from_counts(matches, totals, pred_len, ref_len);
}

double rouge(std::string_view pred, std::string_view ref, RougeVariant variant) {
  const auto p = tokenize_text(pred);
  const auto r = tokenize_text(ref);
  if (variant == RougeVariant::kRL) {
    return f1(lcs_length(p, r), static_cast<double>(p.size()), static_cast<double>(r.size()));
  }
  const int n = variant == RougeVariant::kR1 ? 1 : 2;
  const NgramCounts pc = ngrams(p, n), rc = ngrams(r, n);
  double np = 0, nr = 0;
  for (const auto &[g, c]: pc) np += c;
  for (const auto &[g, c]: rc) nr += c;
  return f1(clipped_overlap(pc, rc), np, nr);
}

std::string stem(std::string_view word) {
  std::string w;
  for (char c: word) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };
  static constexpr std::array<Rule, 16> kRules = {{
    {"ational", "ate"}, {"ization", "ize"}, {"ations", "ate"}, {"ation", "ate"},
    {"ness", ""}, {"ment", ""}, {"ings", ""}, {"ing", ""}, {"edly", ""},
    {"ies", "y"}, {"ied", "y"}, {"ly", ""}, {"ed", ""}, {"es", ""}, {"ss", "ss"},
    {"s", ""},
  }};
  for (const Rule &rule: kRules) {
    if (w.size() < rule.suffix.size() + 3 || !w.ends_with(rule.suffix)) continue;
    std::string base = w.substr(0, w.size() - rule.suffix.size());
    const bool has_vowel = std::any_of(base.begin(), base.end(), is_vowel);
    if (!has_vowel) continue;
    base += rule.replacement;
    const std::size_t n = base.size();
    if (rule.replacement.empty() && n >= 2 && base[n - 1] == base[n - 2]
        && !is_vowel(base[n - 1]) && base[n - 1] != 'l' && base[n - 1] != 's'
        && base[n - 1] != 'z') {
      base.pop_back();
    }
    return base;
  }
  return w;
}

double meteor_lite(std::string_view pred, std::string_view ref) {
  const auto p = tokenize_text(pred);
  const auto r = tokenize_text(ref);
  if (p.empty() || r.empty()) return 0.0;
  std::vector<int> align(p.size(), -1);
  std::vector<bool> used(r.size(), false);

  auto run_stage = [&](auto &&same) {
    int last = -2;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (align[i] >= 0) {
        last = align[i];
        continue;
      }
      int pick = -1;
      if (last + 1 >= 0 && last + 1 < static_cast<int>(r.size()) && !used[last + 1]
          && same(p[i], r[last + 1])) {
        pick = last + 1;
      }
      for (std::size_t j = 0; pick < 0 && j < r.size(); ++j) {
        if (!used[j] && same(p[i], r[j])) pick = static_cast<int>(j);
      }
      if (pick >= 0) {
        align[i] = pick;
        used[pick] = true;
        last = pick;
      }
    }
  };
  run_stage([](const std::string &a, const std::string &b) { return a == b; });
  run_stage([](const std::string &a, const std::string &b) { return stem(a) == stem(b); });

  int m = 0, chunks = 0;
  int prev_i = -2, prev_j = -2;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (align[i] < 0) continue;
    ++m;
    if (!(static_cast<int>(i) == prev_i + 1 && align[i] == prev_j + 1)) ++chunks;
    prev_i = static_cast<int>(i);
    prev_j = align[i];
  }
  if (m == 0) return 0.0;
  const double precision = static_cast<double>(m) / static_cast<double>(p.size());
  const double recall = static_cast<double>(m) / static_cast<double>(r.size());
  const double fmean = 10 * precision * recall / (recall + 9 * precision);
  const double frag = m > 1 ? static_cast<double>(chunks - 1) / (m - 1) : 0.0;
  const double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

RegressionMetrics regression_metrics(std::span<const std::string> preds,
                                     std::span<const double> refs,
                                     std::optional<double> impute_value) {
  if (preds.size() != refs.size()) {
    throw std::invalid_argument("regression_metrics: " + std::to_string(preds.size())
                                + " predictions for " + std::to_string(refs.size())
                                + " references");
  }
  std::vector<double> values(preds.size());
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto v = parse_number(preds[i]);
    if (!v) {
      if (!impute_value) {
        throw std::invalid_argument("unparseable prediction '" + preds[i]
                                    + "' and no imputation value");
      }
      ++invalid;
      v = impute_value;
    }
    values[i] = *v;
  }
  RegressionMetrics m = regression_metrics(values, refs);
  m.invalid_rate = static_cast<double>(invalid) / static_cast<double>(preds.size());
  return m;
}

RegressionMetrics regression_metrics(std::span<const double> preds,
                                     std::span<const double> refs) {
  if (preds.size() != refs.size()) {
    throw std::invalid_argument("regression_metrics: " + std::to_string(preds.size())
                                + " predictions for " + std::to_string(refs.size())
                                + " references");
  }
  if (preds.empty()) throw std::invalid_argument("regression_metrics: no predictions");
  double se = 0, ae = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - refs[i];
    se += d * d;
    ae += std::abs(d);
  }
  const double n = static_cast<double>(preds.size());
  return {std::sqrt(se / n), ae / n, 0.0};
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0, npos = 0, nneg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        pos_rank_sum += avg_rank;
        npos += 1;
      } else {
        nneg += 1;
      }
    }
    i = j;
  }
  if (npos == 0 || nneg == 0) {
    throw std::invalid_argument("roc_auc needs both positive and negative labels");
  }
  return (pos_rank_sum - npos * (npos + 1) / 2.0) / (npos * nneg);
}

}  // namespace mollm
