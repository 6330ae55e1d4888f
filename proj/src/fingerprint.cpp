//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/fingerprint.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mollm/hash.h"

namespace mollm {

Fingerprint::Fingerprint(int width): width_(width), words_((width + 63) / 64, 0) {
  if (width < 0) throw std::invalid_argument("fingerprint width must be non-negative");
}

bool Fingerprint::test(int bit) const {
  return (words_[bit >> 6] >> (bit & 63)) & 1U;
}

void Fingerprint::set(int bit) {
  if (bit < 0 || bit >= width_) throw std::out_of_range("fingerprint bit out of range");
  words_[bit >> 6] |= std::uint64_t {1} << (bit & 63);
}

int Fingerprint::count() const {
  int n = 0;
  for (std::uint64_t w: words_) n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < width_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = std::to_string(width_) + ":";
  const int nbytes = (width_ + 7) / 8;
  for (int i = 0; i < nbytes; ++i) {
    const unsigned byte = (words_[i / 8] >> (8 * (i % 8))) & 0xFF;
    out += kDigits[byte >> 4];
    out += kDigits[byte & 15];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("fingerprint text lacks a width prefix");
  }
  int width = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + colon, width);
  if (ec != std::errc() || p != text.data() + colon || width <= 0) {
    throw std::invalid_argument("bad fingerprint width");
  }
  std::string_view hex = text.substr(colon + 1);
  if (hex.size() != static_cast<std::size_t>((width + 7) / 8) * 2) {
    throw std::invalid_argument("fingerprint hex length does not match width");
  }
  Fingerprint fp(width);
  for (std::size_t i = 0; i < hex.size() / 2; ++i) {
    unsigned byte = 0;
    auto [q, ec2] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, byte, 16);
    if (ec2 != std::errc() || q != hex.data() + 2 * i + 2) {
      throw std::invalid_argument("bad fingerprint hex digit");
    }
    for (int b = 0; b < 8; ++b) {
      if ((byte >> b) & 1U) fp.set(static_cast<int>(8 * i) + b);
    }
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width_ != b.width_) {
    throw std::invalid_argument("tanimoto: fingerprint widths differ ("
                                + std::to_string(a.width_) + " vs "
                                + std::to_string(b.width_) + ")");
  }
  int both = 0, either = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    both += std::popcount(a.words_[i] & b.words_[i]);
    either += std::popcount(a.words_[i] | b.words_[i]);
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / either;
}

Fingerprint morgan(const MolGraph &g, int radius, int width) {
  if (radius < 0) throw std::invalid_argument("morgan radius must be >= 0");
  Fingerprint fp(width);
  const int n = g.num_atoms();
  const std::vector<bool> in_ring = ring_atoms(g);

  std::vector<std::uint64_t> ids(n);
  for (int v = 0; v < n; ++v) {
    const Atom &a = g.atom(v);
    const std::int64_t inv[] = {a.element, g.heavy_degree(v), a.explicit_h,
                                a.formal_charge, in_ring[v] ? 1 : 0,
                                a.aromatic ? 1 : 0};
    ids[v] = hash_words(inv);
    fp.set(static_cast<int>(ids[v] % width));
  }

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int v = 0; v < n; ++v) {
      std::vector<std::pair<int, std::uint64_t>> nbr;
      for (const Neighbor &nb: g.neighbors(v)) {
        nbr.emplace_back(static_cast<int>(g.bond(nb.bond).order), ids[nb.atom]);
      }
      std::sort(nbr.begin(), nbr.end());
      std::vector<std::int64_t> words {r, static_cast<std::int64_t>(ids[v])};
      for (auto [o, id]: nbr) {
        words.push_back(o);
        words.push_back(static_cast<std::int64_t>(id));
      }
      next[v] = hash_words(words);
      fp.set(static_cast<int>(next[v] % width));
    }
    ids = std::move(next);
  }
  return fp;
}

namespace {

class PathEnumerator {
public:
  PathEnumerator(const MolGraph &g, int min_len, int max_len, Fingerprint &fp)
      : g_(g), min_len_(min_len), max_len_(max_len), fp_(fp),
        on_path_(g.num_atoms(), false) { }

  void run() {
    for (int s = 0; s < g_.num_atoms(); ++s) {
      atoms_.assign(1, s);
      bonds_.clear();
      on_path_[s] = true;
      extend(s);
      on_path_[s] = false;
    }
  }

private:
  std::int64_t atom_label(int v) const {
    const Atom &a = g_.atom(v);
    return a.element * 2 + (a.aromatic ? 1 : 0);
  }

  void record() {
    const int len = static_cast<int>(bonds_.size());
    std::vector<std::int64_t> fwd, rev;
    for (int i = 0; i <= len; ++i) {
      fwd.push_back(atom_label(atoms_[i]));
      if (i < len) fwd.push_back(static_cast<int>(g_.bond(bonds_[i]).order));
    }
    rev.assign(fwd.rbegin(), fwd.rend());
    std::vector<std::int64_t> label = std::min(fwd, rev);
    label.push_back(len);
    fp_.set(static_cast<int>(hash_words(label) % fp_.width()));
  }

  void extend(int v) {
    const int len = static_cast<int>(bonds_.size());
    if (len >= min_len_) record();
    if (len == max_len_) return;
    for (const Neighbor &nb: g_.neighbors(v)) {
      if (on_path_[nb.atom]) continue;
      on_path_[nb.atom] = true;
      atoms_.push_back(nb.atom);
      bonds_.push_back(nb.bond);
      extend(nb.atom);
      atoms_.pop_back();
      bonds_.pop_back();
      on_path_[nb.atom] = false;
    }
  }

  const MolGraph &g_;
  int min_len_, max_len_;
  Fingerprint &fp_;
  std::vector<bool> on_path_;
  std::vector<int> atoms_;
  std::vector<int> bonds_;
};

}  // namespace

Fingerprint path_fp(const MolGraph &g, int min_len, int max_len, int width) {
  if (min_len < 1 || min_len > max_len || max_len > 7) {
    throw std::invalid_argument("path_fp requires 1 <= min_len <= max_len <= 7");
  }
  Fingerprint fp(width);
  PathEnumerator(g, min_len, max_len, fp).run();
  return fp;
}

}  // namespace mollm
