//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/toymodel.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "mollm/perturb.h"
#include "mollm/random.h"
#include "mollm/random_mol.h"

namespace mollm::toy {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kElementClasses[] = {6, 7, 8, 16, 9, 17, 35, 53, 15, 5, 14};
constexpr int kNumElementClasses = std::size(kElementClasses) + 1;

int bond_type(BondOrder order) {
  return static_cast<int>(order) - 1;
}

MatrixXd tanh_of(const MatrixXd &m) {
  return m.array().tanh().matrix();
}

// Per-token neighbour lists of the branch-B token graph: atoms first, then
// bonds; an atom token neighbours its bonds and a bond token its atoms.
std::vector<std::vector<int>> token_neighbors(const GraphFeatures &f) {
  const int v = f.num_atoms();
  std::vector<std::vector<int>> nbr(v + f.num_bonds());
  for (int e = 0; e < f.num_bonds(); ++e) {
    const auto [a, b, t] = f.bonds[e];
    nbr[a].push_back(v + e);
    nbr[b].push_back(v + e);
    nbr[v + e] = {a, b};
  }
  return nbr;
}

void write_u64(std::ostream &out, std::uint64_t x) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char *>(buf), 8);
}

std::uint64_t read_u64(std::istream &in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char *>(buf), 8)) {
    throw std::runtime_error("truncated parameter file");
  }
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return x;
}

constexpr char kMagic[8] = {'M', 'O', 'L', 'L', 'M', 'T', 'Y', '1'};

}  // namespace

int atom_type(const Atom &a) {
  int cls = kNumElementClasses - 1;
  for (int i = 0; i < kNumElementClasses - 1; ++i) {
    if (kElementClasses[i] == a.element) cls = i;
  }
  const int charge = a.formal_charge < 0 ? 0 : a.formal_charge == 0 ? 1 : 2;
  return (cls * 2 + (a.aromatic ? 1 : 0)) * 3 + charge;
}

int num_atom_types() {
  return kNumElementClasses * 2 * 3;
}

Vocab::Vocab() {
  add("<bos>");
}

int Vocab::add(std::string_view token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  if (size() >= kMaxVocab) {
    throw std::length_error("vocabulary exceeds " + std::to_string(kMaxVocab) + " tokens");
  }
  tokens_.emplace_back(token);
  index_.emplace(std::string(token), size() - 1);
  return size() - 1;
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown token '" + std::string(token) + "'");
  }
  return it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

std::vector<int> Vocab::encode(const std::vector<std::string> &tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const std::string &t: tokens) out.push_back(id(t));
  return out;
}

ToyParams::ToyParams(const ModelDims &dims): dims_(dims) {
  if (dims.vocab < 2 || dims.vocab > kMaxVocab) {
    throw std::invalid_argument("vocabulary size must lie in [2, "
                                + std::to_string(kMaxVocab) + "]");
  }
  const int d = dims.dim;
  int offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    groups_.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  add("atom_embed", d, num_atom_types());
  add("bond_embed", d, kNumBondTypes);
  for (int l = 0; l < dims.layers; ++l) {
    add("mp_w" + std::to_string(l), d, d);
    add("mp_b" + std::to_string(l), d, 1);
  }
  add("mix_w", d, d);
  add("mix_b", d, 1);
  add("tok_embed", d, dims.vocab);
  add("ctx_graph", d, d);
  add("ctx_bag", d, d);
  add("ctx_prev", d, d);
  add("ctx_b", d, 1);
  add("out_w", dims.vocab, d);
  add("out_b", dims.vocab, 1);
  add("fg_w1", d, 2 * d);
  add("fg_b1", d, 1);
  add("fg_w2", dims.groups, d);
  add("fg_b2", dims.groups, 1);
  theta = VectorXd::Zero(offset);
}

const ParamGroup &ToyParams::group(std::string_view name) const {
  for (const ParamGroup &g: groups_) {
    if (g.name == name) return g;
  }
  throw std::invalid_argument("no parameter group '" + std::string(name) + "'");
}

Eigen::Map<MatrixXd> ToyParams::mat(VectorXd &v, std::string_view name) const {
  const ParamGroup &g = group(name);
  return Eigen::Map<MatrixXd>(v.data() + g.offset, g.rows, g.cols);
}

Eigen::Map<const MatrixXd> ToyParams::mat(const VectorXd &v, std::string_view name) const {
  const ParamGroup &g = group(name);
  return Eigen::Map<const MatrixXd>(v.data() + g.offset, g.rows, g.cols);
}

void ToyParams::init(std::uint64_t seed, bool zero_output) {
  Rng rng(seed);
  for (const ParamGroup &g: groups_) {
    const bool bias = g.cols == 1;
    const bool embed = g.name.ends_with("embed");
    double scale = embed ? 0.5 : 1.0 / std::sqrt(static_cast<double>(g.cols));
    if (bias) scale = 0.0;
    if (zero_output && g.name == "out_w") scale = 0.0;
    for (int i = 0; i < g.size(); ++i) theta[g.offset + i] = scale * rng.normal();
  }
}

void ToyParams::save(std::ostream &out, const Vocab &vocab) const {
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, static_cast<std::uint64_t>(dims_.dim));
  write_u64(out, static_cast<std::uint64_t>(dims_.layers));
  write_u64(out, static_cast<std::uint64_t>(dims_.vocab));
  write_u64(out, static_cast<std::uint64_t>(dims_.groups));
  write_u64(out, std::bit_cast<std::uint64_t>(dims_.mp_eps));
  write_u64(out, static_cast<std::uint64_t>(vocab.size()));
  for (const std::string &t: vocab.tokens()) {
    write_u64(out, t.size());
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  write_u64(out, static_cast<std::uint64_t>(theta.size()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    write_u64(out, std::bit_cast<std::uint64_t>(theta[i]));
  }
}

ToyParams ToyParams::load(std::istream &in, Vocab *vocab) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a toy-model parameter file");
  }
  ModelDims dims;
  dims.dim = static_cast<int>(read_u64(in));
  dims.layers = static_cast<int>(read_u64(in));
  dims.vocab = static_cast<int>(read_u64(in));
  dims.groups = static_cast<int>(read_u64(in));
  dims.mp_eps = std::bit_cast<double>(read_u64(in));
  const std::uint64_t ntok = read_u64(in);
  Vocab v;
  for (std::uint64_t i = 0; i < ntok; ++i) {
    const std::uint64_t len = read_u64(in);
    std::string t(len, '\0');
    if (!in.read(t.data(), static_cast<std::streamsize>(len))) {
      throw std::runtime_error("truncated parameter file");
    }
    if (i > 0) v.add(t);
  }
  ToyParams p(dims);
  if (read_u64(in) != static_cast<std::uint64_t>(p.size())) {
    throw std::runtime_error("parameter count does not match the stored dimensions");
  }
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    p.theta[i] = std::bit_cast<double>(read_u64(in));
  }
  if (vocab) *vocab = std::move(v);
  return p;
}

GraphFeatures featurize(const MolGraph &g) {
  GraphFeatures f;
  for (const Atom &a: g.atoms()) f.atom_types.push_back(atom_type(a));
  for (const Bond &b: g.bonds()) f.bonds.push_back({b.a, b.b, bond_type(b.order)});
  return f;
}

MatrixXd GraphEncoding::h() const {
  const int v = features.num_atoms();
  const int e = features.num_bonds();
  const int d = static_cast<int>(graph_a.size());
  MatrixXd out(num_rows(), d);
  out.row(0) = graph_a.transpose();
  out.middleRows(1, v) = node_states.back().transpose();
  out.row(1 + v) = graph_b.transpose();
  out.middleRows(2 + v, v + e) = mix_output.transpose();
  return out;
}

VectorXd GraphEncoding::pooled() const {
  VectorXd s = graph_a + node_states.back().rowwise().sum() + graph_b
               + mix_output.rowwise().sum();
  return s / static_cast<double>(num_rows());
}

GraphEncoding encode(const GraphFeatures &f, const ToyParams &p) {
  const int nv = f.num_atoms();
  if (nv == 0) throw std::invalid_argument("cannot encode an empty graph");
  const ModelDims &dims = p.dims();
  const auto atom_embed = p.mat("atom_embed");
  const auto bond_embed = p.mat("bond_embed");

  GraphEncoding enc;
  enc.features = f;
  MatrixXd h(dims.dim, nv);
  for (int v = 0; v < nv; ++v) h.col(v) = atom_embed.col(f.atom_types[v]);
  enc.node_states.push_back(h);

  for (int l = 0; l < dims.layers; ++l) {
    const MatrixXd &cur = enc.node_states.back();
    MatrixXd z = (1.0 + dims.mp_eps) * cur;
    for (const auto &[a, b, t]: f.bonds) {
      z.col(a) += (cur.col(b) + bond_embed.col(t)).cwiseMax(0.0);
      z.col(b) += (cur.col(a) + bond_embed.col(t)).cwiseMax(0.0);
    }
    const auto w = p.mat("mp_w" + std::to_string(l));
    const auto bias = p.mat("mp_b" + std::to_string(l));
    MatrixXd pre = w * z;
    pre.colwise() += bias.col(0);
    enc.pre_update.push_back(std::move(z));
    enc.node_states.push_back(tanh_of(pre));
  }
  enc.graph_a = enc.node_states.back().rowwise().mean();

  const int nt = nv + f.num_bonds();
  MatrixXd x(dims.dim, nt);
  for (int v = 0; v < nv; ++v) x.col(v) = atom_embed.col(f.atom_types[v]);
  for (int e = 0; e < f.num_bonds(); ++e) x.col(nv + e) = bond_embed.col(f.bonds[e][2]);
  const auto nbr = token_neighbors(f);
  enc.mix_input = x;
  for (int i = 0; i < nt; ++i) {
    if (nbr[i].empty()) continue;
    VectorXd m = VectorXd::Zero(dims.dim);
    for (int j: nbr[i]) m += x.col(j);
    enc.mix_input.col(i) += m / static_cast<double>(nbr[i].size());
  }
  MatrixXd pre = p.mat("mix_w") * enc.mix_input;
  pre.colwise() += p.mat("mix_b").col(0);
  enc.mix_output = tanh_of(pre);
  enc.graph_b = enc.mix_output.rowwise().mean();
  return enc;
}

GraphEncoding encode(const MolGraph &g, const ToyParams &p) {
  return encode(featurize(g), p);
}

void encode_backward(const GraphEncoding &enc, const VectorXd &d_pooled,
                     const VectorXd &d_graph_ab, const ToyParams &p, VectorXd &grad) {
  const ModelDims &dims = p.dims();
  const int d = dims.dim;
  const GraphFeatures &f = enc.features;
  const int nv = f.num_atoms();
  const int nt = nv + f.num_bonds();
  const double rows = enc.num_rows();

  VectorXd d_row = d_pooled.size() ? VectorXd(d_pooled / rows) : VectorXd::Zero(d);
  VectorXd d_ga = d_row, d_gb = d_row;
  if (d_graph_ab.size()) {
    d_ga += d_graph_ab.head(d);
    d_gb += d_graph_ab.tail(d);
  }

  auto g_atom = p.mat(grad, "atom_embed");
  auto g_bond = p.mat(grad, "bond_embed");

  // branch B
  MatrixXd d_y = d_row.replicate(1, nt);
  d_y.colwise() += d_gb / static_cast<double>(nt);
  const MatrixXd d_u =
      (d_y.array() * (1.0 - enc.mix_output.array().square())).matrix();
  p.mat(grad, "mix_w") += d_u * enc.mix_input.transpose();
  p.mat(grad, "mix_b") += d_u.rowwise().sum();
  const MatrixXd d_in = p.mat("mix_w").transpose() * d_u;
  MatrixXd d_x = d_in;
  const auto nbr = token_neighbors(f);
  for (int i = 0; i < nt; ++i) {
    for (int j: nbr[i]) d_x.col(j) += d_in.col(i) / static_cast<double>(nbr[i].size());
  }
  for (int v = 0; v < nv; ++v) g_atom.col(f.atom_types[v]) += d_x.col(v);
  for (int e = 0; e < f.num_bonds(); ++e) g_bond.col(f.bonds[e][2]) += d_x.col(nv + e);

  // branch A
  MatrixXd d_h = d_row.replicate(1, nv);
  d_h.colwise() += d_ga / static_cast<double>(nv);
  const auto bond_embed = p.mat("bond_embed");
  for (int l = dims.layers - 1; l >= 0; --l) {
    const MatrixXd &out = enc.node_states[l + 1];
    const MatrixXd &in = enc.node_states[l];
    const MatrixXd d_pre = (d_h.array() * (1.0 - out.array().square())).matrix();
    p.mat(grad, "mp_w" + std::to_string(l)) += d_pre * enc.pre_update[l].transpose();
    p.mat(grad, "mp_b" + std::to_string(l)) += d_pre.rowwise().sum();
    const MatrixXd d_z = p.mat("mp_w" + std::to_string(l)).transpose() * d_pre;
    MatrixXd d_prev = (1.0 + dims.mp_eps) * d_z;
    for (const auto &[a, b, t]: f.bonds) {
      for (auto [dst, src]: {std::pair {a, b}, std::pair {b, a}}) {
        const VectorXd m = in.col(src) + bond_embed.col(t);
        const VectorXd gated = (m.array() > 0.0).select(d_z.col(dst), 0.0);
        d_prev.col(src) += gated;
        g_bond.col(t) += gated;
      }
    }
    d_h = std::move(d_prev);
  }
  for (int v = 0; v < nv; ++v) g_atom.col(f.atom_types[v]) += d_h.col(v);
}

SequenceScore score_pooled(const VectorXd &pooled, const std::vector<int> &context,
                           const std::vector<int> &target, const ToyParams &p) {
  const ModelDims &dims = p.dims();
  if (target.empty()) throw std::invalid_argument("empty target sequence");
  for (const auto *seq: {&context, &target}) {
    for (int t: *seq) {
      if (t < 0 || t >= dims.vocab) throw std::invalid_argument("token id out of vocabulary");
    }
  }
  const auto tok = p.mat("tok_embed");
  SequenceScore s;
  s.pooled = pooled;
  s.context = context;
  s.target = target;
  s.bag = VectorXd::Zero(dims.dim);
  for (int c: context) s.bag += tok.col(c);
  if (!context.empty()) s.bag /= static_cast<double>(context.size());

  const VectorXd base = p.mat("ctx_graph") * pooled + p.mat("ctx_bag") * s.bag
                        + p.mat("ctx_b").col(0);
  const auto ctx_prev = p.mat("ctx_prev");
  const auto out_w = p.mat("out_w");
  const auto out_b = p.mat("out_b");
  const int len = static_cast<int>(target.size());
  s.states.resize(dims.dim, len);
  s.probs.resize(dims.vocab, len);
  s.log_probs.resize(len);
  for (int t = 0; t < len; ++t) {
    const int prev = t == 0 ? Vocab::kBos : target[t - 1];
    s.states.col(t) = (base + ctx_prev * tok.col(prev)).array().tanh().matrix();
    const VectorXd logits = out_w * s.states.col(t) + out_b.col(0);
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    s.probs.col(t) = (logits.array() - lse).exp().matrix();
    s.log_probs[t] = logits[target[t]] - lse;
  }
  return s;
}

std::vector<double> score_sequence(const MatrixXd &h, const std::vector<int> &instruction,
                                   const std::vector<int> &selfies,
                                   const std::vector<int> &target, const ToyParams &p) {
  std::vector<int> context = instruction;
  context.insert(context.end(), selfies.begin(), selfies.end());
  const VectorXd pooled = h.colwise().mean().transpose();
  return score_pooled(pooled, context, target, p).log_probs;
}

VectorXd score_backward(const SequenceScore &s, const std::vector<double> &d_lp,
                        const ToyParams &p, VectorXd &grad) {
  const ModelDims &dims = p.dims();
  const auto tok = p.mat("tok_embed");
  const auto out_w = p.mat("out_w");
  const auto ctx_prev = p.mat("ctx_prev");
  auto g_tok = p.mat(grad, "tok_embed");
  auto g_out_w = p.mat(grad, "out_w");
  auto g_out_b = p.mat(grad, "out_b");
  auto g_prev = p.mat(grad, "ctx_prev");

  VectorXd d_base = VectorXd::Zero(dims.dim);
  for (int t = 0; t < static_cast<int>(s.target.size()); ++t) {
    if (d_lp[t] == 0.0) continue;
    VectorXd d_logits = -d_lp[t] * s.probs.col(t);
    d_logits[s.target[t]] += d_lp[t];
    g_out_w += d_logits * s.states.col(t).transpose();
    g_out_b += d_logits;
    const VectorXd d_state = out_w.transpose() * d_logits;
    const VectorXd d_u =
        (d_state.array() * (1.0 - s.states.col(t).array().square())).matrix();
    const int prev = t == 0 ? Vocab::kBos : s.target[t - 1];
    g_prev += d_u * tok.col(prev).transpose();
    g_tok.col(prev) += ctx_prev.transpose() * d_u;
    d_base += d_u;
  }
  p.mat(grad, "ctx_graph") += d_base * s.pooled.transpose();
  p.mat(grad, "ctx_bag") += d_base * s.bag.transpose();
  p.mat(grad, "ctx_b") += d_base;
  if (!s.context.empty()) {
    const VectorXd d_bag = p.mat("ctx_bag").transpose() * d_base
                           / static_cast<double>(s.context.size());
    for (int c: s.context) g_tok.col(c) += d_bag;
  }
  return p.mat("ctx_graph").transpose() * d_base;
}

GroupPrediction predict_groups(const GraphEncoding &enc, const ToyParams &p) {
  GroupPrediction g;
  const int d = p.dims().dim;
  g.input.resize(2 * d);
  g.input << enc.graph_a, enc.graph_b;
  g.hidden = (p.mat("fg_w1") * g.input + p.mat("fg_b1").col(0)).array().tanh().matrix();
  const VectorXd logits = p.mat("fg_w2") * g.hidden + p.mat("fg_b2").col(0);
  g.probs = logits.unaryExpr([](double x) { return sigmoid(x); });
  return g;
}

VectorXd groups_backward(const GroupPrediction &pred, const std::vector<double> &d_probs,
                         const ToyParams &p, VectorXd &grad) {
  const Eigen::Map<const VectorXd> dp(d_probs.data(), static_cast<Eigen::Index>(d_probs.size()));
  const VectorXd d_logits =
      (dp.array() * pred.probs.array() * (1.0 - pred.probs.array())).matrix();
  p.mat(grad, "fg_w2") += d_logits * pred.hidden.transpose();
  p.mat(grad, "fg_b2") += d_logits;
  const VectorXd d_hidden = p.mat("fg_w2").transpose() * d_logits;
  const VectorXd d_pre =
      (d_hidden.array() * (1.0 - pred.hidden.array().square())).matrix();
  p.mat(grad, "fg_w1") += d_pre * pred.input.transpose();
  p.mat(grad, "fg_b1") += d_pre;
  return p.mat("fg_w1").transpose() * d_pre;
}

double sft_objective(const ToyExample &ex, const ToyParams &p, VectorXd *grad,
                     double *reward_out, double beta) {
  const GraphEncoding enc = encode(ex.chosen, p);
  const SequenceScore s = score_pooled(enc.pooled(), ex.context, ex.target, p);
  if (reward_out) *reward_out = reward(s.log_probs, beta);
  if (grad) {
    const std::vector<double> d_lp(s.log_probs.size(), seq_nll_grad(s.log_probs));
    const VectorXd d_pooled = score_backward(s, d_lp, p, *grad);
    encode_backward(enc, d_pooled, VectorXd(), p, *grad);
  }
  return seq_nll(s.log_probs);
}

double molpo_objective(const ToyExample &ex, const ToyParams &p, double gamma,
                       const MolpoConfig &cfg, VectorXd *grad, double *r_w, double *r_l) {
  if (!ex.has_rejected) throw std::invalid_argument("example has no rejected graph");
  const GraphEncoding enc_w = encode(ex.chosen, p);
  const GraphEncoding enc_l = encode(ex.rejected, p);
  const SequenceScore s_w = score_pooled(enc_w.pooled(), ex.context, ex.target, p);
  const SequenceScore s_l = score_pooled(enc_l.pooled(), ex.context, ex.target, p);
  const double rw = reward(s_w.log_probs, cfg.beta);
  const double rl = reward(s_l.log_probs, cfg.beta);
  if (r_w) *r_w = rw;
  if (r_l) *r_l = rl;
  const MolpoTerms terms = molpo_terms(rw, rl, gamma, cfg.lambda_clip);
  if (grad) {
    const double per_token = cfg.beta / static_cast<double>(ex.target.size());
    const std::vector<double> d_w(ex.target.size(), terms.d_rw * per_token);
    const std::vector<double> d_l(ex.target.size(), terms.d_rl * per_token);
    encode_backward(enc_w, score_backward(s_w, d_w, p, *grad), VectorXd(), p, *grad);
    encode_backward(enc_l, score_backward(s_l, d_l, p, *grad), VectorXd(), p, *grad);
  }
  return terms.loss;
}

double funcgroup_objective(const ToyExample &ex, const ToyParams &p, VectorXd *grad) {
  const GraphEncoding enc = encode(ex.chosen, p);
  const GroupPrediction pred = predict_groups(enc, p);
  std::vector<double> probs(pred.probs.data(), pred.probs.data() + pred.probs.size());
  std::vector<double> d_probs;
  const double loss = bce_multilabel(probs, ex.groups, grad ? &d_probs : nullptr);
  if (grad) {
    const VectorXd d_ab = groups_backward(pred, d_probs, p, *grad);
    encode_backward(enc, VectorXd(), d_ab, p, *grad);
  }
  return loss;
}

std::pair<double, double> pair_rewards(const ToyExample &ex, const ToyParams &p, double beta) {
  const auto r = [&](const GraphFeatures &f) {
    return reward(score_pooled(encode(f, p).pooled(), ex.context, ex.target, p).log_probs,
                  beta);
  };
  return {r(ex.chosen), r(ex.rejected)};
}

double evaluate_gdr(const std::vector<ToyExample> &data, const ToyParams &p, double beta) {
  std::vector<std::pair<double, double>> rewards;
  for (const ToyExample &ex: data) {
    if (ex.has_rejected) rewards.push_back(pair_rewards(ex, p, beta));
  }
  return gdr(rewards);
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "sft_only") return TrainMode::kSftOnly;
  if (text == "sft_plus_molpo") return TrainMode::kSftPlusMolpo;
  if (text == "funcgroup_pretrain") return TrainMode::kFuncgroupPretrain;
  throw std::invalid_argument("unknown training mode '" + std::string(text) + "'");
}

std::string_view to_string(TrainMode mode) {
  switch (mode) {
  case TrainMode::kSftOnly:
    return "sft_only";
  case TrainMode::kSftPlusMolpo:
    return "sft_plus_molpo";
  case TrainMode::kFuncgroupPretrain:
    return "funcgroup_pretrain";
  }
  return "?";
}

namespace {

TraceRow evaluate(int step, const std::vector<ToyExample> &data, const ToyParams &p,
                  const TaskMarginState &state, const MolpoConfig &cfg) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const bool all_targets = std::all_of(data.begin(), data.end(),
                                       [](const ToyExample &e) { return !e.target.empty(); });
  const bool all_pairs = all_targets
                         && std::all_of(data.begin(), data.end(),
                                        [](const ToyExample &e) { return e.has_rejected; });
  const bool all_groups = std::all_of(data.begin(), data.end(), [&](const ToyExample &e) {
    return static_cast<int>(e.groups.size()) == p.dims().groups;
  });
  TraceRow row {step, kNan, kNan, kNan, kNan};
  const double n = static_cast<double>(data.size());
  if (all_targets) {
    double s = 0;
    for (const ToyExample &ex: data) s += sft_objective(ex, p, nullptr);
    row.l_sft = s / n;
  }
  if (all_pairs) {
    double s = 0;
    std::vector<std::pair<double, double>> rewards;
    for (const ToyExample &ex: data) {
      double rw = 0, rl = 0;
      const double gamma = cfg.lambda_margin * std::abs(state.ema(ex.task_id));
      s += molpo_objective(ex, p, gamma, cfg, nullptr, &rw, &rl);
      rewards.emplace_back(rw, rl);
    }
    row.l_molpo = s / n;
    row.gdr = gdr(rewards);
  }
  if (all_groups) {
    double s = 0;
    for (const ToyExample &ex: data) s += funcgroup_objective(ex, p, nullptr);
    row.l_func = s / n;
  }
  return row;
}

}  // namespace

TrainResult train(const std::vector<ToyExample> &data, const ModelDims &dims,
                  const TrainConfig &cfg) {
  if (data.empty()) throw std::invalid_argument("no training examples");
  if (cfg.batch_size < 1 || cfg.steps < 0) {
    throw std::invalid_argument("batch_size must be >= 1 and steps >= 0");
  }
  cfg.molpo.validate();
  TrainResult result;
  result.params = ToyParams(dims);
  ToyParams &p = result.params;
  p.init(derive_seed(cfg.seed, 0), cfg.zero_output_init);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  VectorXd m = VectorXd::Zero(p.size()), v = VectorXd::Zero(p.size());
  VectorXd grad(p.size()), grad_po(p.size());
  Rng rng(derive_seed(cfg.seed, 1));
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::size_t cursor = 0;
  TaskMarginState state;

  const int trace_every = std::max(cfg.trace_every, 1);
  result.trace.push_back(evaluate(0, data, p, state, cfg.molpo));
  for (int step = 1; step <= cfg.steps; ++step) {
    grad.setZero();
    double batch_loss = 0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      const ToyExample &ex = data[order[cursor++]];
      switch (cfg.mode) {
      case TrainMode::kSftOnly:
        batch_loss += sft_objective(ex, p, &grad);
        break;
      case TrainMode::kSftPlusMolpo: {
        double r_w = 0;
        batch_loss += sft_objective(ex, p, &grad, &r_w, cfg.molpo.beta);
        const double ema = state.update(ex.task_id, r_w, cfg.molpo.ema_decay);
        const double gamma = cfg.molpo.lambda_margin * std::abs(ema);
        grad_po.setZero();
        const double l_po = molpo_objective(ex, p, gamma, cfg.molpo, &grad_po);
        batch_loss += cfg.molpo.c * l_po;
        if (cfg.molpo.c != 0.0) grad += cfg.molpo.c * grad_po;
        break;
      }
      case TrainMode::kFuncgroupPretrain:
        batch_loss += funcgroup_objective(ex, p, &grad);
        break;
      }
    }
    if (!std::isfinite(batch_loss) || !grad.allFinite()) {
      throw TrainingDiverged("training diverged at step " + std::to_string(step)
                             + " (batch loss " + std::to_string(batch_loss) + ")");
    }
    grad /= static_cast<double>(cfg.batch_size);
    m = kBeta1 * m + (1 - kBeta1) * grad;
    v = kBeta2 * v + (1 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(kBeta1, step);
    const double c2 = 1 - std::pow(kBeta2, step);
    p.theta.array() -= cfg.learning_rate * (m.array() / c1)
                       / ((v.array() / c2).sqrt() + kAdamEps);
    if (step % trace_every == 0 || step == cfg.steps) {
      result.trace.push_back(evaluate(step, data, p, state, cfg.molpo));
    }
  }
  return result;
}

void write_trace_csv(std::ostream &out, const std::vector<TraceRow> &trace) {
  auto field = [&](double x) {
    if (std::isnan(x)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return std::string(buf);
  };
  out << "step,l_sft,l_molpo,gdr,l_func\n";
  for (const TraceRow &r: trace) {
    out << r.step << ',' << field(r.l_sft) << ',' << field(r.l_molpo) << ','
        << field(r.gdr) << ',' << field(r.l_func) << '\n';
  }
}

namespace {

int count_element(const MolGraph &g, int element) {
  int n = 0;
  for (int v = 0; v < g.num_atoms(); ++v) n += g.atom(v).element == element;
  return n;
}

// Appends a chain of `length` atoms of `element` at a random hydrogen-bearing
// atom. Returns false when no such atom exists.
bool attach_marker(MolGraph &g, int element, int length, Rng &rng) {
  std::vector<int> sites;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (g.atom(v).explicit_h > 0) sites.push_back(v);
  }
  if (sites.empty()) return false;
  int prev = sites[rng.uniform_index(sites.size())];
  g.atom(prev).explicit_h -= 1;
  const int valence = element == 14 ? 4 : 3;
  for (int k = 0; k < length; ++k) {
    Atom a;
    a.element = element;
    a.explicit_h = valence - (k + 1 == length ? 1 : 2);
    const int next = g.add_atom(a);
    g.add_bond(prev, next, BondOrder::kSingle);
    prev = next;
  }
  return true;
}

}  // namespace

SyntheticTask make_synthetic_task(int n, std::uint64_t seed, const KeyTable &table,
                                  double ratio) {
  constexpr int kMarkerLength = 3;
  constexpr int kAttempts = 64;
  SyntheticTask task;
  const std::vector<std::string> instruction = {"does", "the", "molecule", "carry",
                                                "a", "silyl", "group", "?"};
  const std::vector<int> context = [&] {
    std::vector<int> ids;
    for (const std::string &w: instruction) ids.push_back(task.vocab.add(w));
    return ids;
  }();
  const int yes = task.vocab.add("yes");
  const int no = task.vocab.add("no");

  RandomMolOptions options;
  options.max_steps = 4;
  Rng rng(seed);
  while (static_cast<int>(task.examples.size()) < n) {
    MolGraph g = kekulize(random_molecule(rng, options));
    const bool marked = rng.bernoulli(0.5);
    if (!attach_marker(g, marked ? 14 : 5, kMarkerLength, rng)) continue;
    perceive_aromaticity(g);

    // Rejected graphs keep the marker, and even/odd examples alternate
    // between perturbations that grow and shrink the molecule.
    const std::size_t index = task.examples.size();
    const bool grow = index % 2 == 0;
    std::optional<MolGraph> rejected;
    for (int attempt = 0; attempt < kAttempts && !rejected; ++attempt) {
      MolGraph r = perturb_graph(g, table, ratio,
                                 derive_seed(derive_seed(seed, index), attempt));
      const int delta = r.num_atoms() - g.num_atoms();
      if (count_element(r, 14) != count_element(g, 14)
          || count_element(r, 5) != count_element(g, 5)) {
        continue;
      }
      if (grow ? delta >= 0 : delta <= 0) rejected = std::move(r);
    }
    if (!rejected) continue;

    ToyExample ex;
    ex.task_id = "silyl";
    ex.chosen = featurize(g);
    ex.rejected = featurize(*rejected);
    ex.has_rejected = true;
    ex.context = context;
    ex.target = {marked ? yes : no};
    for (std::uint8_t bit: functional_groups(g)) ex.groups.push_back(bit);
    task.examples.push_back(std::move(ex));
  }
  return task;
}

}  // namespace mollm::toy
