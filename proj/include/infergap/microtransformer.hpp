// SPDX-License-Identifier: MIT
//
// A single-block, multi-head transformer small enough to trace by hand.
//
// The block is the standard pre-LN-free residual form: strictly causal
// scaled dot-product attention per head (queries at position t see keys and
// values at positions <= t only), per-head output projections summed into
// the residual stream, then a ReLU feed-forward with its own residual.  The
// unembedding is the transpose of the embedding, so final logits decompose
// exactly into input, attention, and feed-forward contributions:
// L = L_0 + L_a + L_f.
//
// On top of the forward pass this header provides the aggregation
// diagnostics: per-head logit distributions, their product-of-experts
// combination (normalized elementwise product == softmax of summed logits),
// the log-partition gap gamma = sum_h log Z_h - log Z, the discounted
// attention-energy measure over input sets, iterated block states, and a
// kernelized (linear attention) variant of the forward pass.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "infergap/error.hpp"
#include "infergap/numerics.hpp"

namespace infergap {

struct HeadWeights {
  Matrix w_q;  // d_model x d_k
  Matrix w_k;  // d_model x d_k
  Matrix w_v;  // d_model x d_v
  Matrix w_o;  // d_v x d_model
};

struct TransformerSpec {
  std::size_t d_model = 0;
  std::size_t d_k = 0;
  std::size_t d_v = 0;
  std::size_t d_ff = 0;
  std::size_t max_seq = 0;
  std::vector<std::string> vocab;  // index 0 conventionally a padding token
  Matrix embedding;    // |V| x d_model
  Matrix unembedding;  // d_model x |V|, always embedding transposed
  std::vector<HeadWeights> heads;
  Matrix w1;  // d_model x d_ff
  Matrix w2;  // d_ff x d_model
  Vec b1;     // d_ff
  Vec b2;     // d_model
  bool use_positional = false;  // reserved; no positional scheme is defined

  std::size_t vocab_size() const { return vocab.size(); }

  void validate() const {
    if (d_model == 0 || d_k == 0 || d_v == 0 || d_ff == 0 || max_seq == 0)
      fail(errc::invalid_argument, "transformer: zero dimension");
    if (vocab.size() < 2) fail(errc::invalid_argument, "transformer: vocabulary too small");
    if (heads.empty()) fail(errc::invalid_argument, "transformer: no attention heads");
    if (use_positional)
      fail(errc::invalid_argument,
           "transformer: positional encoding hook is reserved and unimplemented");
    auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const char* what) {
      if (m.rows != r || m.cols != c)
        fail(errc::invalid_argument, std::string("transformer: bad shape for ") + what);
      m.require_finite(what);
    };
    expect(embedding, vocab.size(), d_model, "embedding");
    expect(unembedding, d_model, vocab.size(), "unembedding");
    if (!(transpose(embedding) == unembedding))
      fail(errc::invalid_argument, "transformer: unembedding must equal embedding transposed");
    for (const HeadWeights& h : heads) {
      expect(h.w_q, d_model, d_k, "w_q");
      expect(h.w_k, d_model, d_k, "w_k");
      expect(h.w_v, d_model, d_v, "w_v");
      expect(h.w_o, d_v, d_model, "w_o");
    }
    expect(w1, d_model, d_ff, "w1");
    expect(w2, d_ff, d_model, "w2");
    if (b1.size() != d_ff || b2.size() != d_model)
      fail(errc::invalid_argument, "transformer: bias length mismatch");
    require_finite(b1, "b1");
    require_finite(b2, "b2");
  }
};

// Everything one head computed, per position.  Attention rows are ragged:
// row t has t+1 entries because position t only sees positions <= t.
struct HeadTrace {
  Matrix q;  // T x d_k
  Matrix k;  // T x d_k (row j is K_j; the slice seen at t is rows 0..t)
  Matrix v;  // T x d_v
  std::vector<Vec> scores;  // scaled dot products, ragged lower-triangular
  std::vector<Vec> alpha;   // attention weights, each row a distribution
  Matrix attended;  // T x d_v, row t = sum_j alpha[t][j] * v_j (the head's h_t)
  Matrix output;    // T x d_model, row t = attended_t * w_o
  Vec logits;       // attended output at the final position through unembedding
};

struct BlockTrace {
  std::vector<HeadTrace> heads;
  Matrix attn;   // sum of head outputs (a_t rows)
  Matrix x_mid;  // input + attn
  Matrix ffn;    // z rows
  Matrix x_out;  // x_mid + ffn
};

struct ForwardTrace {
  std::vector<std::size_t> tokens;
  Matrix x0;  // embedded input, T x d_model
  BlockTrace block;
  Vec logits_base;  // x0 last row through unembedding (L_0)
  Vec logits_attn;  // attention contribution at last row (L_a)
  Vec logits_ffn;   // feed-forward contribution at last row (L_f)
  Vec logits;       // L_0 + L_a + L_f
  Vec dist;         // softmax(logits)
  std::size_t predicted = 0;  // argmax of dist, lowest index on ties
};

// One softmax-attention head over input rows x (T x d_model).
inline HeadTrace run_head(const TransformerSpec& spec, const HeadWeights& w, const Matrix& x) {
  HeadTrace head;
  head.q = matmul(x, w.w_q);
  head.k = matmul(x, w.w_k);
  head.v = matmul(x, w.w_v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_k));
  head.attended = Matrix::zeros(x.rows, spec.d_v);
  head.output = Matrix::zeros(x.rows, spec.d_model);
  for (std::size_t t = 0; t < x.rows; ++t) {
    Vec scores(t + 1, 0.0);
    for (std::size_t j = 0; j <= t; ++j) scores[j] = dot(head.q.row(t), head.k.row(j)) * scale;
    head.scores.push_back(scores);
    head.alpha.push_back(softmax(scores));
    Vec h(spec.d_v, 0.0);
    for (std::size_t j = 0; j <= t; ++j)
      for (std::size_t c = 0; c < spec.d_v; ++c) h[c] += head.alpha[t][j] * head.v.at(j, c);
    head.attended.set_row(t, h);
    head.output.set_row(t, vec_mat(h, w.w_o));
  }
  return head;
}

// One residual block: x -> x + sum_h head_h(x) -> + ffn(.), with full trace.
inline BlockTrace run_block(const TransformerSpec& spec, const Matrix& x) {
  if (x.cols != spec.d_model)
    fail(errc::invalid_argument, "block input width must equal d_model");
  x.require_finite("block input");
  BlockTrace block;
  block.attn = Matrix::zeros(x.rows, spec.d_model);
  for (const HeadWeights& w : spec.heads) {
    block.heads.push_back(run_head(spec, w, x));
    block.attn = add(block.attn, block.heads.back().output);
  }
  block.x_mid = add(x, block.attn);
  block.ffn = Matrix::zeros(x.rows, spec.d_model);
  for (std::size_t t = 0; t < x.rows; ++t) {
    Vec u = vec_add(vec_mat(block.x_mid.row(t), spec.w1), spec.b1);
    for (double& e : u) e = std::max(0.0, e);
    block.ffn.set_row(t, vec_add(vec_mat(u, spec.w2), spec.b2));
  }
  block.x_out = add(block.x_mid, block.ffn);
  return block;
}

inline Matrix embed(const TransformerSpec& spec, const std::vector<std::size_t>& tokens) {
  if (tokens.empty()) fail(errc::invalid_argument, "forward: empty token sequence");
  if (tokens.size() > spec.max_seq)
    fail(errc::invalid_argument, "forward: sequence longer than the configured maximum");
  Matrix x0(tokens.size(), spec.d_model);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] >= spec.vocab_size())
      fail(errc::invalid_argument, "forward: token index out of vocabulary range");
    x0.set_row(t, spec.embedding.row(tokens[t]));
  }
  return x0;
}

inline std::size_t argmax_index(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline ForwardTrace forward(const TransformerSpec& spec, const std::vector<std::size_t>& tokens) {
  spec.validate();
  ForwardTrace trace;
  trace.tokens = tokens;
  trace.x0 = embed(spec, tokens);
  trace.block = run_block(spec, trace.x0);
  const std::size_t last = tokens.size() - 1;
  trace.logits_base = vec_mat(trace.x0.row(last), spec.unembedding);
  trace.logits_attn = vec_mat(trace.block.attn.row(last), spec.unembedding);
  trace.logits_ffn = vec_mat(trace.block.ffn.row(last), spec.unembedding);
  trace.logits = vec_add(vec_add(trace.logits_base, trace.logits_attn), trace.logits_ffn);
  trace.dist = softmax(trace.logits);
  trace.predicted = argmax_index(trace.dist);
  for (std::size_t h = 0; h < trace.block.heads.size(); ++h)
    trace.block.heads[h].logits =
        vec_mat(trace.block.heads[h].output.row(last), spec.unembedding);
  return trace;
}

// ---------------------------------------------------------------------------
// Aggregation diagnostics.

struct LseGapReport {
  Vec log_z_heads;                 // log partition per head
  double log_z_joint = 0.0;        // log partition of the summed logits
  double gamma = 0.0;              // sum of head log-partitions minus joint
  std::vector<Vec> head_dists;     // softmax of each head's logits
  Vec poe;                         // softmax of the summed logits
};

inline LseGapReport lse_gap(const std::vector<Vec>& head_logits) {
  if (head_logits.empty()) fail(errc::invalid_argument, "lse_gap: no heads");
  const std::size_t dim = head_logits.front().size();
  if (dim == 0) fail(errc::invalid_argument, "lse_gap: empty logit vectors");
  LseGapReport report;
  Vec summed(dim, 0.0);
  for (const Vec& l : head_logits) {
    if (l.size() != dim) fail(errc::invalid_argument, "lse_gap: head dimension mismatch");
    require_finite(l, "lse_gap: head logits");
    report.log_z_heads.push_back(log_sum_exp(l));
    report.head_dists.push_back(softmax(l));
    summed = vec_add(summed, l);
  }
  report.log_z_joint = log_sum_exp(summed);
  report.poe = softmax(summed);
  report.gamma = -report.log_z_joint;
  for (double z : report.log_z_heads) report.gamma += z;
  return report;
}

inline LseGapReport lse_gap(const ForwardTrace& trace) {
  std::vector<Vec> head_logits;
  for (const HeadTrace& h : trace.block.heads) head_logits.push_back(h.logits);
  return lse_gap(head_logits);
}

// Normalized elementwise product of the heads' softmax distributions.  This
// is the product-of-experts route; it must agree with softmax of summed
// logits (the lse_gap route) to float precision, and the two are computed
// independently so that the agreement stays a checkable fact.
inline Vec poe_distribution(const std::vector<Vec>& head_logits) {
  if (head_logits.empty()) fail(errc::invalid_argument, "poe: no heads");
  const std::size_t dim = head_logits.front().size();
  Vec product(dim, 1.0);
  for (const Vec& l : head_logits) {
    if (l.size() != dim) fail(errc::invalid_argument, "poe: head dimension mismatch");
    const Vec d = softmax(l);
    for (std::size_t j = 0; j < dim; ++j) product[j] *= d[j];
  }
  double mass = 0.0;
  for (double p : product) mass += p;
  if (!(mass > 0.0) || !std::isfinite(mass))
    fail(errc::degenerate_input, "poe: product distribution has no mass");
  for (double& p : product) p /= mass;
  return product;
}

// Attention energy of one block application: squared norms of every head's
// attended vectors across positions.
inline double block_energy(const BlockTrace& block) {
  double e = 0.0;
  for (const HeadTrace& head : block.heads)
    for (std::size_t t = 0; t < head.attended.rows; ++t) {
      const Vec h = head.attended.row(t);
      e += dot(h, h);
    }
  return e;
}

// Discounted attention energy of iterated blocks, maximized over the input
// set: max_X sum_{l=1..depth} discount^{l-1} * energy of block application l.
// An empty input set carries zero energy.
inline double semantic_energy(const TransformerSpec& spec, const std::vector<Matrix>& inputs,
                              std::size_t depth, double discount) {
  spec.validate();
  if (!(discount > 0.0 && discount < 1.0))
    fail(errc::invalid_argument, "semantic_energy: discount must lie in (0,1)");
  double best = 0.0;
  for (const Matrix& input : inputs) {
    Matrix x = input;
    double total = 0.0;
    double factor = 1.0;
    for (std::size_t l = 1; l <= depth; ++l) {
      BlockTrace block = run_block(spec, x);
      total += factor * block_energy(block);
      factor *= discount;
      x = block.x_out;
    }
    if (total > best) best = total;
  }
  return best;
}

// States reachable by applying the block at most `depth` times to each
// input.  Exact duplicates collapse; insertion order is preserved (inputs
// first, then new states in generation order).
inline std::vector<Matrix> emergence_states(const TransformerSpec& spec,
                                            const std::vector<Matrix>& inputs,
                                            std::size_t depth) {
  spec.validate();
  std::vector<Matrix> states;
  auto insert_unique = [&states](const Matrix& m) {
    for (const Matrix& s : states)
      if (s == m) return;
    states.push_back(m);
  };
  for (const Matrix& input : inputs) insert_unique(input);
  for (const Matrix& input : inputs) {
    Matrix x = input;
    for (std::size_t c = 1; c <= depth; ++c) {
      x = run_block(spec, x).x_out;
      insert_unique(x);
    }
  }
  return states;
}

// ---------------------------------------------------------------------------
// Linear (kernelized) attention variant.

enum class FeatureMap { elu1p, relu };

inline FeatureMap feature_map_from_string(const std::string& name) {
  if (name == "elu1p") return FeatureMap::elu1p;
  if (name == "relu") return FeatureMap::relu;
  fail(errc::parse, "unknown feature map '" + name + "' (expected 'elu1p' or 'relu')");
}

inline double apply_feature(FeatureMap map, double x) {
  if (map == FeatureMap::elu1p) return x >= 0.0 ? x + 1.0 : std::exp(x);
  return std::max(0.0, x);
}

inline Vec apply_feature(FeatureMap map, const Vec& v) {
  Vec out = v;
  for (double& e : out) e = apply_feature(map, e);
  return out;
}

// Forward pass with attention weights phi(q_t).phi(k_j) / sum_j' of same,
// instead of softmax.  Everything downstream of the weights is unchanged.
inline ForwardTrace linear_attention_forward(const TransformerSpec& spec,
                                             const std::vector<std::size_t>& tokens,
                                             FeatureMap map) {
  spec.validate();
  ForwardTrace trace;
  trace.tokens = tokens;
  trace.x0 = embed(spec, tokens);
  const Matrix& x = trace.x0;
  BlockTrace& block = trace.block;
  block.attn = Matrix::zeros(x.rows, spec.d_model);
  for (const HeadWeights& w : spec.heads) {
    HeadTrace head;
    head.q = matmul(x, w.w_q);
    head.k = matmul(x, w.w_k);
    head.v = matmul(x, w.w_v);
    head.attended = Matrix::zeros(x.rows, spec.d_v);
    head.output = Matrix::zeros(x.rows, spec.d_model);
    for (std::size_t t = 0; t < x.rows; ++t) {
      const Vec fq = apply_feature(map, head.q.row(t));
      Vec similarities(t + 1, 0.0);
      double normalizer = 0.0;
      for (std::size_t j = 0; j <= t; ++j) {
        similarities[j] = dot(fq, apply_feature(map, head.k.row(j)));
        normalizer += similarities[j];
      }
      head.scores.push_back(similarities);
      if (!(normalizer > 0.0))
        fail(errc::degenerate_input, "linear attention: zero normalizer at position " +
                                         std::to_string(t));
      Vec alpha(t + 1, 0.0);
      for (std::size_t j = 0; j <= t; ++j) alpha[j] = similarities[j] / normalizer;
      head.alpha.push_back(alpha);
      Vec h(spec.d_v, 0.0);
      for (std::size_t j = 0; j <= t; ++j)
        for (std::size_t c = 0; c < spec.d_v; ++c) h[c] += alpha[j] * head.v.at(j, c);
      head.attended.set_row(t, h);
      head.output.set_row(t, vec_mat(h, w.w_o));
    }
    block.attn = add(block.attn, head.output);
    block.heads.push_back(std::move(head));
  }
  block.x_mid = add(x, block.attn);
  block.ffn = Matrix::zeros(x.rows, spec.d_model);
  for (std::size_t t = 0; t < x.rows; ++t) {
    Vec u = vec_add(vec_mat(block.x_mid.row(t), spec.w1), spec.b1);
    for (double& e : u) e = std::max(0.0, e);
    block.ffn.set_row(t, vec_add(vec_mat(u, spec.w2), spec.b2));
  }
  block.x_out = add(block.x_mid, block.ffn);
  const std::size_t last = tokens.size() - 1;
  trace.logits_base = vec_mat(trace.x0.row(last), spec.unembedding);
  trace.logits_attn = vec_mat(block.attn.row(last), spec.unembedding);
  trace.logits_ffn = vec_mat(block.ffn.row(last), spec.unembedding);
  trace.logits = vec_add(vec_add(trace.logits_base, trace.logits_attn), trace.logits_ffn);
  trace.dist = softmax(trace.logits);
  trace.predicted = argmax_index(trace.dist);
  for (std::size_t h = 0; h < block.heads.size(); ++h)
    block.heads[h].logits = vec_mat(block.heads[h].output.row(last), spec.unembedding);
  return trace;
}

// ---------------------------------------------------------------------------
// The hand-traceable reference model shipped with the repository: 5-dim
// residual stream, two heads of width 2, ReLU feed-forward of width 6, and a
// six-word vocabulary whose embeddings are zero (padding) plus the five
// standard basis vectors.
inline TransformerSpec reference_spec() {
  TransformerSpec spec;
  spec.d_model = 5;
  spec.d_k = 2;
  spec.d_v = 2;
  spec.d_ff = 6;
  spec.max_seq = 3;
  spec.vocab = {"<pad>", "The", "quick", "brown", "fox", "dog"};
  spec.embedding = Matrix::zeros(6, 5);
  for (std::size_t i = 1; i < 6; ++i) spec.embedding.at(i, i - 1) = 1.0;
  spec.unembedding = transpose(spec.embedding);

  HeadWeights h1;
  h1.w_q = Matrix::zeros(5, 2);
  h1.w_q.at(2, 1) = 1.0;
  h1.w_k = h1.w_q;
  h1.w_v = Matrix::zeros(5, 2);
  h1.w_v.at(2, 1) = 3.0;
  h1.w_o = Matrix::zeros(2, 5);
  h1.w_o.at(1, 3) = 1.0;

  HeadWeights h2;
  h2.w_q = Matrix::zeros(5, 2);
  h2.w_q.at(2, 0) = 1.0;
  h2.w_k = h2.w_q;
  h2.w_v = Matrix::zeros(5, 2);
  h2.w_v.at(2, 0) = 1.2;
  h2.w_o = Matrix::zeros(2, 5);
  h2.w_o.at(0, 4) = 1.0;

  spec.heads = {h1, h2};

  spec.w1 = Matrix::zeros(5, 6);
  for (std::size_t i = 0; i < 5; ++i) spec.w1.at(i, i) = 1.0;
  spec.w2 = Matrix::zeros(6, 5);
  spec.w2.at(2, 2) = 0.13;
  spec.w2.at(3, 3) = -0.13;
  spec.w2.at(3, 4) = -0.05;
  spec.w2.at(4, 0) = -0.05;
  spec.w2.at(4, 1) = 0.35;
  spec.b1 = Vec(6, 0.0);
  spec.b2 = Vec(5, 0.0);
  return spec;
}

inline std::vector<std::size_t> tokens_from_words(const TransformerSpec& spec,
                                                  const std::vector<std::string>& words) {
  std::vector<std::size_t> out;
  for (const std::string& w : words) {
    bool found = false;
    for (std::size_t i = 0; i < spec.vocab.size(); ++i)
      if (spec.vocab[i] == w) {
        out.push_back(i);
        found = true;
        break;
      }
    if (!found) fail(errc::invalid_argument, "unknown vocabulary word '" + w + "'");
  }
  return out;
}

}  // namespace infergap
