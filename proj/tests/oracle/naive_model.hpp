#pragma once

// Straightforward scalar re-implementation of the bidirectional GRU forward
// pass. Reads parameters element by element and uses plain loops so it shares
// no code path with the Eigen implementation it checks.

#include <cmath>
#include <vector>

#include "clickbait/nn.hpp"
#include "clickbait/rng.hpp"

namespace clickbait::oracle {

using Vec = std::vector<double>;

inline double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline Vec naive_step(const GruParams<double>& p, const Vec& x, const Vec& prev) {
  const auto h = static_cast<std::size_t>(p.u_reset.rows());
  const auto d = x.size();
  Vec r(h), z(h), uc(h), out(h);
  for (std::size_t i = 0; i < h; ++i) {
    double ar = p.b_reset(i), az = p.b_update(i), u = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      ar += p.w_reset(i, j) * x[j];
      az += p.w_update(i, j) * x[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      ar += p.u_reset(i, j) * prev[j];
      az += p.u_update(i, j) * prev[j];
      u += p.u_candidate(i, j) * prev[j];
    }
    r[i] = sig(ar);
    z[i] = sig(az);
    uc[i] = u;
  }
  for (std::size_t i = 0; i < h; ++i) {
    double ac = p.b_candidate(i) + r[i] * uc[i];
    for (std::size_t j = 0; j < d; ++j) ac += p.w_candidate(i, j) * x[j];
    const double cand = std::tanh(ac);
    out[i] = (1.0 - z[i]) * prev[i] + z[i] * cand;
  }
  return out;
}

inline double naive_predict(const Model<double>& m, const TokenSequence& seq) {
  const auto d = static_cast<std::size_t>(m.embedding.matrix.cols());
  std::vector<Vec> xs;
  for (std::size_t t = 0; t < seq.length; ++t) {
    Vec x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = m.embedding.matrix(seq.ids[t], static_cast<Eigen::Index>(j));
    xs.push_back(x);
  }
  Vec fwd(static_cast<std::size_t>(m.forward.u_reset.rows()), 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t) fwd = naive_step(m.forward, xs[t], fwd);
  Vec bwd(static_cast<std::size_t>(m.backward.u_reset.rows()), 0.0);
  for (std::size_t t = xs.size(); t-- > 0;) bwd = naive_step(m.backward, xs[t], bwd);

  double logit = m.head.bias;
  for (std::size_t i = 0; i < fwd.size(); ++i) logit += m.head.weights(static_cast<Eigen::Index>(i)) * fwd[i];
  for (std::size_t i = 0; i < bwd.size(); ++i) {
    logit += m.head.weights(static_cast<Eigen::Index>(fwd.size() + i)) * bwd[i];
  }
  return sig(logit);
}

/// Random double-precision model with entries uniform in [-scale, scale].
inline Model<double> random_model(Generator& gen, Eigen::Index vocab, Eigen::Index dim, Eigen::Index hidden,
                                  double scale = 0.5) {
  auto fill = [&](auto& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = uniform(gen, -scale, scale);
  };
  Model<double> m;
  m.embedding.matrix.resize(vocab, dim);
  fill(m.embedding.matrix);
  m.embedding.matrix.row(0).setZero();
  m.forward = GruParams<double>::zeros(hidden, dim);
  m.backward = GruParams<double>::zeros(hidden, dim);
  for_each_gru_array(m.forward, [&](const char*, auto& a) { fill(a); });
  for_each_gru_array(m.backward, [&](const char*, auto& a) { fill(a); });
  m.head.weights.resize(2 * hidden);
  fill(m.head.weights);
  m.head.bias = uniform(gen, -scale, scale);
  m.dropout = {0.0, 0.0, 0.0};
  return m;
}

/// Random sequence of 0..max_len tokens drawn from ids [1, vocab).
inline TokenSequence random_sequence(Generator& gen, Eigen::Index vocab, std::size_t max_len, bool allow_empty = true) {
  TokenSequence seq;
  const std::size_t lo = allow_empty ? 0 : 1;
  seq.length = lo + gen() % (max_len - lo + 1);
  seq.ids.assign(max_len, 0);
  for (std::size_t t = 0; t < seq.length; ++t) seq.ids[t] = static_cast<std::int32_t>(1 + gen() % (vocab - 1));
  return seq;
}

}  // namespace clickbait::oracle
