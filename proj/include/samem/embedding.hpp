#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "samem/error.hpp"

namespace samem {

using TokenVector = std::vector<double>;

// One frame's embedding: an ordered list of same-dimension token vectors.
// Storage is a flat row-major buffer; token order is meaningful and preserved
// by every operation in this library. All entries must be finite.
class TokenMatrix {
 public:
  TokenMatrix() = default;

  explicit TokenMatrix(std::size_t dim) : dim_(dim) {}

  TokenMatrix(std::initializer_list<TokenVector> rows) {
    for (const auto& row : rows) push_token(row);
  }

  static TokenMatrix from_rows(const std::vector<TokenVector>& rows) {
    TokenMatrix m;
    for (const auto& row : rows) m.push_token(row);
    return m;
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> token(std::size_t i) const {
    if (i >= size()) throw DimensionError("token index out of range");
    return {data_.data() + i * dim_, dim_};
  }

  void push_token(std::span<const double> tok) {
    if (tok.empty()) throw DimensionError("token must have dimension >= 1");
    if (dim_ == 0) {
      dim_ = tok.size();
    } else if (tok.size() != dim_) {
      throw DimensionError("token dimension " + std::to_string(tok.size()) +
                           " does not match matrix dimension " +
                           std::to_string(dim_));
    }
    for (double v : tok) {
      if (!std::isfinite(v)) throw ConfigError("non-finite token entry");
    }
    data_.insert(data_.end(), tok.begin(), tok.end());
  }

  void push_token(const TokenVector& tok) {
    push_token(std::span<const double>(tok));
  }

  const std::vector<double>& raw() const noexcept { return data_; }

  friend bool operator==(const TokenMatrix&, const TokenMatrix&) = default;

 private:
  std::vector<double> data_;
  std::size_t dim_ = 0;
};

// Cosine similarity in [-1, 1]. A zero-norm input yields 0.0 so padding or
// degenerate tokens never poison a relevance score.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: dimension mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine(const TokenVector& a, const TokenVector& b) {
  return cosine(std::span<const double>(a), std::span<const double>(b));
}

// Elementwise arithmetic mean over all tokens.
inline TokenVector mean_pool(const TokenMatrix& m) {
  if (m.empty()) throw DimensionError("mean_pool: empty frame");
  TokenVector out(m.dim(), 0.0);
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto tok = m.token(i);
    for (std::size_t d = 0; d < tok.size(); ++d) out[d] += tok[d];
  }
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

// Downsample n tokens to exactly k by averaging contiguous bins.
// Bin i covers input indices [floor(i*n/k), floor((i+1)*n/k)). For k <= n
// the bins partition [0, n); k == n is the identity and k == 1 equals
// mean_pool. For k > n an empty floor bin degenerates to the single token at
// its start index, so tokens repeat rather than vanish.
inline TokenMatrix adaptive_avg_pool(const TokenMatrix& m, std::size_t k) {
  if (k == 0) throw ConfigError("adaptive_avg_pool: k must be >= 1");
  if (m.empty()) throw DimensionError("adaptive_avg_pool: empty frame");
  const std::size_t n = m.size();
  const std::size_t d = m.dim();
  TokenMatrix out(d);
  TokenVector bin(d);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t start = (i * n) / k;
    std::size_t end = ((i + 1) * n) / k;
    if (end <= start) end = start + 1;
    std::fill(bin.begin(), bin.end(), 0.0);
    for (std::size_t t = start; t < end; ++t) {
      auto tok = m.token(t);
      for (std::size_t c = 0; c < d; ++c) bin[c] += tok[c];
    }
    const double width = static_cast<double>(end - start);
    for (double& v : bin) v /= width;
    out.push_token(bin);
  }
  return out;
}

// Indices of the k largest scores, ties broken toward the smaller index,
// returned ascending so downstream token order is preserved. k larger than
// the score count returns every index.
inline std::vector<std::size_t> top_k_indices(std::span<const double> scores,
                                              std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k < scores.size()) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

inline std::vector<std::size_t> top_k_indices(const std::vector<double>& scores,
                                              std::size_t k) {
  return top_k_indices(std::span<const double>(scores), k);
}

}  // namespace samem
