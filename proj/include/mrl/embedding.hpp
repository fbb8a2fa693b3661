// Copyright 2026 The Milestone RL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MRL_EMBEDDING_HPP_
#define MRL_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mrl {

inline constexpr std::size_t kEmbeddingDim = 256;

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> components);

  std::size_t dim() const { return components_.size(); }
  std::span<const double> components() const { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }
  bool is_zero() const;
  // Sum of squared components, computed once at construction.
  double squared_norm() const { return squared_norm_; }

  bool operator==(const EmbeddingVector& other) const { return components_ == other.components_; }

 private:
  std::vector<double> components_;
  double squared_norm_ = 0.0;
};

// Text encoder interface. Implementations must be deterministic and safe to
// call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

// Lowercases, drops <Placeholder> tokens, and splits on non-alphanumeric
// characters. ASCII only; other bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

// 64-bit FNV-1a over the token bytes.
std::uint64_t fnv1a64(std::string_view bytes);

// Hashed bag of words: token counts folded into `dim` buckets by
// fnv1a64(token) % dim, then L2-normalized. Token-free text maps to the zero
// vector.
class HashedBagOfWordsEmbedder : public Embedder {
 public:
  explicit HashedBagOfWordsEmbedder(std::size_t dim = kEmbeddingDim) : dim_(dim) {}
  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

// Memoizing decorator; action vocabularies are small and repeat constantly.
class CachingEmbedder : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<const Embedder> inner)
      : inner_(std::move(inner)) {}
  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dim() const override { return inner_->dim(); }
  // Returns a reference valid for the lifetime of this cache.
  const EmbeddingVector& embed_ref(std::string_view text) const;

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::mutex mu_;
  struct TextHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  mutable std::unordered_map<std::string, std::unique_ptr<EmbeddingVector>, TextHash,
                             std::equal_to<>>
      cache_;
};

// dot(a,b) / (|a| |b|); 0 when either norm is 0. Throws DimensionError on
// mismatched dimensions.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace mrl

#endif  // MRL_EMBEDDING_HPP_
