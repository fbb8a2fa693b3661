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

#include "mrl/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mrl/error.hpp"
#include "mrl/kernels/vector_ops.hpp"

namespace mrl {

EmbeddingVector::EmbeddingVector(std::vector<double> components)
    : components_(std::move(components)),
      squared_norm_(kernels::dot(components_, components_)) {}

bool EmbeddingVector::is_zero() const {
  for (double c : components_) {
    if (c != 0.0) return false;
  }
  return true;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '<') {
      const std::size_t close = text.find('>', i + 1);
      const std::size_t reopen = text.find('<', i + 1);
      if (close != std::string_view::npos && (reopen == std::string_view::npos || close < reopen)) {
        flush();
        i = close;
        continue;
      }
    }
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::isalnum(uc)) {
      current += static_cast<char>(std::tolower(uc));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector HashedBagOfWordsEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dim_, 0.0);
  for (const std::string& token : tokenize(text)) {
    v[fnv1a64(token) % dim_] += 1.0;
  }
  const double norm_sq = kernels::dot(v, v);
  if (norm_sq > 0.0) kernels::scale(1.0 / std::sqrt(norm_sq), v);
  return EmbeddingVector(std::move(v));
}

const EmbeddingVector& CachingEmbedder::embed_ref(std::string_view text) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(text);
  if (it != cache_.end()) return *it->second;
  auto inserted = cache_.emplace(std::string(text),
                                 std::make_unique<EmbeddingVector>(inner_->embed(text)));
  return *inserted.first->second;
}

EmbeddingVector CachingEmbedder::embed(std::string_view text) const {
  return embed_ref(text);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("cosine of vectors with dimensions " + std::to_string(a.dim()) +
                         " and " + std::to_string(b.dim()));
  }
  const double na = a.squared_norm();
  const double nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  // sqrt(x*x) == x exactly, so cosine(a, a) is exactly 1.
  const double c = kernels::dot(a.components(), b.components()) / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace mrl
