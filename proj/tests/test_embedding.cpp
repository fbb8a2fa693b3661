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

#include <cmath>
#include <map>
#include <memory>
#include <string>

#include "doctest.h"
#include "mrl/embedding.hpp"
#include "mrl/error.hpp"

using namespace mrl;

namespace {

// Count vector built by hand: FNV-1a written out again, buckets mod 256.
std::vector<double> count_vector(const std::vector<std::string>& tokens) {
  std::vector<double> v(256, 0.0);
  for (const std::string& tok : tokens) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : tok) h = (h ^ c) * 1099511628211ULL;
    v[h % 256] += 1.0;
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  for (double& x : v) x /= std::sqrt(n);
  return v;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("Click the 'Save' button") == std::vector<std::string>{"click", "the", "save", "button"});
  CHECK(tokenize("Input <Value> as the note name") == std::vector<std::string>{"input", "as", "the", "note", "name"});
  CHECK(tokenize("a<b") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("") .empty());
  CHECK(tokenize("<Only>").empty());
  CHECK(tokenize("x2 y-z") == std::vector<std::string>{"x2", "y", "z"});
}

TEST_CASE("reference embedder") {
  const HashedBagOfWordsEmbedder e;
  CHECK(e.dim() == 256);
  SUBCASE("deterministic") { CHECK(e.embed("click the button") == e.embed("click the button")); }
  SUBCASE("order invariant, equal to the hand-built count vector") {
    const EmbeddingVector a = e.embed("click the button");
    const EmbeddingVector b = e.embed("button click the");
    CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-15));
    const auto expect = count_vector({"click", "the", "button"});
    for (std::size_t i = 0; i < 256; ++i) CHECK(a[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  }
  SUBCASE("unit norm") {
    CHECK(e.embed("Select the 'Bob' entry").squared_norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("empty text") {
    const EmbeddingVector z = e.embed("");
    CHECK(z.is_zero());
    CHECK(z.dim() == 256);
    CHECK(cosine(z, e.embed("anything at all")) == 0.0);
    CHECK(cosine(z, z) == 0.0);
  }
  SUBCASE("placeholders are dropped") {
    CHECK(e.embed("Input <Value> as the note name") == e.embed("Input as the note name"));
  }
}

TEST_CASE("caching embedder returns the inner result") {
  auto inner = std::make_shared<HashedBagOfWordsEmbedder>();
  const CachingEmbedder cached(inner);
  CHECK(cached.embed("Open the Notes app") == inner->embed("Open the Notes app"));
  const EmbeddingVector& r1 = cached.embed_ref("Open the Notes app");
  const EmbeddingVector& r2 = cached.embed_ref(std::string("Open the Notes app"));
  CHECK(&r1 == &r2);
  CHECK(cached.dim() == 256);
}

TEST_CASE("cosine") {
  SUBCASE("hand values") {
    const EmbeddingVector a({1.0, 1.0, 0.0});
    const EmbeddingVector b({1.0, 0.0, 0.0});
    CHECK(std::abs(cosine(a, b) - 0.7071) <= 1e-4);
    CHECK(cosine(b, b) == 1.0);
    CHECK(cosine(a, a) == 1.0);
    CHECK(cosine(EmbeddingVector({0.0, 1.0, 0.0}), b) == 0.0);
    CHECK(cosine(EmbeddingVector({3.0, 4.0}), EmbeddingVector({1.0, 0.0})) == 0.6);
  }
  SUBCASE("symmetric") {
    const HashedBagOfWordsEmbedder e;
    const char* texts[] = {"Open the Notes app", "Click the 'Save' button", "Toggle the dark mode switch",
                           "Save the note", "Navigate back to the previous screen"};
    for (const char* x : texts) {
      for (const char* y : texts) CHECK(cosine(e.embed(x), e.embed(y)) == cosine(e.embed(y), e.embed(x)));
      CHECK(cosine(e.embed(x), e.embed(x)) == 1.0);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(cosine(EmbeddingVector({1.0, 0.0}), EmbeddingVector({1.0, 0.0, 0.0})), DimensionError);
  }
}
