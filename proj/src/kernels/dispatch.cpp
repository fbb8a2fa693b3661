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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "mrl/kernels/vector_ops.hpp"

namespace mrl::kernels {
namespace {

struct KernelTable {
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum)(std::span<const double>);
  double (*sum_squared_deviation)(std::span<const double>, double);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*scale)(double, std::span<double>);
};

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::sum,
                                   &scalar::sum_squared_deviation,
                                   &scalar::axpy, &scalar::scale};

#if defined(MRL_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::sum,
                                 &avx2::sum_squared_deviation, &avx2::axpy,
                                 &avx2::scale};
#endif

const KernelTable* table_for(Isa isa) {
#if defined(MRL_HAVE_AVX2_KERNELS)
  if (isa == Isa::kAvx2) return &kAvx2Table;
#endif
  (void)isa;
  return &kScalarTable;
}

Isa initial_isa() {
  const char* force = std::getenv("MRL_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0 && *force != '\0') {
    return Isa::kScalar;
  }
  return detected_isa();
}

std::atomic<const KernelTable*>& current_table() {
  static std::atomic<const KernelTable*> table{table_for(initial_isa())};
  return table;
}

std::atomic<Isa>& current_isa() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const KernelTable& active() {
  return *current_table().load(std::memory_order_relaxed);
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
#if defined(MRL_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::kAvx2;
  }
#endif
  return Isa::kScalar;
}

Isa active_isa() { return current_isa().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2) isa = Isa::kScalar;
  current_isa().store(isa, std::memory_order_relaxed);
  current_table().store(table_for(isa), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a, b);
}

double sum(std::span<const double> x) { return active().sum(x); }

double sum_squared_deviation(std::span<const double> x, double mean) {
  return active().sum_squared_deviation(x, mean);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x, y);
}

void scale(double alpha, std::span<double> x) { active().scale(alpha, x); }

}  // namespace mrl::kernels
