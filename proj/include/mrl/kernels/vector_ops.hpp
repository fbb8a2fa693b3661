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

// Dense double-precision kernels used by the embedding matcher, advantage
// normalization and the policy update. Every kernel has a scalar reference
// implementation; an AVX2+FMA variant is selected at runtime when the CPU
// supports it. Results of the two paths agree to rounding (summation order
// differs), which the kernel equivalence tests pin down.

#ifndef MRL_KERNELS_VECTOR_OPS_HPP_
#define MRL_KERNELS_VECTOR_OPS_HPP_

#include <span>
#include <string_view>

namespace mrl::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Best instruction set the running CPU supports (and this build compiled).
Isa detected_isa();

// Instruction set the dispatching entry points currently use. Defaults to
// detected_isa(); the environment variable MRL_FORCE_SCALAR=1 pins scalar.
Isa active_isa();

// Overrides the dispatch target. Requesting an unsupported ISA falls back to
// scalar. Not thread safe with concurrent kernel calls; intended for tests
// and benchmarks.
void set_active_isa(Isa isa);

// Dispatching entry points. Spans passed together must have equal length
// (checked by the callers that own the dimension contract).
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
// sum_i (x_i - mean)^2
double sum_squared_deviation(std::span<const double> x, double mean);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// x *= alpha
void scale(double alpha, std::span<double> x);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
double sum_squared_deviation(std::span<const double> x, double mean);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MRL_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
double sum_squared_deviation(std::span<const double> x, double mean);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
}  // namespace avx2
#endif

}  // namespace mrl::kernels

#endif  // MRL_KERNELS_VECTOR_OPS_HPP_
