#pragma once

// Execution policy and deterministic reductions.
//
// Work over n items is cut into fixed-size blocks; the partition depends on
// n only, never on the thread count. Kernels write disjoint ranges or
// produce per-block partials that are combined in block order, so the
// OpenMP policy is bit-identical to the serial reference for every input.

#include <cstddef>
#include <functional>
#include <span>

#include "cfk/types.hpp"

namespace cfk::exec {

enum class Policy { Serial, Parallel };

void set_policy(Policy p);
Policy policy();

inline constexpr std::size_t kBlock = 4096;

std::size_t block_count(std::size_t n);

// fn(block_index, begin, end) over the fixed partition of [0, n).
void for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace cfk::exec

namespace cfk {

// Fixed-order pairwise sum (serial reference).
double pairwise_sum(std::span<const double> xs);

// Block-parallel sum with the same association order as pairwise_sum over
// per-block partials; bit-identical across policies and thread counts.
double det_sum(std::span<const double> xs);
Complex det_sum(std::span<const Complex> xs);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};

struct ComplexMeanStderr {
  Complex mean{0.0, 0.0};
  // Combined standard error sqrt((var_re + var_im) / n); the scalar scale
  // used by every |mean| <= k * se assertion.
  double se = 0.0;
};

MeanStderr mean_stderr(std::span<const double> xs);
ComplexMeanStderr mean_stderr(std::span<const Complex> xs);

}  // namespace cfk
