#include "cfk/parallel.hpp"

#include <atomic>
#include <cmath>
#include <vector>

namespace cfk::exec {

namespace {
std::atomic<Policy> g_policy{Policy::Parallel};
}

void set_policy(Policy p) { g_policy.store(p); }
Policy policy() { return g_policy.load(); }

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

void for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t blocks = block_count(n);
  if (policy() == Policy::Parallel && blocks > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
      const std::size_t end = std::min(begin + kBlock, n);
      fn(static_cast<std::size_t>(b), begin, end);
    }
  } else {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t begin = b * kBlock;
      const std::size_t end = std::min(begin + kBlock, n);
      fn(b, begin, end);
    }
  }
}

}  // namespace cfk::exec

namespace cfk {

namespace {

double pairwise_sum_impl(const double* xs, std::size_t n) {
  if (n <= 64) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += xs[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(xs, half) + pairwise_sum_impl(xs + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum_impl(xs.data(), xs.size());
}

double det_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= exec::kBlock) return pairwise_sum(xs);
  std::vector<double> partials(exec::block_count(n), 0.0);
  exec::for_blocks(n, [&](std::size_t b, std::size_t begin, std::size_t end) {
    partials[b] = pairwise_sum_impl(xs.data() + begin, end - begin);
  });
  return pairwise_sum(partials);
}

Complex det_sum(std::span<const Complex> xs) {
  const std::size_t n = xs.size();
  std::vector<Complex> partials(exec::block_count(n), Complex{0.0, 0.0});
  exec::for_blocks(n, [&](std::size_t b, std::size_t begin, std::size_t end) {
    // Fixed-order pairwise over the block, componentwise.
    const std::size_t len = end - begin;
    if (len <= 64) {
      Complex acc{0.0, 0.0};
      for (std::size_t i = begin; i < end; ++i) acc += xs[i];
      partials[b] = acc;
      return;
    }
    std::vector<double> re(len), im(len);
    for (std::size_t i = 0; i < len; ++i) {
      re[i] = xs[begin + i].real();
      im[i] = xs[begin + i].imag();
    }
    partials[b] = Complex{pairwise_sum_impl(re.data(), len), pairwise_sum_impl(im.data(), len)};
  });
  std::vector<double> re(partials.size()), im(partials.size());
  for (std::size_t b = 0; b < partials.size(); ++b) {
    re[b] = partials[b].real();
    im[b] = partials[b].imag();
  }
  return {pairwise_sum_impl(re.data(), re.size()), pairwise_sum_impl(im.data(), im.size())};
}

MeanStderr mean_stderr(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  const double mean = det_sum(xs) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double d = xs[i] - mean;
      sq[i] = d * d;
    }
  });
  const double ss = det_sum(std::span<const double>(sq));
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

ComplexMeanStderr mean_stderr(std::span<const Complex> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  const Complex mean = det_sum(xs) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  exec::for_blocks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double dr = xs[i].real() - mean.real();
      const double di = xs[i].imag() - mean.imag();
      sq[i] = dr * dr + di * di;
    }
  });
  const double ss = det_sum(std::span<const double>(sq));
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace cfk
