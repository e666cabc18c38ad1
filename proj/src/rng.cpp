#include "uadrive/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace uadrive::rng {

namespace {

std::pair<double, double> box_muller(const CounterRng& g, std::uint64_t pair) {
  const double u1 = g.uniform(2 * pair);
  const double u2 = g.uniform(2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

double CounterRng::normal(std::uint64_t index) const {
  const auto [c, s] = box_muller(*this, index / 2);
  return (index % 2 == 0) ? c : s;
}

void CounterRng::fill_normal(std::span<double> out, std::uint64_t first) const {
  std::size_t k = 0;
  if (first % 2 == 1 && k < out.size()) {
    out[k++] = normal(first);
  }
  for (; k + 1 < out.size(); k += 2) {
    const auto [c, s] = box_muller(*this, (first + k) / 2);
    out[k] = c;
    out[k + 1] = s;
  }
  if (k < out.size()) {
    out[k] = normal(first + k);
  }
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t key) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  const CounterRng g(key);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(g.below(i - 1, i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace uadrive::rng
