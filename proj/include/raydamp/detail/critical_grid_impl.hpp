#pragma once

#include <algorithm>

namespace raydamp {

template <class T>
T CriticalGrid::value_at(std::span<const T> values, double y) const {
  const std::size_t n = y_.size();
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  if (y < y_[ic_]) hi = ic_;
  else lo = ic_;
  auto it = std::upper_bound(y_.begin() + lo, y_.begin() + hi + 1, y);
  std::size_t j = it == y_.begin() + lo ? lo : static_cast<std::size_t>(it - y_.begin()) - 1;
  const std::size_t m = std::min<std::size_t>(kStencil, hi - lo + 1);
  std::size_t s = j > lo ? j - 1 : lo;
  s = std::min(s, hi + 1 - m);
  double w[kStencil];
  lagrange_weights(std::span<const double>(&y_[s], m), y, std::span<double>(w, m));
  T acc{};
  for (std::size_t k = 0; k < m; ++k) acc += w[k] * values[s + k];
  return acc;
}

template <class Fn>
std::vector<cplx> CriticalGrid::cumulative_from_critical(const Fn& integrand) const {
  std::vector<cplx> out(y_.size());
  out[ic_] = 0.0;
  auto cell_sum = [&](std::size_t c) {
    cplx acc{};
    for (int q = 0; q < kQuad; ++q) acc += quad_weight(c, q) * integrand(c, q);
    return acc;
  };
  for (std::size_t i = ic_; i + 1 < y_.size(); ++i) out[i + 1] = out[i] + cell_sum(i);
  for (std::size_t i = ic_; i > 0; --i) out[i - 1] = out[i] - cell_sum(i - 1);
  return out;
}

template <class T>
T CriticalGrid::derivative_at(std::span<const T> values, std::size_t i, bool allow_cross) const {
  const std::size_t n = y_.size();
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  if (!allow_cross) {
    if (i < ic_) hi = ic_;
    else if (i > ic_ || ic_ + 1 < n) lo = ic_;
    else hi = ic_;
  }
  const std::size_t m = std::min<std::size_t>(5, hi - lo + 1);
  std::size_t s = i >= lo + 2 ? i - 2 : lo;
  s = std::min(s, hi + 1 - m);
  double w[5];
  lagrange_derivative_weights(std::span<const double>(&y_[s], m), y_[i], std::span<double>(w, m));
  T acc{};
  for (std::size_t k = 0; k < m; ++k) acc += w[k] * values[s + k];
  return acc;
}

} // namespace raydamp
