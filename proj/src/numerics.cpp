#include "raydamp/numerics.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace raydamp {

namespace {

GaussRule make_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <class Fn, class T>
T integrate_impl(const Fn& f, std::span<const double> breaks, int n) {
  const GaussRule& g = gauss_legendre(n);
  T sum{};
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    double a = breaks[p];
    double b = breaks[p + 1];
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    T part{};
    for (int k = 0; k < n; ++k) part += g.weights[k] * f(mid + half * g.nodes[k]);
    sum += half * part;
  }
  return sum;
}

std::vector<double> uniform_breaks(double a, double b, int panels) {
  std::vector<double> br(panels + 1);
  for (int i = 0; i <= panels; ++i) br[i] = a + (b - a) * i / panels;
  br.back() = b;
  return br;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

double integrate(const RealFn& f, double a, double b, int panels, int n) {
  auto br = uniform_breaks(a, b, panels);
  return integrate_impl<RealFn, double>(f, br, n);
}

cplx integrate(const ComplexFn& f, double a, double b, int panels, int n) {
  auto br = uniform_breaks(a, b, panels);
  return integrate_impl<ComplexFn, cplx>(f, br, n);
}

std::vector<double> graded_breaks(double a, double b, double first, double growth) {
  std::vector<double> br{a};
  double len = std::abs(b - a);
  if (len == 0.0) {
    br.push_back(b);
    return br;
  }
  double dir = b > a ? 1.0 : -1.0;
  double w = std::min(first, len);
  double pos = 0.0;
  while (pos + w < len * (1.0 - 1e-12)) {
    pos += w;
    br.push_back(a + dir * pos);
    w *= growth;
    if (pos + w > len) w = len - pos;
  }
  br.push_back(b);
  return br;
}

double integrate_breaks(const RealFn& f, std::span<const double> breaks, int n) {
  return integrate_impl<RealFn, double>(f, breaks, n);
}

cplx integrate_breaks(const ComplexFn& f, std::span<const double> breaks, int n) {
  return integrate_impl<ComplexFn, cplx>(f, breaks, n);
}

void lagrange_weights(std::span<const double> nodes, double x, std::span<double> out) {
  const std::size_t m = nodes.size();
  for (std::size_t j = 0; j < m; ++j) {
    double w = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j) w *= (x - nodes[k]) / (nodes[j] - nodes[k]);
    }
    out[j] = w;
  }
}

void lagrange_derivative_weights(std::span<const double> nodes, double x, std::span<double> out) {
  const std::size_t m = nodes.size();
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      double prod = 1.0 / (nodes[j] - nodes[k]);
      for (std::size_t l = 0; l < m; ++l) {
        if (l == j || l == k) continue;
        prod *= (x - nodes[l]) / (nodes[j] - nodes[l]);
      }
      sum += prod;
    }
    out[j] = sum;
  }
}

unsigned worker_count() {
  if (const char* env = std::getenv("RAYDAMP_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned workers = std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  out.back() = b;
  return out;
}

} // namespace raydamp
