#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace obv {

/// Result of one named verification.
struct CheckReport {
  std::string name;
  std::size_t n_samples = 0;
  std::optional<double> min_margin;
  std::optional<double> max_residual;
  double tolerance = 0.0;           // margins must exceed this
  double residual_tolerance = 0.0;  // residuals must not exceed this
  bool pass = false;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::string anchor;
  std::string detail;
  std::vector<std::string> failures;  // any entry forces a fail
  std::map<std::string, double> metrics;
  std::vector<std::string> columns;  // optional per-point table (CSV rows)
  std::vector<std::vector<double>> rows;

  /// pass <=> margins above tolerance, residuals within tolerance, no failures.
  CheckReport& finalize() {
    bool ok = failures.empty();
    if (min_margin) ok = ok && std::isfinite(*min_margin) && *min_margin > tolerance;
    if (max_residual) ok = ok && std::isfinite(*max_residual) && *max_residual <= residual_tolerance;
    pass = ok;
    return *this;
  }

  void margin(double v) { min_margin = min_margin ? std::min(*min_margin, v) : v; if (std::isnan(v)) min_margin = v; }
  void residual(double v) { max_residual = max_residual ? std::max(*max_residual, v) : v; if (std::isnan(v)) max_residual = v; }
  void fail(std::string why) { failures.push_back(std::move(why)); }
};

/// Max over |a_i - b_i| / max(|a_i|, |b_i|, floor); NaN propagates.
inline double relative_gap(double a, double b, double floor = 1e-300) {
  const double s = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / s;
}

/// Thread count: OBV_THREADS when set to a positive integer, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("OBV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1u;
}

/// Run body(i) for i in [0, n). Each index writes only its own slot, so any
/// reduction over results afterwards is independent of the thread count. The
/// first exception (lowest index) is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned threads = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Per-sample outcomes collected in index order, then reduced serially.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace obv
