#include "parex/util.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

namespace parex {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter representations that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[64];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.n = static_cast<int>(std::min(x.size(), y.size()));
  if (f.n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = f.n * sxx - sx * sx;
  if (denom == 0) return f;
  f.slope = (f.n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / f.n;
  return f;
}

WilsonInterval wilson95(long k, long n) {
  WilsonInterval w;
  if (n <= 0) return w;
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double p = static_cast<double>(k) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  w.lo = std::max(0.0, (center - half) / denom);
  w.hi = std::min(1.0, (center + half) / denom);
  return w;
}

void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, workers);
  if (workers == 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const long w = std::min<long>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  // contiguous chunks; results are per-index so assignment order is irrelevant
  const long chunk = (n + w - 1) / w;
  std::vector<std::exception_ptr> errs(w);
  for (long t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      const long lo = t * chunk;
      const long hi = std::min(n, lo + chunk);
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace parex
