#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parex {

using cplx = std::complex<double>;

enum class ErrorCode {
  ConfigError,
  IndeterminateForm,
  RootFindingFailure,
  IndexError,
  DerivativeVanished,
  HorizonSaturated,
  DomainError,
  DepthLimit,
  StartupFailure,
  InsufficientData,
  EnvelopeViolated,
  HypothesesFailed,
  PreconditionFailed,
  BranchExhaustion,
  NumericFailure,
  CheckFailed,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Any non-finite intermediate is an error, never a silent pass.
inline double finite_or_throw(double x, const char* where) {
  if (!std::isfinite(x)) fail(ErrorCode::NumericFailure, std::string("non-finite value in ") + where);
  return x;
}

// SplitMix64: tiny, portable, and identical on every platform. std::random
// distributions are implementation-defined, so reproducible runs use this.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return std::ldexp(static_cast<double>(next_u64() >> 11), -53); }

  // uniform in [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  cplx uniform_complex(cplx center, double half_side) {
    return {center.real() + uniform(-half_side, half_side),
            center.imag() + uniform(-half_side, half_side)};
  }

  // derive an independent stream (used for replayable per-sample seeds)
  std::uint64_t fork() { return next_u64(); }
};

// FNV-1a, used for config fingerprints embedded in every output file.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

// shortest decimal that round-trips a double
std::string fmt_double(double v);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  int n = 0;
};

// least squares y ~ intercept + slope*x
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for k successes out of n
WilsonInterval wilson95(long k, long n);

// Deterministic parallel map: fn(i) for i in [0,n), results merged in index
// order no matter how many workers run. fn must not touch shared state.
void parallel_for(long n, int workers, const std::function<void(long)>& fn);

}  // namespace parex
