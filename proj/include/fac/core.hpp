#pragma once

// Shared domain types and the deterministic RNG contract used everywhere else.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fac {

using StateVec = std::vector<double>;
using ActionVec = std::vector<double>;
using TaskId = int;
using RngSeed = std::uint64_t;

constexpr double kDefaultGamma = 0.99;

// One environment interaction. `true_success` is ground truth and is read
// only by evaluation code; training consumes `prior_success` (the success
// prior's judgement).
struct Transition {
  StateVec state;
  ActionVec action;
  double reward = 0.0;
  StateVec next_state;
  bool done = false;
  bool prior_success = false;
  bool true_success = false;
};

struct EpisodeRecord {
  std::vector<Transition> transitions;
  RngSeed seed = 0;
  TaskId task = 0;
};

// 64-bit FNV-1a, used for config hashing and seed derivation from tags.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

// SplitMix64 (Vigna's reference constants); used for hashed per-state
// corruption noise and for deriving sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Named sub-stream derivation: independent seeds for "env", "noise", ... so
// adding a consumer never perturbs the draws of another.
inline RngSeed derive_seed(RngSeed base, std::string_view tag) {
  std::uint64_t x = base ^ fnv1a64(tag);
  return splitmix64(x);
}

// Deterministic random stream. The generator is std::mt19937_64, whose
// algorithm and output sequence are fixed by the C++ standard, so draws are
// identical across platforms. Floating-point recipes are pinned here rather
// than delegated to <random> distributions (whose output is
// implementation-defined):
//   uniform01:  (next_u64() >> 11) * 2^-53           in [0, 1)
//   normal:     Box-Muller on (u1, u2), u1 in (0, 1], cached spare
//   below(n):   next_u64() % n
class RngStream {
 public:
  explicit RngStream(RngSeed seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; u1 is shifted into (0,1] so log() is safe.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Uniform integer in [0, n). Modulo bias is negligible for the index
  // ranges used here and keeps the recipe trivial to restate.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  RngStream fork(std::string_view tag) {
    RngSeed s = next_u64() ^ fnv1a64(tag);
    return RngStream(splitmix64(s));
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RngStream make_rng(RngSeed seed) { return RngStream(seed); }

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Componentwise clamp to [-1, 1]; idempotent.
inline ActionVec clamp_action(const ActionVec& a) {
  if (!all_finite(a)) throw std::invalid_argument("non-finite action");
  ActionVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = std::min(1.0, std::max(-1.0, a[i]));
  return out;
}

inline double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double euclid(double ax, double ay, double bx, double by) {
  double dx = ax - bx, dy = ay - by;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace fac
