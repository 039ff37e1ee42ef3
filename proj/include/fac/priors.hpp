#pragma once

// The foundation-prior triple (policy, value, success) as pluggable
// providers: oracle-derived clean priors per environment plus corruption
// wrappers for the robustness ablations.
//
// Every provider is a pure function of (state, task, construction-time
// seed). Corruption randomness is hashed from the queried state, so a
// corrupted prior is a fixed noisy model rather than a fresh die per call.

#include <functional>
#include <string>

#include "fac/core.hpp"
#include "fac/envs.hpp"

namespace fac {

struct PolicyPrior {
  std::function<ActionVec(const StateVec&, TaskId)> fn;
  std::string provenance;
  ActionVec query(const StateVec& s, TaskId t) const { return fn(s, t); }
};

struct ValuePrior {
  std::function<double(const StateVec&, TaskId)> fn;
  std::string provenance;
  double query(const StateVec& s, TaskId t) const { return fn(s, t); }
};

struct SuccessPrior {
  std::function<int(const StateVec&, TaskId)> fn;
  std::string provenance;
  int query(const StateVec& s, TaskId t) const { return fn(s, t); }
};

// All three providers are always present; ablations swap in explicit null
// providers and flip the learner's switches instead of leaving holes.
struct PriorBundle {
  PolicyPrior policy;
  ValuePrior value;
  SuccessPrior success;
};

namespace detail {

// Deterministic per-(seed, task, state) stream for corruption decisions.
struct HashStream {
  std::uint64_t x;

  HashStream(std::uint64_t seed, TaskId task, const StateVec& s) {
    std::uint64_t h = fnv1a64(&seed, sizeof(seed));
    std::int64_t t = task;
    h = fnv1a64(&t, sizeof(t), h);
    h = fnv1a64(s.data(), s.size() * sizeof(double), h);
    x = h;
  }

  double u01() {
    return static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53;
  }

  double normal() {
    double u1 = static_cast<double>((splitmix64(x) >> 11) + 1) * 0x1.0p-53;
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

// Unit step toward a target, or an exact-landing fraction when closer than
// one step. Keeps the direction intact (componentwise clamping would not).
inline void toward(double px, double py, double tx, double ty, double step,
                   double& ax, double& ay) {
  double dx = tx - px, dy = ty - py;
  double d = std::sqrt(dx * dx + dy * dy);
  if (d <= 1e-12) {
    ax = 0.0;
    ay = 0.0;
  } else if (d <= step) {
    ax = dx / step;
    ay = dy / step;
  } else {
    ax = dx / d;
    ay = dy / d;
  }
}

}  // namespace detail

// Scripted expert: head straight for the current stage's subgoal. It is
// deliberately greedy, so it walks into the wall on detour-reach.
inline PolicyPrior oracle_policy_prior(const EnvSpec& env) {
  PolicyPrior p;
  p.provenance = "oracle-policy(" + env.name + ")";
  if (env.grid_n > 0) {
    int n = env.grid_n;
    p.fn = [n](const StateVec& s, TaskId) -> ActionVec {
      int idx = 0;
      for (int i = 0; i < n * n; ++i)
        if (s[i] > 0.5) idx = i;
      int x = idx % n, y = idx / n;
      int dx = (n - 1) - x, dy = (n - 1) - y;
      if (std::abs(dx) >= std::abs(dy) && dx != 0) return {dx > 0 ? 1.0 : -1.0, 0.0};
      if (dy != 0) return {0.0, dy > 0 ? 1.0 : -1.0};
      return {1.0, 0.0};
    };
    return p;
  }
  if (env.name == "point-pick-place") {
    double step = env.step_scale, radius = env.success_radius;
    p.fn = [step, radius](const StateVec& s, TaskId) -> ActionVec {
      double ax, ay;
      bool grasped = s[6] > 0.5;
      if (!grasped) {
        if (euclid(s[0], s[1], s[2], s[3]) > radius - 0.005) {
          detail::toward(s[0], s[1], s[2], s[3], step, ax, ay);
          return {ax, ay, -1.0};
        }
        return {0.0, 0.0, 1.0};  // close the grip next to the object
      }
      // Carried object moves with the agent: aim its displacement at the goal.
      detail::toward(s[2], s[3], s[4], s[5], step, ax, ay);
      return {ax, ay, 1.0};
    };
    return p;
  }
  double step = env.step_scale;
  p.fn = [step](const StateVec& s, TaskId) -> ActionVec {
    double ax, ay;
    detail::toward(s[0], s[1], s[2], s[3], step, ax, ay);
    return {ax, ay};
  };
  return p;
}

// M_V(s) = 1 - d(s)/d_max with d the remaining task distance: geodesic on
// detour-reach (strictly better informed than the straight-line policy
// prior) and stage-aware on pick-place.
inline ValuePrior oracle_value_prior(const EnvSpec& env) {
  ValuePrior v;
  v.provenance = "oracle-value(" + env.name + ")";
  EnvSpec e = env;
  v.fn = [e](const StateVec& s, TaskId) -> double {
    double d;
    if (e.grid_n > 0) {
      int n = e.grid_n, idx = 0;
      for (int i = 0; i < n * n; ++i)
        if (s[i] > 0.5) idx = i;
      d = std::abs(idx % n - (n - 1)) + std::abs(idx / n - (n - 1));
    } else if (e.name == "point-pick-place") {
      double place = std::max(0.0, euclid(s[2], s[3], s[4], s[5]) - e.success_radius);
      if (place == 0.0 || s[6] > 0.5) {
        d = place;  // solved, or carrying: only the placement leg remains
      } else {
        double reach = std::max(0.0, euclid(s[0], s[1], s[2], s[3]) - e.success_radius);
        d = reach + place;
      }
    } else if (e.has_wall) {
      double geo = wall_geodesic(s[0], s[1], s[2], s[3], e.wall_x, e.wall_ylo, e.wall_yhi);
      d = std::max(0.0, geo - e.success_radius);
    } else {
      d = std::max(0.0, euclid(s[0], s[1], s[2], s[3]) - e.success_radius);
    }
    double val = 1.0 - d / e.d_max;
    return std::min(1.0, std::max(0.0, val));
  };
  return v;
}

// The clean case: the environment's ground-truth success predicate.
inline SuccessPrior oracle_success_prior(const EnvSpec& env) {
  SuccessPrior sr;
  sr.provenance = "oracle-success(" + env.name + ")";
  EnvSpec e = env;
  sr.fn = [e](const StateVec& s, TaskId) -> int {
    return env_state_success(e, s) ? 1 : 0;
  };
  return sr;
}

inline PolicyPrior null_policy_prior(int action_dim) {
  PolicyPrior p;
  p.provenance = "null-policy";
  p.fn = [action_dim](const StateVec&, TaskId) {
    return ActionVec(action_dim, 0.0);
  };
  return p;
}

inline ValuePrior null_value_prior() {
  ValuePrior v;
  v.provenance = "null-value";
  v.fn = [](const StateVec&, TaskId) { return 0.0; };
  return v;
}

inline SuccessPrior null_success_prior() {
  SuccessPrior sr;
  sr.provenance = "null-success";
  sr.fn = [](const StateVec&, TaskId) { return 0; };
  return sr;
}

// Each component snapped to {-1, 0, +1}; magnitudes inside the dead zone
// map to 0 so only rough directional information survives.
inline PolicyPrior discretize_policy(const PolicyPrior& p,
                                     double dead_zone = 0.1) {
  PolicyPrior out;
  out.provenance = p.provenance + "|discretize";
  auto base = p.fn;
  out.fn = [base, dead_zone](const StateVec& s, TaskId t) {
    ActionVec a = base(s, t);
    for (auto& x : a) x = std::abs(x) > dead_zone ? (x > 0 ? 1.0 : -1.0) : 0.0;
    return a;
  };
  return out;
}

// With probability `prob` (hashed per state) the whole action is replaced by
// uniform noise in [-1,1]^d.
inline PolicyPrior corrupt_policy_uniform(const PolicyPrior& p, double prob,
                                          RngStream& rng) {
  if (prob < 0.0 || prob > 1.0)
    throw std::invalid_argument("corrupt_policy_uniform: prob out of range");
  PolicyPrior out;
  out.provenance = p.provenance + "|uniform(" + std::to_string(prob) + ")";
  auto base = p.fn;
  std::uint64_t seed = rng.next_u64();
  out.fn = [base, prob, seed](const StateVec& s, TaskId t) {
    ActionVec a = base(s, t);
    detail::HashStream h(seed, t, s);
    if (h.u01() < prob)
      for (auto& x : a) x = -1.0 + 2.0 * h.u01();
    return a;
  };
  return out;
}

// With probability `prob` (hashed per state) the prior action is negated:
// a systematically wrong prior.
inline PolicyPrior corrupt_policy_invert(const PolicyPrior& p, double prob,
                                         RngStream& rng) {
  if (prob < 0.0 || prob > 1.0)
    throw std::invalid_argument("corrupt_policy_invert: prob out of range");
  PolicyPrior out;
  out.provenance = p.provenance + "|invert(" + std::to_string(prob) + ")";
  auto base = p.fn;
  std::uint64_t seed = rng.next_u64();
  out.fn = [base, prob, seed](const StateVec& s, TaskId t) {
    ActionVec a = base(s, t);
    detail::HashStream h(seed, t, s);
    if (h.u01() < prob)
      for (auto& x : a) x = -x;
    return a;
  };
  return out;
}

// Gaussian noise (clamped back into [0,1]) and/or quantization to
// `quant_levels` uniform levels; quant_levels == 0 disables quantization.
inline ValuePrior corrupt_value(const ValuePrior& v, double noise_std,
                                int quant_levels, RngStream& rng) {
  if (noise_std < 0.0)
    throw std::invalid_argument("corrupt_value: noise_std must be >= 0");
  if (quant_levels != 0 && quant_levels < 2)
    throw std::invalid_argument("corrupt_value: quant_levels must be 0 or >= 2");
  ValuePrior out;
  out.provenance = v.provenance + "|noise(" + std::to_string(noise_std) +
                   ")|quant(" + std::to_string(quant_levels) + ")";
  auto base = v.fn;
  std::uint64_t seed = rng.next_u64();
  out.fn = [base, noise_std, quant_levels, seed](const StateVec& s, TaskId t) {
    double val = base(s, t);
    if (noise_std > 0.0) {
      detail::HashStream h(seed, t, s);
      val += noise_std * h.normal();
      val = std::min(1.0, std::max(0.0, val));
    }
    if (quant_levels >= 2) {
      double k = quant_levels - 1;
      val = std::round(val * k) / k;
    }
    return val;
  };
  return out;
}

// Hashed label flips: negatives turn positive with fp_rate, positives turn
// negative with fn_rate.
inline SuccessPrior corrupt_success(const SuccessPrior& sr, double fp_rate,
                                    double fn_rate, RngStream& rng) {
  if (fp_rate < 0.0 || fp_rate >= 1.0 || fn_rate < 0.0 || fn_rate >= 1.0)
    throw std::invalid_argument("corrupt_success: rates must be in [0,1)");
  SuccessPrior out;
  out.provenance = sr.provenance + "|flip(fp=" + std::to_string(fp_rate) +
                   ",fn=" + std::to_string(fn_rate) + ")";
  auto base = sr.fn;
  std::uint64_t seed = rng.next_u64();
  out.fn = [base, fp_rate, fn_rate, seed](const StateVec& s, TaskId t) {
    int clean = base(s, t);
    detail::HashStream h(seed, t, s);
    double u = h.u01();
    if (clean == 1) return u < fn_rate ? 0 : 1;
    return u < fp_rate ? 1 : 0;
  };
  return out;
}

inline PriorBundle oracle_bundle(const EnvSpec& env) {
  return {oracle_policy_prior(env), oracle_value_prior(env),
          oracle_success_prior(env)};
}

}  // namespace fac
