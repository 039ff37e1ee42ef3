#pragma once

// Reward composition from the prior bundle: the potential-based shaping term
// F(s, s') = gamma * M_V(s') - M_V(s) and the composite reward
// lambda * M_R(s') + F. The success prior is evaluated on the state the
// transition lands in.

#include "fac/core.hpp"
#include "fac/priors.hpp"

namespace fac {

struct RewardConfig {
  double lambda_success = 100.0;
  double gamma = kDefaultGamma;
};

inline double shaping_reward(const ValuePrior& v, const StateVec& s,
                             const StateVec& s_next, TaskId task,
                             double gamma = kDefaultGamma) {
  return gamma * v.query(s_next, task) - v.query(s, task);
}

struct CompositeReward {
  double reward = 0.0;
  bool prior_success = false;
};

inline CompositeReward composite_reward(const SuccessPrior& sr,
                                        const ValuePrior& v, const StateVec& s,
                                        const StateVec& s_next, TaskId task,
                                        const RewardConfig& cfg = {}) {
  CompositeReward out;
  int mr = sr.query(s_next, task);
  out.prior_success = mr == 1;
  out.reward = cfg.lambda_success * mr +
               shaping_reward(v, s, s_next, task, cfg.gamma);
  return out;
}

}  // namespace fac
