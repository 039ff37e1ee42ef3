#pragma once

// Finite tabular MDPs, exact dynamic-programming solvers, and automated
// verification that potential-based reward shaping preserves optimal
// policies.

#include <algorithm>
#include <limits>
#include <vector>

#include "fac/core.hpp"

namespace fac {

// Dense finite MDP. transition[s][a][s2] and reward[s][a][s2] are full
// tensors; every transition row sums to 1 and terminal states self-loop
// with zero reward.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<std::vector<double>>> transition;  // P[s][a][s']
  std::vector<std::vector<std::vector<double>>> reward;      // R[s][a][s']
  double gamma = kDefaultGamma;
  std::vector<bool> terminal;

  static TabularMDP zeros(int n_states, int n_actions, double gamma) {
    TabularMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    m.transition.assign(
        n_states, std::vector<std::vector<double>>(
                      n_actions, std::vector<double>(n_states, 0.0)));
    m.reward = m.transition;
    m.terminal.assign(n_states, false);
    return m;
  }
};

// State-indexed potential. If gamma == 1 the owning check requires
// phi[start] == 0; only gamma < 1 is exercised in this repository.
struct Potential {
  std::vector<double> phi;
};

struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;  // row-major [state][action]

  double& at(int s, int a) { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const { return q[static_cast<std::size_t>(s) * n_actions + a]; }
};

inline double row_max(const QTable& q, int s) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < q.n_actions; ++a) best = std::max(best, q.at(s, a));
  return best;
}

struct ShapingReport {
  double max_q_deviation = 0.0;
  double max_v_deviation = 0.0;
  bool policy_agreement = true;
  int n_states_checked = 0;
};

inline void validate_mdp(const TabularMDP& m, double tol = 1e-12) {
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < m.n_states; ++s2) sum += m.transition[s][a][s2];
      if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument("transition row does not sum to 1");
    }
}

// Random episodic MDP: every (s,a) spreads probability over `branching`
// successors, rewards are uniform in [-1,1], one random terminal state.
inline TabularMDP random_mdp(RngStream& rng, int n_states, int n_actions,
                             int branching, double gamma = kDefaultGamma) {
  if (n_states < 2 || n_actions < 1 || branching < 1 || branching > n_states)
    throw std::invalid_argument("random_mdp: invalid sizes");
  TabularMDP m = TabularMDP::zeros(n_states, n_actions, gamma);
  int term = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_states)));
  m.terminal[term] = true;
  for (int s = 0; s < n_states; ++s) {
    if (s == term) {
      for (int a = 0; a < n_actions; ++a) m.transition[s][a][s] = 1.0;
      continue;
    }
    for (int a = 0; a < n_actions; ++a) {
      // Pick `branching` distinct successors, then Dirichlet-style weights
      // from normalized exponentials.
      std::vector<int> succ;
      while (static_cast<int>(succ.size()) < branching) {
        int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_states)));
        if (std::find(succ.begin(), succ.end(), c) == succ.end())
          succ.push_back(c);
      }
      std::vector<double> w(succ.size());
      double total = 0.0;
      for (auto& x : w) {
        x = -std::log(1.0 - rng.uniform01());
        total += x;
      }
      for (std::size_t i = 0; i < succ.size(); ++i) {
        m.transition[s][a][succ[i]] = w[i] / total;
        m.reward[s][a][succ[i]] = rng.uniform(-1.0, 1.0);
      }
    }
  }
  return m;
}

// Value iteration to a sup-norm Bellman residual <= tol. Terminal states are
// pinned at Q = 0. Throws if max_iters sweeps do not reach tol.
inline QTable value_iteration(const TabularMDP& m, double tol = 1e-10,
                              int max_iters = 100000) {
  if (tol <= 0) throw std::invalid_argument("value_iteration: tol must be > 0");
  QTable q;
  q.n_states = m.n_states;
  q.n_actions = m.n_actions;
  q.q.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0);
  std::vector<double> v(m.n_states, 0.0);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    residual = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
      if (m.terminal[s]) continue;
      for (int a = 0; a < m.n_actions; ++a) {
        double backup = 0.0;
        const auto& p = m.transition[s][a];
        const auto& r = m.reward[s][a];
        for (int s2 = 0; s2 < m.n_states; ++s2) {
          if (p[s2] == 0.0) continue;
          backup += p[s2] * (r[s2] + m.gamma * v[s2]);
        }
        residual = std::max(residual, std::abs(backup - q.at(s, a)));
        q.at(s, a) = backup;
      }
    }
    for (int s = 0; s < m.n_states; ++s) v[s] = m.terminal[s] ? 0.0 : row_max(q, s);
    if (residual <= tol) return q;
  }
  throw std::runtime_error("value_iteration: no convergence, residual " +
                           std::to_string(residual));
}

// Set of actions within tie tolerance of the row max; the shaping theorem is
// checked at the argmax-set level, where it is literally true.
inline std::vector<std::vector<int>> greedy_policy(const QTable& q,
                                                   double tie_tol = 1e-9) {
  std::vector<std::vector<int>> out(q.n_states);
  for (int s = 0; s < q.n_states; ++s) {
    double best = row_max(q, s);
    for (int a = 0; a < q.n_actions; ++a)
      if (q.at(s, a) >= best - tie_tol) out[s].push_back(a);
  }
  return out;
}

// R'[s][a][s'] = R + gamma*phi[s'] - phi[s] on non-terminal s. Terminal
// self-loops stay at zero reward so the result is again a valid episodic
// TabularMDP.
inline TabularMDP apply_shaping(const TabularMDP& m, const Potential& pot) {
  if (static_cast<int>(pot.phi.size()) != m.n_states)
    throw std::invalid_argument("apply_shaping: potential dimension mismatch");
  TabularMDP out = m;
  for (int s = 0; s < m.n_states; ++s) {
    if (m.terminal[s]) continue;
    for (int a = 0; a < m.n_actions; ++a)
      for (int s2 = 0; s2 < m.n_states; ++s2) {
        if (m.transition[s][a][s2] == 0.0) continue;
        out.reward[s][a][s2] =
            m.reward[s][a][s2] + m.gamma * pot.phi[s2] - pot.phi[s];
      }
  }
  return out;
}

// Potential drawn uniformly from [lo, hi] on non-terminal states. Terminal
// states get phi = 0: with the absorb-with-zero-reward convention the shaped
// and unshaped solutions only coincide when the potential vanishes where the
// episode has already ended.
inline Potential random_potential(RngStream& rng, const TabularMDP& m,
                                  double lo = -10.0, double hi = 10.0) {
  Potential p;
  p.phi.resize(m.n_states);
  for (int s = 0; s < m.n_states; ++s)
    p.phi[s] = m.terminal[s] ? 0.0 : rng.uniform(lo, hi);
  return p;
}

// Solves G and the shaped G' and reports the worst-case deviation from
// Q*_{G'}(s,a) = Q*_G(s,a) - phi[s] plus greedy argmax-set agreement.
// Both solves run well past the requested residual so discounted error
// amplification (residual * gamma / (1-gamma)) stays inside tol.
inline ShapingReport verify_shaping_theorem(const TabularMDP& m,
                                            const Potential& pot,
                                            double tol = 1e-6) {
  if (tol <= 0) throw std::invalid_argument("verify_shaping_theorem: tol");
  double target = tol / 100.0;
  double residual = std::min(target, target * (1.0 - m.gamma) / std::max(m.gamma, 1e-12));
  QTable q_base = value_iteration(m, residual);
  QTable q_shaped = value_iteration(apply_shaping(m, pot), residual);

  ShapingReport rep;
  rep.n_states_checked = m.n_states;
  for (int s = 0; s < m.n_states; ++s) {
    if (m.terminal[s]) continue;
    for (int a = 0; a < m.n_actions; ++a) {
      double dev = std::abs(q_shaped.at(s, a) - (q_base.at(s, a) - pot.phi[s]));
      rep.max_q_deviation = std::max(rep.max_q_deviation, dev);
    }
    double v_dev = std::abs(row_max(q_shaped, s) - (row_max(q_base, s) - pot.phi[s]));
    rep.max_v_deviation = std::max(rep.max_v_deviation, v_dev);
  }
  auto g_base = greedy_policy(q_base);
  auto g_shaped = greedy_policy(q_shaped);
  for (int s = 0; s < m.n_states; ++s)
    if (g_base[s] != g_shaped[s]) rep.policy_agreement = false;
  return rep;
}

}  // namespace fac
