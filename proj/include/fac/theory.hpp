#pragma once

// Executable verification of the prior-regularized policy-mixing results on
// finite discrete distributions: the mixed-policy identity and the
// sup-deviation bounds between the mixture and the optimal policy.
//
// Distance convention: tv_sup is the max pointwise probability difference
// over the shared support (the convention the mixing equations are written
// in). The standard half-L1 total variation is provided separately as
// tv_half_l1.

#include <vector>

#include "fac/core.hpp"

namespace fac {

struct DiscreteDist {
  std::vector<double> probs;

  int support_size() const { return static_cast<int>(probs.size()); }
};

inline void validate_dist(const DiscreteDist& d, double tol = 1e-12) {
  double sum = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("probabilities do not sum to 1");
}

inline DiscreteDist random_dist(RngStream& rng, int support) {
  DiscreteDist d;
  d.probs.resize(support);
  double total = 0.0;
  for (auto& p : d.probs) {
    p = -std::log(1.0 - rng.uniform01());
    total += p;
  }
  for (auto& p : d.probs) p /= total;
  return d;
}

struct MixReport {
  double beta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
  bool bound_satisfied = true;
};

// pi_m = (1/(1+beta)) pi_hat + (beta/(1+beta)) m_pi. The weights sum to one,
// so the convex combination of normalized inputs is itself normalized; no
// renormalization is applied (beta = 0 returns pi_hat bit-exactly).
inline DiscreteDist mix(const DiscreteDist& pi_hat, const DiscreteDist& m_pi,
                        double beta) {
  if (pi_hat.support_size() != m_pi.support_size())
    throw std::invalid_argument("mix: support mismatch");
  if (beta < 0.0) throw std::invalid_argument("mix: beta must be >= 0");
  double w1 = 1.0 / (1.0 + beta);
  double w2 = beta / (1.0 + beta);
  DiscreteDist out;
  out.probs.resize(pi_hat.probs.size());
  for (std::size_t i = 0; i < out.probs.size(); ++i)
    out.probs[i] = w1 * pi_hat.probs[i] + w2 * m_pi.probs[i];
  return out;
}

// Max pointwise deviation over the shared support.
inline double tv_sup(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.support_size() != q.support_size())
    throw std::invalid_argument("tv_sup: support mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i)
    best = std::max(best, std::abs(p.probs[i] - q.probs[i]));
  return best;
}

// Standard total variation, half the L1 distance.
inline double tv_half_l1(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.support_size() != q.support_size())
    throw std::invalid_argument("tv_half_l1: support mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i)
    sum += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * sum;
}

// Checks tv_sup(m_pi, pi_m) == tv_sup(pi_hat, m_pi) / (1+beta), which is
// exact pointwise algebra on the mixture.
inline MixReport verify_mixing_identity(const DiscreteDist& pi_hat,
                                        const DiscreteDist& m_pi, double beta) {
  DiscreteDist pi_m = mix(pi_hat, m_pi, beta);
  MixReport rep;
  rep.beta = beta;
  rep.lhs = tv_sup(m_pi, pi_m);
  rep.rhs = tv_sup(pi_hat, m_pi) / (1.0 + beta);
  rep.abs_error = std::abs(rep.lhs - rep.rhs);
  rep.bound_satisfied = true;
  return rep;
}

// Lower bound for arbitrary pi_hat:
//   tv_sup(pi_m, pi_opt) >= D_sub - tv_sup(pi_hat, m_pi) / (1+beta)
// and, when pi_hat == pi_opt (the converged limit), the exact equality
//   tv_sup(pi_m, pi_opt) == (beta/(1+beta)) * D_sub.
// lhs/rhs report the lower-bound sides; abs_error reports the equality error
// in the pi_hat == pi_opt case (0 otherwise).
inline MixReport verify_bounds(const DiscreteDist& pi_opt,
                               const DiscreteDist& m_pi,
                               const DiscreteDist& pi_hat, double beta) {
  DiscreteDist pi_m = mix(pi_hat, m_pi, beta);
  double d_sub = tv_sup(pi_opt, m_pi);
  MixReport rep;
  rep.beta = beta;
  rep.lhs = tv_sup(pi_m, pi_opt);
  rep.rhs = d_sub - tv_sup(pi_hat, m_pi) / (1.0 + beta);
  rep.bound_satisfied = rep.lhs >= rep.rhs - 1e-12;
  bool hat_is_opt = pi_hat.probs == pi_opt.probs;
  if (hat_is_opt)
    rep.abs_error = std::abs(rep.lhs - beta / (1.0 + beta) * d_sub);
  return rep;
}

}  // namespace fac
