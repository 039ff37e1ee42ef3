#pragma once

// Foundation-guided actor-critic learner: replay and success buffers, n-step
// clipped-double-Q critic updates, actor updates with prior regularization
// and success imitation, warm-up and better-action selection.

#include <deque>
#include <functional>

#include "fac/core.hpp"
#include "fac/envs.hpp"
#include "fac/nn.hpp"
#include "fac/priors.hpp"
#include "fac/shaping.hpp"

namespace fac {

constexpr int kHiddenDim = 64;  // actor and critics both use two 64-unit layers

enum class WarmupUnit { frames, trajectories };

struct FacConfig {
  double alpha = 1.0;       // success-imitation weight
  double beta = 1.0;        // prior-regularization weight
  double sigma_hat = 0.1;   // fixed std of the imitation/regularization Gaussians
  double explore_start = 1.0;
  double explore_end = 0.1;
  long explore_decay_frames = 10000;
  double noise_clip = 0.3;
  int nstep = 3;
  double gamma = kDefaultGamma;
  double lambda_success = 100.0;
  int batch_size = 256;
  long replay_capacity = 100000;  // transitions
  int success_capacity = 200;     // episodes
  int utd_ratio = 1;
  WarmupUnit warmup_unit = WarmupUnit::frames;
  int warmup_trajectories = 10;
  long seed_frames = 4000;
  double target_tau = 0.01;
  bool better_action = false;
  bool layer_norm = false;
  double learning_rate = 1e-3;
  // Ablation switches; disabling a component zeroes its contribution exactly.
  bool use_policy_prior = true;
  bool use_value_prior = true;
  bool use_success_reward = true;
  bool use_success_buffer = true;

  bool operator==(const FacConfig&) const = default;
};

inline void validate_config(const FacConfig& c) {
  if (c.alpha < 0 || c.beta < 0) throw std::invalid_argument("alpha/beta must be >= 0");
  if (c.sigma_hat <= 0) throw std::invalid_argument("sigma_hat must be > 0");
  if (c.nstep < 1) throw std::invalid_argument("nstep must be >= 1");
  if (c.target_tau <= 0 || c.target_tau > 1)
    throw std::invalid_argument("target_tau must be in (0,1]");
  if (c.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (c.replay_capacity < c.batch_size)
    throw std::invalid_argument("replay_capacity must be >= batch_size");
  if (c.success_capacity < 1)
    throw std::invalid_argument("success_capacity must be >= 1");
  if (c.utd_ratio < 1) throw std::invalid_argument("utd_ratio must be >= 1");
  if (c.gamma <= 0 || c.gamma > 1) throw std::invalid_argument("gamma must be in (0,1]");
  if (c.lambda_success <= 0) throw std::invalid_argument("lambda_success must be > 0");
  if (c.noise_clip <= 0) throw std::invalid_argument("noise_clip must be > 0");
}

inline FacConfig sim_preset() { return FacConfig{}; }

inline FacConfig robot_preset() {
  FacConfig c;
  c.warmup_unit = WarmupUnit::trajectories;
  c.warmup_trajectories = 10;
  c.explore_start = 0.1;
  c.explore_end = 0.1;
  c.utd_ratio = 20;
  c.better_action = true;
  c.layer_norm = true;
  return c;
}

// Linear interpolation from explore_start to explore_end over
// explore_decay_frames, constant afterwards.
inline double explore_std(long frame, const FacConfig& cfg) {
  if (frame < 0) throw std::invalid_argument("explore_std: frame must be >= 0");
  if (cfg.explore_decay_frames <= 0 || frame >= cfg.explore_decay_frames)
    return cfg.explore_end;
  double t = static_cast<double>(frame) / static_cast<double>(cfg.explore_decay_frames);
  return cfg.explore_start + (cfg.explore_end - cfg.explore_start) * t;
}

// Episode-preserving transition store: n-step sequences never cross episode
// boundaries because sequences are cut inside one stored episode. Capacity
// can be bounded in transitions (replay) or episodes (success buffer);
// eviction drops whole oldest episodes.
class EpisodeStore {
 public:
  EpisodeStore(long max_transitions, long max_episodes)
      : max_transitions_(max_transitions), max_episodes_(max_episodes) {}

  void add(EpisodeRecord ep) {
    if (ep.transitions.empty())
      throw std::invalid_argument("EpisodeStore: empty episode");
    long len = static_cast<long>(ep.transitions.size());
    total_ += len;
    eps_.push_back(std::move(ep));
    cum_.push_back((cum_.empty() ? evicted_ : cum_.back()) + len);
    while ((max_transitions_ > 0 && total_ > max_transitions_ && eps_.size() > 1) ||
           (max_episodes_ > 0 && static_cast<long>(eps_.size()) > max_episodes_)) {
      long flen = static_cast<long>(eps_.front().transitions.size());
      total_ -= flen;
      evicted_ += flen;
      eps_.pop_front();
      cum_.pop_front();
    }
  }

  long transition_count() const { return total_; }
  long episode_count() const { return static_cast<long>(eps_.size()); }

  struct Located {
    const EpisodeRecord* ep;
    int offset;
  };

  Located locate(long k) const {
    long target = evicted_ + k;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t idx = static_cast<std::size_t>(it - cum_.begin());
    long before = idx == 0 ? evicted_ : cum_[idx - 1];
    return {&eps_[idx], static_cast<int>(target - before)};
  }

  const Transition& sample_transition(RngStream& rng) const {
    if (total_ == 0) throw std::runtime_error("EpisodeStore: empty");
    auto loc = locate(static_cast<long>(rng.below(static_cast<std::uint64_t>(total_))));
    return loc.ep->transitions[loc.offset];
  }

 private:
  long max_transitions_;
  long max_episodes_;
  std::deque<EpisodeRecord> eps_;
  std::deque<long> cum_;  // cumulative transition counts since construction
  long evicted_ = 0;
  long total_ = 0;

  friend struct ReplaySampler;

 public:
  const std::deque<EpisodeRecord>& episodes() const { return eps_; }
};

// One n-step slice of a stored episode. `bootstrap` is false when the slice
// reaches a done transition; the target then drops the bootstrapped tail.
struct ReplaySeq {
  const EpisodeRecord* ep = nullptr;
  int start = 0;
  int len = 0;
  bool bootstrap = false;
};

inline ReplaySeq sample_sequence(const EpisodeStore& store, RngStream& rng,
                                 int nstep) {
  if (store.transition_count() == 0)
    throw std::runtime_error("sample_sequence: empty store");
  auto loc = store.locate(
      static_cast<long>(rng.below(static_cast<std::uint64_t>(store.transition_count()))));
  ReplaySeq s;
  s.ep = loc.ep;
  s.start = loc.offset;
  int avail = static_cast<int>(loc.ep->transitions.size()) - loc.offset;
  s.len = std::min(nstep, avail);
  const Transition& last = loc.ep->transitions[s.start + s.len - 1];
  s.bootstrap = s.len == nstep && !last.done;
  return s;
}

enum class ActionSource { actor, prior };

struct SelectedAction {
  ActionVec a;
  ActionSource source = ActionSource::actor;
};

struct FacLearner {
  FacConfig cfg;
  EnvSpec env_spec;
  TaskId task = 0;
  Mlp actor;
  OptState actor_opt;
  Mlp critic1, critic2;
  Mlp target1, target2;
  OptState copt1, copt2;
  EpisodeStore replay;
  EpisodeStore success;
  long frame = 0;
  long episodes_done = 0;

  FacLearner(const EnvSpec& spec, const FacConfig& c)
      : cfg(c),
        env_spec(spec),
        task(spec.task),
        replay(c.replay_capacity, 0),
        success(0, c.success_capacity) {}
};

inline FacLearner make_learner(const EnvSpec& spec, const FacConfig& cfg,
                               RngSeed seed) {
  validate_config(cfg);
  FacLearner L(spec, cfg);
  RngStream init(derive_seed(seed, "init"));
  std::vector<int> actor_dims = {spec.state_dim, kHiddenDim, kHiddenDim,
                                 spec.action_dim};
  std::vector<int> critic_dims = {spec.state_dim + spec.action_dim, kHiddenDim,
                                  kHiddenDim, 1};
  L.actor = init_mlp(init, actor_dims, OutputActivation::tanh_bounded, cfg.layer_norm);
  L.critic1 = init_mlp(init, critic_dims, OutputActivation::identity, cfg.layer_norm);
  L.critic2 = init_mlp(init, critic_dims, OutputActivation::identity, cfg.layer_norm);
  L.target1 = L.critic1;
  L.target2 = L.critic2;
  L.actor_opt = make_adam(L.actor, cfg.learning_rate);
  L.copt1 = make_adam(L.critic1, cfg.learning_rate);
  L.copt2 = make_adam(L.critic2, cfg.learning_rate);
  return L;
}

inline bool in_warmup(const FacLearner& L) {
  if (L.cfg.warmup_unit == WarmupUnit::frames) return L.frame < L.cfg.seed_frames;
  return L.episodes_done < L.cfg.warmup_trajectories;
}

namespace detail {

inline Matrix states_matrix(const std::vector<const Transition*>& batch,
                            int state_dim, bool next_state = false) {
  Matrix m(static_cast<int>(batch.size()), state_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const StateVec& s = next_state ? batch[i]->next_state : batch[i]->state;
    std::copy(s.begin(), s.end(), m.row(static_cast<int>(i)));
  }
  return m;
}

inline Matrix concat_sa(const Matrix& s, const Matrix& a) {
  Matrix m(s.rows, s.cols + a.cols);
  for (int i = 0; i < s.rows; ++i) {
    std::copy(s.row(i), s.row(i) + s.cols, m.row(i));
    std::copy(a.row(i), a.row(i) + a.cols, m.row(i) + s.cols);
  }
  return m;
}

inline double clip(double x, double lo, double hi) {
  return std::min(hi, std::max(lo, x));
}

}  // namespace detail

// Action selection. Evaluation uses the deterministic actor mean. During
// warm-up training steps the (clean or corrupted) policy prior drives data
// collection; without a policy prior, warm-up falls back to uniform random
// actions. After warm-up the actor acts with clipped Gaussian noise; in
// better-action mode the candidate with the higher min-Q (online critics)
// wins between actor and prior.
inline SelectedAction select_action(FacLearner& L, const StateVec& s,
                                    const PolicyPrior* prior, long frame,
                                    RngStream& rng, bool eval_mode) {
  SelectedAction out;
  if (eval_mode) {
    out.a = clamp_action(forward_one(L.actor, s));
    out.source = ActionSource::actor;
    return out;
  }
  bool prior_available = L.cfg.use_policy_prior && prior != nullptr;
  if (in_warmup(L)) {
    if (prior_available) {
      out.a = clamp_action(prior->query(s, L.task));
      out.source = ActionSource::prior;
    } else {
      out.a.resize(L.env_spec.action_dim);
      for (auto& x : out.a) x = rng.uniform(-1.0, 1.0);
      out.source = ActionSource::actor;
    }
    return out;
  }
  double sigma = explore_std(frame, L.cfg);
  ActionVec a1 = forward_one(L.actor, s);
  for (auto& x : a1)
    x += detail::clip(rng.normal(0.0, sigma), -L.cfg.noise_clip, L.cfg.noise_clip);
  a1 = clamp_action(a1);
  if (!L.cfg.better_action || !prior_available) {
    out.a = std::move(a1);
    out.source = ActionSource::actor;
    return out;
  }
  ActionVec a2 = clamp_action(prior->query(s, L.task));
  auto min_q = [&](const ActionVec& a) {
    std::vector<double> x(s);
    x.insert(x.end(), a.begin(), a.end());
    double q1 = forward_one(L.critic1, x)[0];
    double q2 = forward_one(L.critic2, x)[0];
    return std::min(q1, q2);
  };
  if (min_q(a2) > min_q(a1)) {
    out.a = std::move(a2);
    out.source = ActionSource::prior;
  } else {
    out.a = std::move(a1);
    out.source = ActionSource::actor;
  }
  return out;
}

// y = sum_{i<len} gamma^i r_i (+ gamma^n min_k targetQ_k(s_{t+n}, a') when the
// slice did not hit a done transition); a' is the actor's action at s_{t+n}
// plus fresh clipped noise.
inline std::vector<double> nstep_targets(const FacLearner& L,
                                         const std::vector<ReplaySeq>& seqs,
                                         RngStream& rng) {
  int n = static_cast<int>(seqs.size());
  std::vector<double> y(n, 0.0);
  std::vector<int> boot_rows;
  for (int i = 0; i < n; ++i) {
    const ReplaySeq& q = seqs[i];
    if (q.ep == nullptr || q.len < 1 || q.start < 0 ||
        q.start + q.len > static_cast<int>(q.ep->transitions.size()))
      throw std::invalid_argument("nstep_targets: malformed sequence");
    double acc = 0.0, g = 1.0;
    for (int j = 0; j < q.len; ++j) {
      const Transition& t = q.ep->transitions[q.start + j];
      if (t.done && j + 1 < q.len)
        throw std::invalid_argument("nstep_targets: sequence crosses episode end");
      acc += g * t.reward;
      g *= L.cfg.gamma;
    }
    y[i] = acc;
    if (q.bootstrap) boot_rows.push_back(i);
  }
  if (boot_rows.empty()) return y;
  int sd = L.env_spec.state_dim, ad = L.env_spec.action_dim;
  Matrix s_boot(static_cast<int>(boot_rows.size()), sd);
  for (std::size_t r = 0; r < boot_rows.size(); ++r) {
    const ReplaySeq& q = seqs[boot_rows[r]];
    const StateVec& s2 = q.ep->transitions[q.start + q.len - 1].next_state;
    std::copy(s2.begin(), s2.end(), s_boot.row(static_cast<int>(r)));
  }
  Matrix a_boot = forward(L.actor, s_boot);
  double sigma = explore_std(L.frame, L.cfg);
  for (int i = 0; i < a_boot.rows; ++i)
    for (int j = 0; j < a_boot.cols; ++j) {
      double v = a_boot.at(i, j) + detail::clip(rng.normal(0.0, sigma),
                                                -L.cfg.noise_clip,
                                                L.cfg.noise_clip);
      a_boot.at(i, j) = detail::clip(v, -1.0, 1.0);
    }
  Matrix x = detail::concat_sa(s_boot, a_boot);
  Matrix q1 = forward(L.target1, x);
  Matrix q2 = forward(L.target2, x);
  double gn = 1.0;
  (void)ad;
  for (std::size_t r = 0; r < boot_rows.size(); ++r) {
    const ReplaySeq& q = seqs[boot_rows[r]];
    gn = std::pow(L.cfg.gamma, q.len);
    y[boot_rows[r]] += gn * std::min(q1.at(static_cast<int>(r), 0),
                                     q2.at(static_cast<int>(r), 0));
  }
  return y;
}

// One clipped-double-Q regression step for both critics followed by Polyak
// target updates. Returns the mean squared residual over batch and critics.
inline double critic_update(FacLearner& L, RngStream& rng) {
  if (L.replay.transition_count() < L.cfg.batch_size)
    throw std::runtime_error("critic_update: replay underfilled");
  int n = L.cfg.batch_size;
  std::vector<ReplaySeq> seqs;
  seqs.reserve(n);
  for (int i = 0; i < n; ++i)
    seqs.push_back(sample_sequence(L.replay, rng, L.cfg.nstep));
  std::vector<double> y = nstep_targets(L, seqs, rng);

  int sd = L.env_spec.state_dim, ad = L.env_spec.action_dim;
  Matrix s(n, sd), a(n, ad);
  for (int i = 0; i < n; ++i) {
    const Transition& t = seqs[i].ep->transitions[seqs[i].start];
    std::copy(t.state.begin(), t.state.end(), s.row(i));
    std::copy(t.action.begin(), t.action.end(), a.row(i));
  }
  Matrix x = detail::concat_sa(s, a);

  double loss_sum = 0.0;
  for (Mlp* critic : {&L.critic1, &L.critic2}) {
    OptState& opt = critic == &L.critic1 ? L.copt1 : L.copt2;
    ForwardCache cache;
    Matrix q = forward(*critic, x, &cache);
    Matrix dLdy(n, 1);
    for (int i = 0; i < n; ++i) {
      double resid = q.at(i, 0) - y[i];
      loss_sum += resid * resid;
      dLdy.at(i, 0) = 2.0 * resid / n;
    }
    MlpGrads g = zero_grads(*critic);
    backward(*critic, cache, dLdy, g);
    adam_step(opt, *critic, g);
  }
  polyak_update(L.target1, L.critic1, L.cfg.target_tau);
  polyak_update(L.target2, L.critic2, L.cfg.target_tau);
  return loss_sum / (2.0 * n);
}

struct ActorLossTerms {
  double total = 0.0;
  double pg = 0.0;
  double succ_term = 0.0;
  double reg_term = 0.0;
};

// Actor loss and its exact gradient with frozen critics: gradients flow
// through the action input only. KL terms reduce to
// ||mu1 - mu2||^2 / (2 sigma_hat^2) because both Gaussians carry the same
// fixed variance; squared distances are summed over action dimensions and
// averaged over the batch.
inline ActorLossTerms actor_gradient(FacLearner& L,
                                     const std::vector<const Transition*>& batch,
                                     const std::vector<const Transition*>& succ_batch,
                                     const PolicyPrior* prior, MlpGrads& g) {
  ActorLossTerms out;
  int n = static_cast<int>(batch.size());
  if (n == 0) throw std::invalid_argument("actor_update: empty batch");
  int sd = L.env_spec.state_dim, ad = L.env_spec.action_dim;

  Matrix s = detail::states_matrix(batch, sd);
  ForwardCache actor_cache;
  Matrix a = forward(L.actor, s, &actor_cache);

  Matrix x = detail::concat_sa(s, a);
  ForwardCache c1_cache, c2_cache;
  Matrix q1 = forward(L.critic1, x, &c1_cache);
  Matrix q2 = forward(L.critic2, x, &c2_cache);

  std::vector<int> argmin(n);
  for (int i = 0; i < n; ++i) {
    double v1 = q1.at(i, 0), v2 = q2.at(i, 0);
    argmin[i] = v1 <= v2 ? 0 : 1;
    out.pg -= std::min(v1, v2) / n;
  }

  // dL/da from the policy-gradient term, routed through the per-sample
  // argmin critic.
  Matrix dLda(n, ad);
  for (int k = 0; k < 2; ++k) {
    Matrix mask(n, 1);
    bool any = false;
    for (int i = 0; i < n; ++i)
      if (argmin[i] == k) {
        mask.at(i, 0) = -1.0 / n;
        any = true;
      }
    if (!any) continue;
    const Mlp& critic = k == 0 ? L.critic1 : L.critic2;
    const ForwardCache& cache = k == 0 ? c1_cache : c2_cache;
    MlpGrads scratch = zero_grads(critic);
    Matrix dLdx = backward(critic, cache, mask, scratch);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < ad; ++j) dLda.at(i, j) += dLdx.at(i, sd + j);
  }

  double inv_var = 1.0 / (L.cfg.sigma_hat * L.cfg.sigma_hat);
  if (L.cfg.use_policy_prior && prior != nullptr) {
    for (int i = 0; i < n; ++i) {
      ActionVec target = clamp_action(prior->query(batch[i]->state, L.task));
      double sq = 0.0;
      for (int j = 0; j < ad; ++j) {
        double d = a.at(i, j) - target[j];
        sq += d * d;
        dLda.at(i, j) += L.cfg.beta * d * inv_var / n;
      }
      out.reg_term += sq * 0.5 * inv_var / n;
    }
  }

  g = zero_grads(L.actor);
  backward(L.actor, actor_cache, dLda, g);

  if (L.cfg.use_success_buffer && !succ_batch.empty()) {
    int m = static_cast<int>(succ_batch.size());
    Matrix s2 = detail::states_matrix(succ_batch, sd);
    ForwardCache succ_cache;
    Matrix a2 = forward(L.actor, s2, &succ_cache);
    Matrix dLda2(m, ad);
    for (int i = 0; i < m; ++i) {
      const ActionVec& target = succ_batch[i]->action;
      double sq = 0.0;
      for (int j = 0; j < ad; ++j) {
        double d = a2.at(i, j) - target[j];
        sq += d * d;
        dLda2.at(i, j) = L.cfg.alpha * d * inv_var / m;
      }
      out.succ_term += sq * 0.5 * inv_var / m;
    }
    backward(L.actor, succ_cache, dLda2, g);
  }

  out.total = out.pg + L.cfg.alpha * out.succ_term + L.cfg.beta * out.reg_term;
  return out;
}

// One optimizer step on the actor.
inline ActorLossTerms actor_update(FacLearner& L,
                                   const std::vector<const Transition*>& batch,
                                   const std::vector<const Transition*>& succ_batch,
                                   const PolicyPrior* prior) {
  MlpGrads g;
  ActorLossTerms out = actor_gradient(L, batch, succ_batch, prior, g);
  adam_step(L.actor_opt, L.actor, g);
  return out;
}

// Append a finished episode to replay; episodes whose final transition the
// success prior judged successful also enter the success buffer. Storage is
// gated on the prior's judgement, never on ground truth.
inline void commit_episode(FacLearner& L, const EpisodeRecord& ep) {
  if (ep.transitions.empty() || !ep.transitions.back().done)
    throw std::invalid_argument("commit_episode: incomplete episode");
  for (std::size_t i = 0; i + 1 < ep.transitions.size(); ++i)
    if (ep.transitions[i].done)
      throw std::invalid_argument("commit_episode: done before final transition");
  L.replay.add(ep);
  if (ep.transitions.back().prior_success) L.success.add(ep);
}

// Deterministic-policy rollouts with ground-truth success counting; the one
// place ground truth is allowed. A fixed seed reproduces identical layouts
// on every call.
inline double evaluate(const std::function<ActionVec(const StateVec&)>& policy,
                       const std::string& env_name, int n_episodes,
                       RngSeed seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes >= 1");
  auto env = make_env(env_name, seed);
  RngStream rng(seed);
  int successes = 0;
  for (int e = 0; e < n_episodes; ++e) {
    StateVec s = env->reset(rng);
    while (true) {
      StepResult r = env->step(clamp_action(policy(s)));
      if (r.done) {
        if (r.true_success) ++successes;
        break;
      }
      s = std::move(r.next);
    }
  }
  return static_cast<double>(successes) / n_episodes;
}

struct EvalPoint {
  long frame = 0;
  double success_rate = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double reg_term = 0.0;
  double succ_term = 0.0;
  double actor_action_fraction = 0.0;
};

struct RunResult {
  std::vector<EvalPoint> points;
  std::string checkpoint_path;
  std::string config_hash;
  RngSeed seed = 0;
};

struct TrainOptions {
  long total_frames = 30000;
  long eval_interval = 1000;
  int eval_episodes = 10;
  std::string checkpoint_path;                   // saved at the end if set
  std::function<void(const EvalPoint&)> on_eval;  // incremental metrics hook
};

// Full training loop. All randomness flows from sub-streams of `seed`, so an
// identical (config, seed) pair reproduces the identical RunResult.
inline RunResult train(Env& env, const PriorBundle& bundle, const FacConfig& cfg,
                       RngSeed seed, const TrainOptions& opt) {
  validate_config(cfg);
  FacLearner L = make_learner(env.spec(), cfg, seed);
  RngStream env_rng(derive_seed(seed, "env"));
  RngStream noise_rng(derive_seed(seed, "noise"));
  RngStream sample_rng(derive_seed(seed, "sample"));
  RngSeed eval_seed = derive_seed(seed, "eval");

  RunResult result;
  result.seed = seed;

  const PolicyPrior* prior = &bundle.policy;
  RewardConfig rcfg{cfg.lambda_success, cfg.gamma};

  EpisodeRecord ep;
  ep.seed = seed;
  ep.task = L.task;
  StateVec s = env.reset(env_rng);

  double acc_actor = 0, acc_critic = 0, acc_reg = 0, acc_succ = 0;
  long n_updates = 0;
  long n_actor_src = 0, n_prior_src = 0;

  auto actor_policy = [&L](const StateVec& st) {
    return clamp_action(forward_one(L.actor, st));
  };

  while (L.frame < opt.total_frames) {
    SelectedAction sel = select_action(L, s, prior, L.frame, noise_rng, false);
    if (sel.source == ActionSource::actor)
      ++n_actor_src;
    else
      ++n_prior_src;
    StepResult r = env.step(sel.a);
    int mr = bundle.success.query(r.next, L.task);
    double f_term = cfg.use_value_prior
                        ? shaping_reward(bundle.value, s, r.next, L.task, cfg.gamma)
                        : 0.0;
    double reward = (cfg.use_success_reward ? cfg.lambda_success * mr : 0.0) + f_term;
    bool done = r.done || mr == 1;

    Transition t;
    t.state = s;
    t.action = sel.a;
    t.reward = reward;
    t.next_state = r.next;
    t.done = done;
    t.prior_success = mr == 1;
    t.true_success = r.true_success;
    ep.transitions.push_back(std::move(t));
    ++L.frame;

    if (done) {
      commit_episode(L, ep);
      ++L.episodes_done;
      ep = EpisodeRecord{};
      ep.seed = seed;
      ep.task = L.task;
      s = env.reset(env_rng);
    } else {
      s = r.next;
    }

    if (!in_warmup(L) && L.replay.transition_count() >= cfg.batch_size) {
      for (int u = 0; u < cfg.utd_ratio; ++u) {
        double closs = critic_update(L, sample_rng);
        std::vector<const Transition*> batch;
        batch.reserve(cfg.batch_size);
        for (int i = 0; i < cfg.batch_size; ++i)
          batch.push_back(&L.replay.sample_transition(sample_rng));
        std::vector<const Transition*> succ_batch;
        if (cfg.use_success_buffer && L.success.transition_count() > 0) {
          succ_batch.reserve(cfg.batch_size);
          for (int i = 0; i < cfg.batch_size; ++i)
            succ_batch.push_back(&L.success.sample_transition(sample_rng));
        }
        ActorLossTerms a = actor_update(L, batch, succ_batch,
                                        cfg.use_policy_prior ? prior : nullptr);
        acc_critic += closs;
        acc_actor += a.total;
        acc_reg += a.reg_term;
        acc_succ += a.succ_term;
        ++n_updates;
      }
    }

    if (L.frame % opt.eval_interval == 0) {
      EvalPoint pt;
      pt.frame = L.frame;
      pt.success_rate =
          evaluate(actor_policy, env.spec().name, opt.eval_episodes, eval_seed);
      if (n_updates > 0) {
        pt.actor_loss = acc_actor / n_updates;
        pt.critic_loss = acc_critic / n_updates;
        pt.reg_term = acc_reg / n_updates;
        pt.succ_term = acc_succ / n_updates;
      }
      long n_src = n_actor_src + n_prior_src;
      pt.actor_action_fraction =
          n_src > 0 ? static_cast<double>(n_actor_src) / n_src : 0.0;
      acc_actor = acc_critic = acc_reg = acc_succ = 0.0;
      n_updates = 0;
      n_actor_src = n_prior_src = 0;
      result.points.push_back(pt);
      if (opt.on_eval) opt.on_eval(pt);
    }
  }

  if (!opt.checkpoint_path.empty()) {
    save_mlp(L.actor, opt.checkpoint_path);
    result.checkpoint_path = opt.checkpoint_path;
  }
  return result;
}

}  // namespace fac
