#include <catch2/catch_amalgamated.hpp>

#include "fac/learner.hpp"

using namespace fac;

namespace {

FacConfig small_config() {
  FacConfig c;
  c.batch_size = 32;
  c.seed_frames = 200;
  c.explore_decay_frames = 500;
  c.replay_capacity = 5000;
  return c;
}

Transition make_transition(RngStream& rng, int sd, int ad, double reward,
                           bool done) {
  Transition t;
  t.state.resize(sd);
  t.next_state.resize(sd);
  t.action.resize(ad);
  for (auto& x : t.state) x = rng.uniform01();
  for (auto& x : t.next_state) x = rng.uniform01();
  for (auto& x : t.action) x = rng.uniform(-1.0, 1.0);
  t.reward = reward;
  t.done = done;
  return t;
}

EpisodeRecord make_episode(RngStream& rng, int sd, int ad, int len) {
  EpisodeRecord ep;
  for (int i = 0; i < len; ++i)
    ep.transitions.push_back(
        make_transition(rng, sd, ad, rng.uniform(-1.0, 1.0), i + 1 == len));
  return ep;
}

void set_constant_output(Mlp& m, double c) {
  for (auto& layer : m.layers) {
    std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  m.layers.back().b[0] = c;
}

}  // namespace

TEST_CASE("explore_std: schedule endpoints and midpoint", "[learner]") {
  FacConfig c;  // start 1.0, end 0.1, decay 10000
  REQUIRE(explore_std(0, c) == 1.0);
  REQUIRE(explore_std(c.explore_decay_frames, c) == 0.1);
  REQUIRE(explore_std(c.explore_decay_frames * 3, c) == 0.1);
  REQUIRE(explore_std(c.explore_decay_frames / 2, c) == Catch::Approx(0.55));
  REQUIRE_THROWS_AS(explore_std(-1, c), std::invalid_argument);
  FacConfig robot = robot_preset();
  REQUIRE(explore_std(0, robot) == 0.1);
  REQUIRE(explore_std(100000, robot) == 0.1);
}

TEST_CASE("EpisodeStore: eviction respects both capacity kinds", "[learner]") {
  RngStream rng = make_rng(1);
  EpisodeStore by_tr(20, 0);
  for (int i = 0; i < 10; ++i) by_tr.add(make_episode(rng, 3, 2, 5));
  REQUIRE(by_tr.transition_count() <= 20);
  REQUIRE(by_tr.episode_count() == 4);

  EpisodeStore by_ep(0, 3);
  for (int i = 0; i < 5; ++i) by_ep.add(make_episode(rng, 3, 2, 4));
  REQUIRE(by_ep.episode_count() == 3);
  REQUIRE_THROWS_AS(by_ep.add(EpisodeRecord{}), std::invalid_argument);
}

TEST_CASE("sample_sequence: never crosses an episode boundary", "[learner]") {
  RngStream rng = make_rng(2);
  EpisodeStore store(0, 0);
  for (int i = 0; i < 40; ++i)
    store.add(make_episode(rng, 3, 2, 1 + static_cast<int>(rng.below(7))));
  for (int trial = 0; trial < 2000; ++trial) {
    ReplaySeq s = sample_sequence(store, rng, 3);
    int ep_len = static_cast<int>(s.ep->transitions.size());
    REQUIRE(s.start >= 0);
    REQUIRE(s.len >= 1);
    REQUIRE(s.len <= 3);
    REQUIRE(s.start + s.len <= ep_len);
    for (int j = 0; j + 1 < s.len; ++j)
      REQUIRE_FALSE(s.ep->transitions[s.start + j].done);
    bool last_done = s.ep->transitions[s.start + s.len - 1].done;
    REQUIRE(s.bootstrap == (s.len == 3 && !last_done));
    if (s.len < 3) REQUIRE(last_done);
  }
}

TEST_CASE("nstep_targets: terminal three-step sum without bootstrap", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 0);
  RngStream rng = make_rng(3);
  EpisodeRecord ep;
  double rewards[3] = {0.0, 0.0, 1.0};
  for (int i = 0; i < 3; ++i)
    ep.transitions.push_back(make_transition(rng, 4, 2, rewards[i], i == 2));
  ReplaySeq seq{&ep, 0, 3, false};
  std::vector<double> y = nstep_targets(L, {seq}, rng);
  REQUIRE(y[0] == Catch::Approx(0.9801).margin(1e-12));
}

TEST_CASE("nstep_targets: one-step bootstrap from the min target critic", "[learner]") {
  FacConfig cfg = small_config();
  cfg.nstep = 1;
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 0);
  set_constant_output(L.target1, 5.0);
  set_constant_output(L.target2, 9.0);
  set_constant_output(L.critic1, 100.0);  // online critics must not be used
  set_constant_output(L.critic2, 100.0);
  RngStream rng = make_rng(4);
  EpisodeRecord ep;
  ep.transitions.push_back(make_transition(rng, 4, 2, 0.0, false));
  ep.transitions.push_back(make_transition(rng, 4, 2, 0.0, true));
  ReplaySeq seq{&ep, 0, 1, true};
  std::vector<double> y = nstep_targets(L, {seq}, rng);
  REQUIRE(y[0] == Catch::Approx(4.95).margin(1e-12));
}

TEST_CASE("nstep_targets: random batch matches a scalar re-implementation", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 0);
  set_constant_output(L.target1, 3.7);
  set_constant_output(L.target2, 5.2);
  RngStream rng = make_rng(5);
  std::vector<EpisodeRecord> eps;
  for (int i = 0; i < 10; ++i)
    eps.push_back(make_episode(rng, 4, 2, 1 + static_cast<int>(rng.below(6))));
  std::vector<ReplaySeq> seqs;
  for (const auto& ep : eps) {
    int len = static_cast<int>(ep.transitions.size());
    for (int start = 0; start < len; ++start) {
      int l = std::min(3, len - start);
      bool boot = l == 3 && !ep.transitions[start + l - 1].done;
      seqs.push_back({&ep, start, l, boot});
    }
  }
  RngStream rng_copy = make_rng(999);
  std::vector<double> y = nstep_targets(L, seqs, rng_copy);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    double expect = 0.0, g = 1.0;
    for (int j = 0; j < seqs[i].len; ++j) {
      expect += g * seqs[i].ep->transitions[seqs[i].start + j].reward;
      g *= 0.99;
    }
    if (seqs[i].bootstrap) expect += g * 3.7;  // min of the two target critics
    REQUIRE(y[i] == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("nstep_targets: malformed sequences are rejected", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 0);
  RngStream rng = make_rng(6);
  EpisodeRecord ep = make_episode(rng, 4, 2, 4);
  REQUIRE_THROWS_AS(nstep_targets(L, {{&ep, 2, 5, false}}, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(nstep_targets(L, {{&ep, 0, 0, false}}, rng),
                    std::invalid_argument);
  // A done transition mid-sequence crosses an episode boundary.
  EpisodeRecord bad = make_episode(rng, 4, 2, 2);
  bad.transitions.push_back(make_transition(rng, 4, 2, 0.0, true));
  bad.transitions[0].done = true;
  REQUIRE_THROWS_AS(nstep_targets(L, {{&bad, 0, 3, false}}, rng),
                    std::invalid_argument);
}

TEST_CASE("critic_update: underfilled replay is an error", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 0);
  RngStream rng = make_rng(7);
  REQUIRE_THROWS_WITH(critic_update(L, rng),
                      Catch::Matchers::ContainsSubstring("replay underfilled"));
}

TEST_CASE("critic_update: perfect critics have zero loss", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 0);
  RngStream rng = make_rng(8);
  // All rewards zero and critics identically zero: targets are zero whether
  // or not a sequence bootstraps, so the residual vanishes.
  for (int i = 0; i < 20; ++i) {
    EpisodeRecord ep;
    int len = 1 + static_cast<int>(rng.below(5));
    for (int j = 0; j < len; ++j)
      ep.transitions.push_back(make_transition(rng, 4, 2, 0.0, j + 1 == len));
    L.replay.add(ep);
  }
  set_constant_output(L.critic1, 0.0);
  set_constant_output(L.critic2, 0.0);
  set_constant_output(L.target1, 0.0);
  set_constant_output(L.target2, 0.0);
  double loss = critic_update(L, rng);
  REQUIRE(loss == 0.0);
}

TEST_CASE("critic_update: loss equals an independent recomputation", "[learner]") {
  FacConfig cfg = small_config();
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 1);
  RngStream fill = make_rng(9);
  for (int i = 0; i < 30; ++i)
    L.replay.add(make_episode(fill, 4, 2, 1 + static_cast<int>(fill.below(6))));

  FacLearner snapshot = L;
  RngStream r1 = make_rng(321), r2 = make_rng(321);
  double loss = critic_update(L, r1);

  std::vector<ReplaySeq> seqs;
  for (int i = 0; i < cfg.batch_size; ++i)
    seqs.push_back(sample_sequence(snapshot.replay, r2, cfg.nstep));
  std::vector<double> y = nstep_targets(snapshot, seqs, r2);
  double expect = 0.0;
  for (const Mlp* critic : {&snapshot.critic1, &snapshot.critic2}) {
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const Transition& t = seqs[i].ep->transitions[seqs[i].start];
      std::vector<double> x(t.state);
      x.insert(x.end(), t.action.begin(), t.action.end());
      double q = forward_one(*critic, x)[0];
      expect += (q - y[i]) * (q - y[i]);
    }
  }
  expect /= 2.0 * cfg.batch_size;
  REQUIRE(loss == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("critic_update: fits a one-step bandit dataset", "[learner]") {
  FacConfig cfg = small_config();
  cfg.batch_size = 24;
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 2);
  RngStream rng = make_rng(10);
  std::vector<Transition> dataset;
  for (int i = 0; i < 24; ++i) {
    Transition t = make_transition(rng, 4, 2, 0.0, true);
    t.reward = 0.5 * t.state[0] + 0.25 * t.action[1];  // known bandit payout
    dataset.push_back(t);
    EpisodeRecord ep;
    ep.transitions.push_back(t);
    L.replay.add(ep);
  }
  RngStream urng = make_rng(11);
  for (int u = 0; u < 2000; ++u) critic_update(L, urng);
  for (const auto& t : dataset) {
    std::vector<double> x(t.state);
    x.insert(x.end(), t.action.begin(), t.action.end());
    REQUIRE(std::abs(forward_one(L.critic1, x)[0] - t.reward) < 0.01);
    REQUIRE(std::abs(forward_one(L.critic2, x)[0] - t.reward) < 0.01);
  }
}

TEST_CASE("actor_gradient: zero regularizer when the actor equals the prior", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 3);
  RngStream rng = make_rng(12);
  std::vector<Transition> pool;
  for (int i = 0; i < 8; ++i) pool.push_back(make_transition(rng, 4, 2, 0.0, true));
  std::vector<const Transition*> batch;
  for (const auto& t : pool) batch.push_back(&t);

  Mlp actor_copy = L.actor;
  PolicyPrior mimic;
  mimic.fn = [actor_copy](const StateVec& s, TaskId) {
    return forward_one(actor_copy, s);
  };
  MlpGrads g;
  ActorLossTerms terms = actor_gradient(L, batch, {}, &mimic, g);
  REQUIRE(terms.reg_term == 0.0);
  REQUIRE(terms.succ_term == 0.0);
  REQUIRE(terms.total == terms.pg);
}

TEST_CASE("actor_gradient: closed-form regularizer value", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 4);
  RngStream rng = make_rng(13);
  Transition t = make_transition(rng, 4, 2, 0.0, true);
  std::vector<const Transition*> batch = {&t};

  Mlp actor_copy = L.actor;
  PolicyPrior offset;
  offset.fn = [actor_copy](const StateVec& s, TaskId) {
    ActionVec a = forward_one(actor_copy, s);
    a[0] += 0.1;
    a[1] -= 0.1;  // squared distance 0.02
    return a;
  };
  MlpGrads g;
  ActorLossTerms terms = actor_gradient(L, batch, {}, &offset, g);
  REQUIRE(terms.reg_term == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("actor_gradient: empty success batch contributes nothing", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 5);
  RngStream rng = make_rng(14);
  Transition t = make_transition(rng, 4, 2, 0.0, true);
  std::vector<const Transition*> batch = {&t};
  PolicyPrior prior = oracle_policy_prior(L.env_spec);
  MlpGrads g;
  ActorLossTerms terms = actor_gradient(L, batch, {}, &prior, g);
  REQUIRE(terms.succ_term == 0.0);
}

TEST_CASE("actor_gradient: ablation switches zero their terms exactly", "[learner]") {
  FacConfig cfg = small_config();
  cfg.use_policy_prior = false;
  cfg.use_success_buffer = false;
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 6);
  RngStream rng = make_rng(15);
  std::vector<Transition> pool;
  for (int i = 0; i < 6; ++i) pool.push_back(make_transition(rng, 4, 2, 0.0, true));
  std::vector<const Transition*> batch, succ;
  for (const auto& t : pool) batch.push_back(&t);
  for (const auto& t : pool) succ.push_back(&t);
  PolicyPrior prior = oracle_policy_prior(L.env_spec);
  MlpGrads g;
  ActorLossTerms terms = actor_gradient(L, batch, succ, &prior, g);
  REQUIRE(terms.reg_term == 0.0);
  REQUIRE(terms.succ_term == 0.0);
}

TEST_CASE("actor_gradient: finite differences across all three paths", "[learner]") {
  FacConfig cfg = small_config();
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 7);
  RngStream rng = make_rng(16);
  std::vector<Transition> pool, spool;
  for (int i = 0; i < 6; ++i) pool.push_back(make_transition(rng, 4, 2, 0.0, true));
  for (int i = 0; i < 4; ++i) spool.push_back(make_transition(rng, 4, 2, 0.0, true));
  std::vector<const Transition*> batch, succ;
  for (const auto& t : pool) batch.push_back(&t);
  for (const auto& t : spool) succ.push_back(&t);
  PolicyPrior prior = oracle_policy_prior(L.env_spec);

  MlpGrads g;
  actor_gradient(L, batch, succ, &prior, g);

  // Test-local total actor loss as a pure function of the actor parameters.
  auto loss = [&]() {
    double pg = 0.0, reg = 0.0, succ_term = 0.0;
    for (const auto* t : batch) {
      ActionVec a = forward_one(L.actor, t->state);
      std::vector<double> x(t->state);
      x.insert(x.end(), a.begin(), a.end());
      double q = std::min(forward_one(L.critic1, x)[0],
                          forward_one(L.critic2, x)[0]);
      pg -= q / batch.size();
      ActionVec p = clamp_action(prior.query(t->state, L.task));
      double sq = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - p[j]) * (a[j] - p[j]);
      reg += sq / (2.0 * cfg.sigma_hat * cfg.sigma_hat) / batch.size();
    }
    for (const auto* t : succ) {
      ActionVec a = forward_one(L.actor, t->state);
      double sq = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j)
        sq += (a[j] - t->action[j]) * (a[j] - t->action[j]);
      succ_term += sq / (2.0 * cfg.sigma_hat * cfg.sigma_hat) / succ.size();
    }
    return pg + cfg.alpha * succ_term + cfg.beta * reg;
  };

  const double h = 1e-5;
  double worst = 0.0;
  RngStream pick = make_rng(17);
  for (int probe = 0; probe < 40; ++probe) {
    int l = static_cast<int>(pick.below(L.actor.layers.size()));
    auto& layer = L.actor.layers[l];
    bool weight = pick.uniform01() < 0.8;
    double* param;
    double analytic;
    if (weight) {
      int j = static_cast<int>(pick.below(layer.w.rows));
      int k = static_cast<int>(pick.below(layer.w.cols));
      param = &layer.w.at(j, k);
      analytic = g.layers[l].w.at(j, k);
    } else {
      int j = static_cast<int>(pick.below(layer.b.size()));
      param = &layer.b[j];
      analytic = g.layers[l].b[j];
    }
    double keep = *param;
    *param = keep + h;
    double up = loss();
    *param = keep - h;
    double down = loss();
    *param = keep;
    double fd = (up - down) / (2.0 * h);
    double rel = std::abs(analytic - fd) /
                 std::max({std::abs(analytic), std::abs(fd), 1e-6});
    worst = std::max(worst, rel);
  }
  REQUIRE(worst <= 1e-3);
}

TEST_CASE("commit_episode: success buffer gated on the prior's judgement", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 8);
  RngStream rng = make_rng(18);

  EpisodeRecord win = make_episode(rng, 4, 2, 5);
  win.transitions.back().prior_success = true;
  commit_episode(L, win);
  REQUIRE(L.success.episode_count() == 1);
  REQUIRE(L.replay.episode_count() == 1);

  EpisodeRecord lose = make_episode(rng, 4, 2, 5);
  commit_episode(L, lose);
  REQUIRE(L.success.episode_count() == 1);
  REQUIRE(L.replay.episode_count() == 2);

  // A prior that never fires keeps the success buffer empty no matter how
  // often the episodes truly succeed.
  FacLearner L2 = make_learner(make_env_spec("point-reach"), small_config(), 9);
  for (int i = 0; i < 100; ++i) {
    EpisodeRecord ep = make_episode(rng, 4, 2, 3);
    ep.transitions.back().true_success = true;  // ground truth, ignored
    ep.transitions.back().prior_success = null_success_prior().query(
                                              ep.transitions.back().next_state,
                                              0) == 1;
    commit_episode(L2, ep);
  }
  REQUIRE(L2.replay.episode_count() == 100);
  REQUIRE(L2.success.episode_count() == 0);
}

TEST_CASE("commit_episode: rejects malformed episodes", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 10);
  RngStream rng = make_rng(19);
  EpisodeRecord unfinished = make_episode(rng, 4, 2, 4);
  unfinished.transitions.back().done = false;
  REQUIRE_THROWS_WITH(commit_episode(L, unfinished),
                      Catch::Matchers::ContainsSubstring("incomplete episode"));
  EpisodeRecord double_done = make_episode(rng, 4, 2, 4);
  double_done.transitions[1].done = true;
  REQUIRE_THROWS_AS(commit_episode(L, double_done), std::invalid_argument);
  REQUIRE_THROWS_AS(commit_episode(L, EpisodeRecord{}), std::invalid_argument);
}

TEST_CASE("select_action: evaluation is the deterministic actor mean", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 11);
  PolicyPrior prior = oracle_policy_prior(L.env_spec);
  RngStream rng = make_rng(20);
  StateVec s = {0.1, 0.5, 0.7, 0.5};
  SelectedAction a1 = select_action(L, s, &prior, 0, rng, true);
  SelectedAction a2 = select_action(L, s, &prior, 0, rng, true);
  REQUIRE(a1.a == a2.a);
  REQUIRE(a1.source == ActionSource::actor);
  REQUIRE(a1.a == clamp_action(forward_one(L.actor, s)));
}

TEST_CASE("select_action: warm-up takes the prior action", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 12);
  PolicyPrior prior = oracle_policy_prior(L.env_spec);
  RngStream rng = make_rng(21);
  StateVec s = {0.1, 0.5, 0.7, 0.5};
  REQUIRE(in_warmup(L));
  SelectedAction a = select_action(L, s, &prior, 0, rng, false);
  REQUIRE(a.source == ActionSource::prior);
  REQUIRE(a.a == clamp_action(prior.query(s, L.task)));
}

TEST_CASE("select_action: better-action picks the higher min-Q candidate", "[learner]") {
  FacConfig cfg = small_config();
  cfg.better_action = true;
  FacLearner L = make_learner(make_env_spec("point-reach"), cfg, 13);
  L.frame = cfg.seed_frames + cfg.explore_decay_frames;  // warm-up over, sigma 0.1

  // Critics monotone in the first action component; prior outputs (1, 0).
  for (Mlp* critic : {&L.critic1, &L.critic2}) {
    set_constant_output(*critic, 0.0);
    critic->layers[0].w.at(0, 4) = 0.2;  // reads action[0]
    critic->layers[1].w.at(0, 0) = 1.0;
    critic->layers[2].w.at(0, 0) = 5.0;
  }
  // Zero actor: mean action 0, so the noisy candidate stays below 0.3.
  for (auto& layer : L.actor.layers) {
    std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  PolicyPrior prior = oracle_policy_prior(L.env_spec);
  RngStream rng = make_rng(22);
  StateVec s = {0.1, 0.5, 0.7, 0.5};
  for (int i = 0; i < 10; ++i) {
    SelectedAction a = select_action(L, s, &prior, L.frame, rng, false);
    REQUIRE(a.source == ActionSource::prior);
    REQUIRE(a.a[0] == 1.0);
  }
}

TEST_CASE("evaluate: oracle expert scores a perfect rate", "[learner]") {
  PolicyPrior expert = oracle_policy_prior(make_env_spec("point-reach"));
  double rate = evaluate(
      [&expert](const StateVec& s) { return expert.query(s, 0); },
      "point-reach", 20, 77);
  REQUIRE(rate == 1.0);
}

TEST_CASE("evaluate: deterministic and bounded", "[learner]") {
  FacLearner L = make_learner(make_env_spec("point-reach"), small_config(), 14);
  auto policy = [&L](const StateVec& s) { return forward_one(L.actor, s); };
  double r1 = evaluate(policy, "point-reach", 10, 5);
  double r2 = evaluate(policy, "point-reach", 10, 5);
  REQUIRE(r1 == r2);
  REQUIRE(r1 >= 0.0);
  REQUIRE(r1 <= 1.0);
  REQUIRE_THROWS_AS(evaluate(policy, "point-reach", 0, 5),
                    std::invalid_argument);
}

TEST_CASE("train: identical seed and config reproduce the run exactly", "[learner]") {
  FacConfig cfg = small_config();
  TrainOptions opt;
  opt.total_frames = 600;
  opt.eval_interval = 200;
  opt.eval_episodes = 3;

  auto run_once = [&]() {
    auto env = make_env("point-reach", derive_seed(42, "env-make"));
    PriorBundle bundle = oracle_bundle(env->spec());
    return train(*env, bundle, cfg, 42, opt);
  };
  RunResult a = run_once();
  RunResult b = run_once();
  REQUIRE(a.points.size() == b.points.size());
  REQUIRE(a.points.size() == 3);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].frame == b.points[i].frame);
    REQUIRE(a.points[i].success_rate == b.points[i].success_rate);
    REQUIRE(a.points[i].actor_loss == b.points[i].actor_loss);
    REQUIRE(a.points[i].critic_loss == b.points[i].critic_loss);
    REQUIRE(a.points[i].reg_term == b.points[i].reg_term);
    REQUIRE(a.points[i].succ_term == b.points[i].succ_term);
    REQUIRE(a.points[i].actor_action_fraction == b.points[i].actor_action_fraction);
  }
}

TEST_CASE("train: ablation switches silence their loss terms", "[learner]") {
  FacConfig cfg = small_config();
  cfg.use_policy_prior = false;
  cfg.use_success_buffer = false;
  TrainOptions opt;
  opt.total_frames = 500;
  opt.eval_interval = 250;
  opt.eval_episodes = 2;
  auto env = make_env("point-reach", derive_seed(43, "env-make"));
  PriorBundle bundle = oracle_bundle(env->spec());
  RunResult r = train(*env, bundle, cfg, 43, opt);
  for (const auto& p : r.points) {
    REQUIRE(p.reg_term == 0.0);
    REQUIRE(p.succ_term == 0.0);
  }
}
