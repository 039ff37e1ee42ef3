#include <catch2/catch_amalgamated.hpp>

#include "fac/shaping.hpp"

using namespace fac;

namespace {

// Value prior that reads the first state component; handy for arithmetic
// checks with hand-picked values.
ValuePrior first_component_value() {
  ValuePrior v;
  v.provenance = "first-component";
  v.fn = [](const StateVec& s, TaskId) { return s[0]; };
  return v;
}

}  // namespace

TEST_CASE("shaping_reward: constant potential gives (gamma-1)c", "[shaping]") {
  ValuePrior v = first_component_value();
  double c = 0.37;
  double f = shaping_reward(v, {c}, {c}, 0, 0.99);
  REQUIRE(f == Catch::Approx((0.99 - 1.0) * c).margin(1e-15));
}

TEST_CASE("shaping_reward: hand arithmetic", "[shaping]") {
  ValuePrior v = first_component_value();
  double f = shaping_reward(v, {0.4}, {0.6}, 0, 0.99);
  REQUIRE(f == Catch::Approx(0.194).margin(1e-12));
}

TEST_CASE("shaping_reward: telescopes at gamma 1", "[shaping]") {
  ValuePrior v = first_component_value();
  RngStream rng = make_rng(3);
  std::vector<StateVec> traj;
  for (int i = 0; i < 30; ++i) traj.push_back({rng.uniform01()});
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    total += shaping_reward(v, traj[i], traj[i + 1], 0, 1.0);
  REQUIRE(total == Catch::Approx(traj.back()[0] - traj.front()[0]).margin(1e-9));
}

TEST_CASE("composite_reward: success bonus plus shaping", "[shaping]") {
  ValuePrior v = first_component_value();
  SuccessPrior sr;
  sr.fn = [](const StateVec& s, TaskId) { return s[0] >= 1.0 ? 1 : 0; };
  RewardConfig cfg;  // lambda 100, gamma 0.99
  CompositeReward r = composite_reward(sr, v, {0.9}, {1.0}, 0, cfg);
  REQUIRE(r.prior_success);
  REQUIRE(r.reward == Catch::Approx(100.09).margin(1e-12));

  CompositeReward flat = composite_reward(sr, v, {0.4}, {0.4}, 0, cfg);
  REQUIRE_FALSE(flat.prior_success);
  REQUIRE(flat.reward == Catch::Approx((0.99 - 1.0) * 0.4).margin(1e-12));
}

TEST_CASE("composite_reward: null value prior leaves only the bonus", "[shaping]") {
  ValuePrior v = null_value_prior();
  SuccessPrior sr;
  sr.fn = [](const StateVec& s, TaskId) { return s[0] >= 1.0 ? 1 : 0; };
  CompositeReward r = composite_reward(sr, v, {0.9}, {1.0}, 0, {});
  REQUIRE(r.reward == 100.0);
  CompositeReward zero = composite_reward(sr, v, {0.2}, {0.3}, 0, {});
  REQUIRE(zero.reward == 0.0);
}

// Two code paths, one semantics: building the composite-reward MDP on the
// gridworld via apply_shaping with the value prior as potential must
// reproduce composite_reward on every cell transition.
TEST_CASE("composite_reward: equals shaped tabular rewards on grid-8x8", "[shaping]") {
  auto env = make_env("grid-8x8", 0);
  const EnvSpec& spec = env->spec();
  ValuePrior v = oracle_value_prior(spec);
  SuccessPrior sr = oracle_success_prior(spec);
  RewardConfig cfg;

  TabularMDP base = env->to_tabular();
  for (auto& per_state : base.reward)
    for (auto& per_action : per_state)
      for (auto& r : per_action) r *= cfg.lambda_success;

  auto one_hot = [](int cell) {
    StateVec s(64, 0.0);
    s[cell] = 1.0;
    return s;
  };
  Potential phi;
  phi.phi.resize(65);
  for (int cell = 0; cell < 64; ++cell)
    phi.phi[cell] = v.query(one_hot(cell), spec.task);
  phi.phi[64] = 0.0;

  TabularMDP shaped = apply_shaping(base, phi);

  double worst = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      int cell = y * 8 + x;
      if (cell == 63) continue;  // goal: the env episode has already ended
      for (int a = 0; a < 4; ++a) {
        auto [nx, ny] = grid_next_cell(x, y, a, 8);
        int next = ny * 8 + nx;
        CompositeReward cr =
            composite_reward(sr, v, one_hot(cell), one_hot(next), spec.task, cfg);
        worst = std::max(worst,
                         std::abs(cr.reward - shaped.reward[cell][a][next]));
      }
    }
  REQUIRE(worst <= 1e-12);
}
