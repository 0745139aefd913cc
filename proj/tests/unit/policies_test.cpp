#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "aircomp/engine.hpp"
#include "aircomp/policies.hpp"
#include "aircomp/scenario.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace aircomp {
namespace {

const Position kDepot{3000, -1000};
const Position kCenters[3] = {{0, 0}, {3000, 0}, {6000, 0}};

// Three intact towns with the given window task counts (window 10 s, 90-unit
// tasks) and `uavs` stationed UAVs at the depot.
HapSnapshot snapshot(std::vector<std::uint64_t> counts, std::uint32_t uavs) {
  HapSnapshot s;
  s.taken_at = 100.0;
  s.window = 10.0;
  for (std::uint32_t i = 0; i < counts.size(); ++i) {
    TownView t;
    t.id = TownId{i};
    t.center = kCenters[i];
    t.radius = 80.0;
    t.has_edge = true;
    t.edge_operational = true;
    t.edge_capacity = 100000.0;
    t.task_count = counts[i];
    t.arrival_rate = static_cast<double>(counts[i]) / s.window;
    t.mean_cpu_demand = counts[i] ? 90.0 : 0.0;
    t.min_required_delay = 1.0;
    t.operational_capacity = 100000.0;
    s.towns.push_back(t);
  }
  for (std::uint32_t i = 0; i < uavs; ++i) {
    s.uav_states.push_back({UavId{i}, kDepot, Stationed{}, std::nullopt, 50000.0});
  }
  return s;
}

void destroy(HapSnapshot& s, std::uint32_t town, double lambda) {
  auto& t = s.towns[town];
  t.edge_operational = false;
  t.edge_capacity = 0.0;
  t.operational_capacity = 0.0;
  t.arrival_rate = lambda;
  t.task_count = static_cast<std::uint64_t>(lambda * s.window);
  t.mean_cpu_demand = 90.0;
}

void station(HapSnapshot& s, std::uint32_t uav, std::uint32_t town) {
  s.uav_states[uav].position = s.towns[town].center;
  s.uav_states[uav].town = TownId{town};
}

std::map<std::uint32_t, int> per_town(const std::vector<RelocationCommand>& cmds) {
  std::map<std::uint32_t, int> out;
  for (const auto& c : cmds) {
    for (std::uint32_t t = 0; t < 3; ++t) {
      if (horizontal_distance(c.destination, kCenters[t]) <= 80.0) ++out[t];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TEST(Plan, NoUavNeverMoves) {
  Rng rng(1);
  auto s = snapshot({1000, 500, 200}, 8);
  destroy(s, 0, 300);
  EXPECT_TRUE(plan(DeploymentPolicy{policy::NoUav{}}, s, rng).empty());
}

TEST(Plan, NothingStationedMeansNoCommands) {
  Rng rng(1);
  auto s = snapshot({1000, 500, 200}, 4);
  destroy(s, 0, 300);
  for (auto& u : s.uav_states) u.flight_state = Flying{kCenters[1], 500.0};
  for (const auto& name : policy_names()) {
    EXPECT_TRUE(plan(*parse_policy(name), s, rng).empty()) << name;
  }
}

TEST(Plan, NeverCommandsFlyingUavsAndAtMostOncePerUav) {
  std::mt19937_64 gen(9);
  for (int round = 0; round < 200; ++round) {
    std::uniform_int_distribution<int> count(0, 3000);
    auto s = snapshot({std::uint64_t(count(gen)), std::uint64_t(count(gen)),
                       std::uint64_t(count(gen))},
                      8);
    if (round % 2) destroy(s, round % 3, count(gen) / 10.0);
    s.uncovered_users.push_back({UserId{0}, {5, 5}});
    s.uncovered_users.push_back({UserId{1}, {-5, 5}});
    for (auto& u : s.uav_states) {
      switch (gen() % 3) {
        case 0: u.flight_state = Flying{kCenters[1], 500.0}; u.town = TownId{1}; break;
        case 1: station(s, u.id.value, gen() % 3); break;
        default: break;
      }
    }
    Rng rng(round);
    for (const auto& name : policy_names()) {
      const auto cmds = plan(*parse_policy(name), s, rng);
      std::set<UavId> seen;
      for (const auto& c : cmds) {
        EXPECT_TRUE(s.uav_states[c.uav.value].stationed()) << name;
        EXPECT_TRUE(seen.insert(c.uav).second) << name;
        EXPECT_EQ(c.issued_at, s.taken_at);
      }
    }
  }
}

TEST(Plan, ParsePolicyNames) {
  for (const auto& n : policy_names()) EXPECT_EQ(parse_policy(n)->name(), n);
  EXPECT_FALSE(parse_policy("bogus"));
}

TEST(Plan, ValidateRejectsBadParameters) {
  EXPECT_THROW((DeploymentPolicy{policy::LoadBalancing{0.0}}.validate()), InvalidValue);
  EXPECT_THROW((DeploymentPolicy{policy::Emergency{0, std::nullopt}}.validate()), InvalidValue);
  EXPECT_NO_THROW((DeploymentPolicy{policy::Emergency{}}.validate()));
}

// --- random ----------------------------------------------------------------

TEST(RandomPolicy, OneCommandPerUavToSomeTownCentre) {
  Rng rng(4);
  const auto s = snapshot({0, 0, 0}, 3);
  const auto cmds = plan_random(s, rng);
  ASSERT_EQ(cmds.size(), 3u);
  for (const auto& c : cmds) {
    EXPECT_TRUE(std::find(std::begin(kCenters), std::end(kCenters), c.destination) !=
                std::end(kCenters));
  }
}

TEST(RandomPolicy, EveryTownIsDrawn) {
  Rng rng(4);
  const auto s = snapshot({0, 0, 0}, 3);
  std::map<std::uint32_t, int> hits;
  for (int i = 0; i < 300; ++i) {
    for (const auto& [t, n] : per_town(plan_random(s, rng))) hits[t] += n;
  }
  for (std::uint32_t t = 0; t < 3; ++t) EXPECT_GT(hits[t], 200) << t;
}

// --- load balancing --------------------------------------------------------

TEST(LoadBalancing, HandTrace) {
  const auto s = snapshot({1000, 500, 200}, 3);
  const auto targets = load_balancing_targets(s, 400);
  EXPECT_EQ(targets[0].second, 2u);
  EXPECT_EQ(targets[1].second, 1u);
  EXPECT_EQ(targets[2].second, 0u);
  const auto by_town = per_town(plan_load_balancing(s, 400));
  EXPECT_EQ(by_town.at(0), 2);
  EXPECT_EQ(by_town.at(1), 1);
  EXPECT_FALSE(by_town.contains(2));
}

TEST(LoadBalancing, TieGoesToLowestTownId) {
  const auto cmds = plan_load_balancing(snapshot({100, 100, 100}, 1), 400);
  ASSERT_EQ(cmds.size(), 1u);
  EXPECT_EQ(cmds[0].destination, kCenters[0]);
}

TEST(LoadBalancing, AllZeroCountsSendEveryUavToFirstTown) {
  const auto cmds = plan_load_balancing(snapshot({0, 0, 0}, 4), 400);
  EXPECT_EQ(per_town(cmds).at(0), 4);
}

TEST(LoadBalancing, UavAlreadyInAssignedTownStays) {
  auto s = snapshot({1000, 500, 200}, 3);
  station(s, 2, 0);
  const auto cmds = plan_load_balancing(s, 400);
  for (const auto& c : cmds) EXPECT_NE(c.uav, UavId{2});
  const auto by_town = per_town(cmds);
  EXPECT_EQ(by_town.at(0), 1);
  EXPECT_EQ(by_town.at(1), 1);
}

TEST(LoadBalancing, AssignmentsIndependentOfTownOrder) {
  auto s = snapshot({700, 1300, 650}, 5);
  const auto a = load_balancing_targets(s, 400);
  std::reverse(s.towns.begin(), s.towns.end());
  auto b = load_balancing_targets(s, 400);
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(LoadBalancing, DefaultDecrementIsOneUavWindowOfWork) {
  const auto s = snapshot({1000, 500, 200}, 3);
  EXPECT_NEAR(default_lb_decrement(s), 50000.0 * 10.0 / 90.0, 1e-9);
  EXPECT_EQ(default_lb_decrement(snapshot({0, 0, 0}, 3)), 1.0);
}

// --- uncovered users -------------------------------------------------------

TEST(UncoveredUsers, AllServedWhenEdgesUp) {
  auto s = build_default_earthquake(5);
  const auto snap = take_snapshot(build_world(s), {{}, {}, {}}, 10.0);
  EXPECT_TRUE(uncovered_users(snap).empty());
}

TEST(UncoveredUsers, DestroyedTownWithPartialUavCoverage) {
  auto s = testing::three_towns();
  s.uavs.count = 1;
  s.populations = {testing::population("T1", 200, testing::profile(90, 1, 3.33))};
  auto world = build_world(s);
  world.edges[0].operational = false;
  EXPECT_EQ(uncovered_users(take_snapshot(world, {{}, {}, {}}, 10.0)).size(), 200u);

  for (std::size_t i = 0; i < world.users.size(); ++i) {
    world.users[i].position = i < 30 ? Position{-60, 0} : Position{70, 0};
  }
  world.uavs[0].position = {-60, 0};
  EXPECT_EQ(uncovered_users(take_snapshot(world, {{}, {}, {}}, 10.0)).size(), 170u);
}

// --- k-means ---------------------------------------------------------------

TEST(KMeans, WorkedExamples) {
  Rng rng(1);
  auto c = kmeans({{0, 0}, {2, 0}}, 1, 50, rng);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (Position{1, 0}));

  c = kmeans({{0, 0}, {0, 1}, {10, 0}, {10, 1}}, 2, 50, rng);
  std::sort(c.begin(), c.end(), [](auto a, auto b) { return a.x < b.x; });
  EXPECT_EQ(c[0], (Position{0, 0.5}));
  EXPECT_EQ(c[1], (Position{10, 0.5}));

  c = kmeans({{3, 4}}, 1, 50, rng);
  EXPECT_EQ(c[0], (Position{3, 4}));
}

TEST(KMeans, DegenerateInputs) {
  Rng rng(1);
  EXPECT_THROW(kmeans({{0, 0}}, 2, 50, rng), DegenerateInput);
  EXPECT_THROW(kmeans({}, 1, 50, rng), DegenerateInput);
  EXPECT_THROW(kmeans({{0, 0}}, 0, 50, rng), DegenerateInput);
}

TEST(KMeans, WcssNeverIncreases) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> coord(0, 100);
  for (int round = 0; round < 200; ++round) {
    std::vector<Position> pts(30);
    for (auto& p : pts) p = {coord(gen), coord(gen)};
    Rng rng(round);
    const auto r = kmeans_run(pts, 1 + round % 5, 50, rng);
    for (std::size_t i = 1; i < r.wcss_history.size(); ++i) {
      EXPECT_LE(r.wcss_history[i], r.wcss_history[i - 1] + 1e-9);
    }
    EXPECT_NEAR(r.wcss_history.back(), wcss(pts, r.centroids, r.assignment), 1e-6);
  }
}

TEST(KMeans, EmptyClusterIsReseeded) {
  // Duplicate points make two initial centres coincide.
  std::vector<Position> pts{{0, 0}, {0, 0}, {0, 0}, {9, 9}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto r = kmeans_run(pts, 2, 50, rng);
    std::vector<int> sizes(2, 0);
    for (auto a : r.assignment) ++sizes[a];
    EXPECT_GT(sizes[0], 0);
    EXPECT_GT(sizes[1], 0);
    EXPECT_NEAR(r.wcss_history.back(), 0.0, 1e-12);
  }
}

TEST(KMeans, NearBruteForceOptimumOnSmallGrids) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> coord(0, 9);
  int good = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t k = 1 + inst % 3;
    const std::size_t n = std::max<std::size_t>(k, 1 + gen() % 8);
    std::vector<Position> pts(n);
    for (auto& p : pts) p = {double(coord(gen)), double(coord(gen))};
    double best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 10; ++restart) {
      Rng rng(inst * 10 + restart);
      best = std::min(best, kmeans_run(pts, k, 50, rng).wcss_history.back());
    }
    const double opt = oracle::brute_force_wcss(pts, k);
    if (best <= 1.10 * opt + 1e-9) ++good;
  }
  EXPECT_GE(good, 95);
}

// --- emergency -------------------------------------------------------------

TEST(Emergency, AllUavsToTheSingleDisasterArea) {
  auto s = snapshot({300, 300, 300}, 8);
  destroy(s, 0, 300);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> r(-50, 50);
  for (std::uint32_t i = 0; i < 100; ++i) s.uncovered_users.push_back({UserId{i}, {r(gen), r(gen)}});
  Rng rng(1);
  const auto cmds = plan_emergency(s, policy::Emergency{}, rng);
  ASSERT_EQ(cmds.size(), 8u);
  for (const auto& c : cmds) {
    EXPECT_EQ(c.destination, cmds[0].destination);
    EXPECT_LE(horizontal_distance(c.destination, kCenters[0]), 80.0);
  }
}

TEST(Emergency, NoDisasterNoCommands) {
  Rng rng(1);
  EXPECT_TRUE(plan_emergency(snapshot({300, 300, 300}, 8), policy::Emergency{}, rng).empty());
}

TEST(Emergency, TwoDisastersSplitRoundRobin) {
  auto s = snapshot({300, 300, 300}, 4);
  destroy(s, 0, 300);
  destroy(s, 2, 300);
  for (std::uint32_t i = 0; i < 20; ++i) {
    const Position base = i % 2 ? kCenters[2] : kCenters[0];
    s.uncovered_users.push_back({UserId{i}, {base.x + i, base.y - i}});
  }
  Rng rng(7);
  const auto cmds = plan_emergency(s, policy::Emergency{}, rng);
  ASSERT_EQ(cmds.size(), 4u);
  const auto by_town = per_town(cmds);
  EXPECT_EQ(by_town.at(0), 2);
  EXPECT_EQ(by_town.at(2), 2);
  EXPECT_EQ(cmds[0].destination, cmds[2].destination);
  EXPECT_EQ(cmds[1].destination, cmds[3].destination);
}

TEST(Emergency, UavsInsideDisasterAreaStay) {
  auto s = snapshot({300, 300, 300}, 3);
  destroy(s, 0, 300);
  station(s, 1, 0);
  s.uncovered_users.push_back({UserId{0}, {10, 10}});
  Rng rng(1);
  const auto cmds = plan_emergency(s, policy::Emergency{}, rng);
  ASSERT_EQ(cmds.size(), 2u);
  for (const auto& c : cmds) EXPECT_NE(c.uav, UavId{1});
}

TEST(Emergency, KOverrideAddsCentroids) {
  auto s = snapshot({300, 300, 300}, 4);
  destroy(s, 0, 300);
  for (std::uint32_t i = 0; i < 10; ++i) {
    s.uncovered_users.push_back({UserId{i}, {i < 5 ? -50.0 : 50.0, 0}});
  }
  Rng rng(1);
  const auto cmds = plan_emergency(s, policy::Emergency{50, 2}, rng);
  std::set<double> xs;
  for (const auto& c : cmds) xs.insert(c.destination.x);
  EXPECT_EQ(xs, (std::set<double>{-50.0, 50.0}));
}

// --- M/M/1 and LSI ---------------------------------------------------------

TownLoadModel model(double lambda, double mean_cpu, double capacity, double d = 1.0) {
  return TownLoadModel::make(TownId{0}, lambda, mean_cpu, capacity, d);
}

TEST(Mm1, WorkedValues) {
  auto m = TownLoadModel::make(TownId{0}, 0.0, 1.0, 10.0, 1.0);
  EXPECT_DOUBLE_EQ(*mm1_response_time(m), 0.1);
  m = model(1000, 90, 100000);
  EXPECT_NEAR(*mm1_response_time(m), 1.0 / (100000.0 / 90.0 - 1000.0), 1e-15);
  EXPECT_NEAR(*mm1_response_time(m), 0.009, 1e-6);
  EXPECT_FALSE(mm1_response_time(model(1200, 90, 100000)));
  EXPECT_FALSE(mm1_response_time(model(1111.12, 90, 100000)));
}

TEST(Mm1, MatchesClosedFormAndIsMonotone) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double mu = 1.0 + 1000.0 * u(gen);
    const double lambda = mu * 0.999 * u(gen);
    auto m = TownLoadModel::make(TownId{0}, lambda, 1.0, mu, 1.0);
    const double expected = 1.0 / (mu - lambda);
    EXPECT_LE(std::abs(*mm1_response_time(m) - expected) / expected, 1e-12);

    auto faster = TownLoadModel::make(TownId{0}, lambda, 1.0, mu * 1.01, 1.0);
    EXPECT_LT(*mm1_response_time(faster), *mm1_response_time(m));
    auto busier = TownLoadModel::make(TownId{0}, lambda + (mu - lambda) * 0.01, 1.0, mu, 1.0);
    EXPECT_GT(*mm1_response_time(busier), *mm1_response_time(m));
  }
}

TEST(RequiredUavs, WorkedValues) {
  EXPECT_EQ(required_uavs(model(300, 90, 0), 50000), 1u);
  EXPECT_NEAR(capacity_deficit(model(300, 90, 0)), 27090.0, 1e-9);
  EXPECT_EQ(required_uavs(model(1200, 90, 0), 50000), 3u);
  EXPECT_NEAR(capacity_deficit(model(1200, 90, 0)), 108090.0, 1e-9);
  EXPECT_EQ(required_uavs(model(300, 90, 100000), 50000), 0u);
}

TEST(RequiredUavs, MonotoneInLoadAndCapacity) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double lambda = 3000.0 * u(gen);
    const double cpu = 1.0 + 200.0 * u(gen);
    const double cap = 200000.0 * u(gen);
    const double d = 0.05 + 5.0 * u(gen);
    const auto base = required_uavs(model(lambda, cpu, cap, d), 50000);
    EXPECT_LE(base, required_uavs(model(lambda * (1.0 + u(gen)), cpu, cap, d), 50000));
    EXPECT_GE(base, required_uavs(model(lambda, cpu, cap * (1.0 + u(gen)), d), 50000));
  }
}

TEST(RequiredUavs, RejectsZeroUavCapacity) {
  EXPECT_THROW(required_uavs(model(300, 90, 0), 0.0), InvalidValue);
}

TEST(Lsi, FillsLargestDeficitFirst) {
  auto s = snapshot({3000, 3000, 3000}, 8);
  destroy(s, 0, 1200);  // needs 3
  destroy(s, 1, 300);   // needs 1
  const auto by_town = per_town(plan_lsi(s));
  EXPECT_EQ(by_town.at(0), 3);
  EXPECT_EQ(by_town.at(1), 1);
  EXPECT_FALSE(by_town.contains(2));
}

TEST(Lsi, ShortSupplyFavoursLargerDeficit) {
  auto s = snapshot({3000, 3000, 3000}, 4);
  destroy(s, 0, 1200);  // needs 3
  destroy(s, 1, 600);   // needs 2
  const auto by_town = per_town(plan_lsi(s));
  EXPECT_EQ(by_town.at(0), 3);
  EXPECT_EQ(by_town.at(1), 1);
}

TEST(Lsi, NoNeedsNoCommands) {
  EXPECT_TRUE(plan_lsi(snapshot({3000, 3000, 3000}, 8)).empty());
}

TEST(Lsi, StationedUavCountsTowardRequirement) {
  auto s = snapshot({3000, 3000, 3000}, 4);
  destroy(s, 0, 1200);
  station(s, 0, 0);
  station(s, 1, 0);
  const auto cmds = plan_lsi(s);
  ASSERT_EQ(cmds.size(), 1u);
  EXPECT_EQ(cmds[0].destination, kCenters[0]);
  EXPECT_NE(cmds[0].uav, UavId{0});
  EXPECT_NE(cmds[0].uav, UavId{1});
}

TEST(Lsi, UsesStrictestDelayInTown) {
  TownView t;
  t.arrival_rate = 300;
  t.mean_cpu_demand = 90;
  t.min_required_delay = 0.5;
  EXPECT_EQ(lsi_model(t).required_delay, 0.5);
  EXPECT_EQ(lsi_model(t).capacity, 0.0);
}

}  // namespace
}  // namespace aircomp
