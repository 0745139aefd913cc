#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "aircomp/domain.hpp"
#include "fixtures.hpp"

namespace aircomp {
namespace {

using testing::make_task;

TEST(Distance, KnownValues) {
  EXPECT_DOUBLE_EQ(horizontal_distance({0, 0}, {0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(horizontal_distance({0, 0}, {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(horizontal_distance({-1, -1}, {2, 3}), 5.0);
}

TEST(Distance, SymmetricAndZeroOnlyForEqualPoints) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> coord(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    const Position a{coord(gen), coord(gen)};
    const Position b{coord(gen), coord(gen)};
    EXPECT_EQ(horizontal_distance(a, b), horizontal_distance(b, a));
    EXPECT_GT(horizontal_distance(a, b), 0.0);
    EXPECT_EQ(horizontal_distance(a, a), 0.0);
  }
}

Uav uav_at(Position p, bool flying = false) {
  Uav u;
  u.position = p;
  u.coverage_radius = 100.0;
  u.capacity = 50000.0;
  u.speed = 20.0;
  if (flying) u.flight_state = Flying{{500, 0}, 10.0};
  return u;
}

User user_at(Position p) {
  User u;
  u.position = p;
  return u;
}

TEST(Coverage, InsideBoundaryAndFlying) {
  EXPECT_TRUE(in_uav_coverage(user_at({0, 0}), uav_at({0, 0})));
  EXPECT_TRUE(in_uav_coverage(user_at({0, 0}), uav_at({100, 0})));
  EXPECT_FALSE(in_uav_coverage(user_at({0, 0}), uav_at({100.0001, 0})));
  EXPECT_FALSE(in_uav_coverage(user_at({0, 0}), uav_at({10, 0}, true)));
}

TEST(Profile, ValidateRejectsNonPositive) {
  EXPECT_NO_THROW(testing::profile(90, 1, 3.33).validate());
  EXPECT_THROW(testing::profile(0, 1, 3.33).validate(), InvalidValue);
  EXPECT_THROW(testing::profile(90, -1, 3.33).validate(), InvalidValue);
  EXPECT_THROW(testing::profile(90, 1, 0).validate(), InvalidValue);
  EXPECT_THROW(testing::profile(std::numeric_limits<double>::infinity(), 1, 1).validate(),
               InvalidValue);
}

TEST(Task, FinishClassifiesInclusively) {
  auto t = make_task(1, 90, 10.0, 1.0);
  EXPECT_EQ(t.finish(10.9), Outcome::Success);
  t = make_task(1, 90, 10.0, 1.0);
  EXPECT_EQ(t.finish(11.0), Outcome::Success);
  t = make_task(1, 90, 10.0, 1.0);
  EXPECT_EQ(t.finish(11.2), Outcome::FailedDeadline);
  EXPECT_EQ(*t.completed_at, 11.2);
}

TEST(Task, ClassificationIsAFunctionOfLatency) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lat(0.0, 3.0);
  std::uniform_real_distribution<double> start(0.0, 4000.0);
  for (int i = 0; i < 10000; ++i) {
    const double budget = 1.0 + (i % 3);
    const double created = start(gen);
    const double latency = lat(gen);
    auto t = make_task(i, 90, created, budget);
    const auto o = t.finish(created + latency);
    EXPECT_EQ(o, (created + latency) - created <= budget ? Outcome::Success
                                                         : Outcome::FailedDeadline);
    EXPECT_GE(*t.completed_at, t.created_at);
  }
}

TEST(Task, NoResourceFailureStampsTime) {
  auto t = make_task(1, 90, 5.0, 1.0);
  t.fail_no_resource(5.0);
  EXPECT_EQ(t.outcome, Outcome::FailedNoResource);
  EXPECT_EQ(*t.completed_at, 5.0);
}

TEST(FifoServer, ServesInOrderAtFullCapacity) {
  FifoServer s(100000.0);
  const auto& a = s.enqueue(make_task(1, 9000, 0.0, 1.0), 0.0, 0.002);
  EXPECT_DOUBLE_EQ(a.service_start, 0.0);
  EXPECT_DOUBLE_EQ(a.service_end, 0.09);
  EXPECT_DOUBLE_EQ(a.completes_at, 0.092);
  const auto& b = s.enqueue(make_task(2, 90, 0.01, 1.0), 0.01, 0.002);
  EXPECT_DOUBLE_EQ(b.service_start, 0.09);
  EXPECT_NEAR(b.service_end, 0.0909, 1e-15);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.front().task.id, TaskId{1});
}

TEST(FifoServer, BacklogCountsRemainingWork) {
  FifoServer s(100000.0);
  EXPECT_EQ(s.backlog_work(0.0), 0.0);
  s.enqueue(make_task(1, 9000, 0.0, 1.0), 0.0, 0.0);
  EXPECT_NEAR(s.backlog_work(0.0), 9000.0, 1e-9);
  EXPECT_NEAR(s.backlog_work(0.045), 4500.0, 1e-9);
  s.pop_front();
  EXPECT_EQ(s.backlog_work(0.2), 0.0);
}

TEST(FifoServer, IdleServerStartsAtNow) {
  FifoServer s(1000.0);
  s.enqueue(make_task(1, 10, 0.0, 1.0), 0.0, 0.0);
  s.pop_front();
  const auto& e = s.enqueue(make_task(2, 10, 5.0, 1.0), 5.0, 0.0);
  EXPECT_DOUBLE_EQ(e.service_start, 5.0);
}

TEST(FifoServer, DrainEmptiesAndBumpsEpoch) {
  FifoServer s(1000.0);
  for (int i = 0; i < 3; ++i) s.enqueue(make_task(i, 10, 0.0, 1.0), 0.0, 0.0);
  const auto before = s.epoch();
  const auto drained = s.drain();
  EXPECT_EQ(drained.size(), 3u);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.epoch(), before + 1);
  EXPECT_EQ(s.backlog_work(0.0), 0.0);
}

TEST(Outcome, Names) {
  EXPECT_STREQ(to_string(Outcome::Success), "success");
  EXPECT_STREQ(to_string(Outcome::FailedNoResource), "failed_no_resource");
}

}  // namespace
}  // namespace aircomp
