#include "gantrylab/kinematics.hpp"

#include <gtest/gtest.h>

#include <random>

namespace gantrylab {
namespace {

// Time-stepped integration of the pulse-rate profile: accelerate until the
// peak rate or until the remaining pulses only just allow stopping, then
// cruise, then brake to rest. Independent of the closed form.
double integrated_travel_time(double pulses, double peak, double accel, double dt = 2e-6) {
  if (pulses <= 0) return 0.0;
  double pos = 0.0, rate = 0.0, t = 0.0;
  bool braking = false;
  // runs until the head is at rest again; position ends within rate*dt of the target
  for (;;) {
    const double stopping = rate * rate / (2.0 * accel);
    braking = braking || stopping + rate * dt >= pulses - pos;
    const double next =
        braking ? std::max(rate - accel * dt, 0.0) : std::min(rate + accel * dt, peak);
    pos += 0.5 * (rate + next) * dt;
    rate = next;
    t += dt;
    if (braking && rate == 0.0) break;
  }
  return t;
}

TEST(AxisSpeed, MatchesPrintedCoefficient) {
  const AxisConfig cfg;
  EXPECT_DOUBLE_EQ(axis_speed(4000, SteppingMode::Full, cfg), 420.0);
  EXPECT_DOUBLE_EQ(axis_speed(3000, SteppingMode::Half, cfg), 157.5);
  EXPECT_EQ(axis_speed(0, SteppingMode::Full, cfg), 0.0);
}

TEST(AxisSpeed, RejectsNegativeRate) {
  EXPECT_THROW(axis_speed(-1.0, SteppingMode::Full, AxisConfig{}), DomainError);
}

TEST(AxisSpeed, LinearInPulseRate) {
  const AxisConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 4000.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    for (auto mode : {SteppingMode::Full, SteppingMode::Half}) {
      EXPECT_NEAR(axis_speed(a + b, mode, cfg),
                  axis_speed(a, mode, cfg) + axis_speed(b, mode, cfg), 1e-9);
    }
  }
}

TEST(PulsesForDistance, RoundsToNearest) {
  const AxisConfig cfg;
  EXPECT_EQ(pulses_for_distance(105.0, SteppingMode::Full, cfg), 1000);
  EXPECT_EQ(pulses_for_distance(105.0, SteppingMode::Half, cfg), 2000);
  EXPECT_EQ(pulses_for_distance(0.0, SteppingMode::Half, cfg), 0);
  EXPECT_EQ(pulses_for_distance(0.0525 * 2.4, SteppingMode::Half, cfg), 2);
  EXPECT_EQ(pulses_for_distance(0.0525 * 2.6, SteppingMode::Half, cfg), 3);
  EXPECT_THROW(pulses_for_distance(-0.1, SteppingMode::Full, cfg), DomainError);
}

TEST(AxisTravelTime, TrapezoidAndTriangleExamples) {
  const MotionProfile prod;  // 3000 p/s, 10000 p/s^2
  EXPECT_NEAR(axis_travel_time(2000, prod), 0.6 + 1100.0 / 3000.0, 1e-12);
  EXPECT_NEAR(axis_travel_time(2000, prod), 0.9667, 5e-5);
  EXPECT_NEAR(axis_travel_time(200, prod), 2.0 * std::sqrt(2.0 * 100.0 / 10000.0), 1e-12);
  EXPECT_NEAR(axis_travel_time(200, prod), 0.2828, 5e-5);
  EXPECT_EQ(axis_travel_time(0, prod), 0.0);
  EXPECT_THROW(axis_travel_time(-1, prod), DomainError);
}

TEST(AxisTravelTime, AgreesWithIntegrationOracle) {
  const MotionProfile prod;
  for (std::int64_t n : {1, 50, 200, 899, 900, 901, 2000, 10000}) {
    EXPECT_NEAR(axis_travel_time(n, prod), integrated_travel_time(n, 3000, 10000), 1e-4)
        << "pulses=" << n;
  }
  MotionProfile fast{4000.0, 25000.0};
  for (std::int64_t n : {10, 640, 5000})
    EXPECT_NEAR(axis_travel_time(n, fast), integrated_travel_time(n, 4000, 25000), 1e-4);
}

TEST(AxisTravelTime, ClosedFormAboveRampThreshold) {
  const MotionProfile p;
  const double ramp = p.peak_pulse_rate * p.peak_pulse_rate / (2 * p.acceleration);
  for (std::int64_t n = static_cast<std::int64_t>(2 * ramp); n < 20000; n += 373)
    EXPECT_NEAR(axis_travel_time(n, p), n / p.peak_pulse_rate + p.peak_pulse_rate / p.acceleration,
                1e-12);
}

TEST(AxisTravelTime, MonotoneInPulsesAndAcceleration) {
  MotionProfile p;
  double prev = 0.0;
  for (std::int64_t n = 0; n < 5000; n += 7) {
    const double t = axis_travel_time(n, p);
    EXPECT_GE(t, prev);
    prev = t;
  }
  for (std::int64_t n : {10, 500, 900, 3000}) {
    double last = std::numeric_limits<double>::infinity();
    for (double a = 1000; a <= 100000; a *= 1.7) {
      const double t = axis_travel_time(n, MotionProfile{3000, a});
      EXPECT_LE(t, last + 1e-15);
      last = t;
    }
  }
}

TEST(MotionProfile, Validation) {
  EXPECT_NO_THROW(MotionProfile{}.validate());
  EXPECT_THROW((MotionProfile{4001, 1000}.validate()), DomainError);
  EXPECT_THROW((MotionProfile{0, 1000}.validate()), DomainError);
  EXPECT_THROW((MotionProfile{3000, 0}.validate()), DomainError);
  EXPECT_THROW((AxisConfig{105, 0.005, 0.0, 100}.validate()), DomainError);
}

CameraPose at(double x, double y, double z) {
  CameraPose p;
  p.position = {x, y, z};
  return p;
}

TEST(MoveTime, Examples) {
  MotionContext seq;  // half steps, 3000/10000, sequential
  MotionContext par = seq;
  par.parallel = true;
  const auto a = at(100, 100, 100);
  EXPECT_EQ(move_time(a, a, seq), 0.0);

  const auto b = at(205, 100, 100);
  EXPECT_EQ(move_time(a, b, seq), move_time(a, b, par));

  const auto c = at(205, 205, 205);
  const double one = axis_travel_time(2000, MotionProfile{});
  EXPECT_NEAR(move_time(a, c, seq), 3 * one, 1e-12);
  EXPECT_NEAR(move_time(a, c, par), one, 1e-12);
  EXPECT_NEAR(move_time(a, c, seq), 3 * 0.9667, 3 * 5e-5);  // 0.9667 is rounded to 4 places
}

TEST(MoveTime, ParallelNeverSlower) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0, 1150), uy(0, 840), uz(0, 718);
  MotionContext seq, par;
  par.parallel = true;
  for (int i = 0; i < 500; ++i) {
    auto a = at(ux(rng), uy(rng), uz(rng));
    auto b = at(ux(rng), uy(rng), uz(rng));
    EXPECT_LE(move_time(a, b, par), move_time(a, b, seq));
    // only one axis moving -> equal
    auto c = a;
    c.position.y = uy(rng);
    EXPECT_EQ(move_time(a, c, par), move_time(a, c, seq));
  }
}

TEST(MoveTime, OutOfLimitsIsBoundsError) {
  MotionContext ctx;
  EXPECT_THROW(move_time(at(0, 0, 0), at(1150.5, 0, 0), ctx), BoundsError);
  EXPECT_THROW(move_time(at(-1, 0, 0), at(0, 0, 0), ctx), BoundsError);
  EXPECT_THROW(move_time(at(0, 0, 0), at(0, 840.1, 0), ctx), BoundsError);
  EXPECT_THROW(move_time(at(0, 0, 718.1), at(0, 0, 0), ctx), BoundsError);
  EXPECT_NO_THROW(move_time(at(0, 0, 0), at(1150, 840, 718), ctx));
}

TEST(MoveTime, PanTiltOverheadHook) {
  MotionContext ctx;
  ctx.pan_tilt_overhead = 0.25;
  auto a = at(10, 10, 10);
  auto b = a;
  b.pan = 45;
  EXPECT_DOUBLE_EQ(move_time(a, b, ctx), 0.25);
  EXPECT_DOUBLE_EQ(move_time(a, a, ctx), 0.0);
}

}  // namespace
}  // namespace gantrylab
