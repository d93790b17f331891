/*
 Copyright 2026 The HiLQE Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <cmath>

#include <gtest/gtest.h>

#include "hilqe/models.hpp"
#include "support.hpp"

using namespace hilqe;

namespace
{
    Vector vec(std::initializer_list<double> v)
    {
        Vector out(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double x : v)
            out(i++) = x;
        return out;
    }

    HybridTrajectory run(const HybridModel &m, const HybridState &s, double dt, int steps)
    {
        const std::vector<Vector> W(static_cast<std::size_t>(steps), Vector::Zero(m.system->dim()));
        return simulate(*m.system, s, {}, W, dt, steps);
    }
} // namespace

TEST(Ball, GuardResetAndMeasurement)
{
    const HybridModel m = make_ball();
    const Transition &tr = m.system->transitions()[0];
    EXPECT_EQ(tr.from, ball::kFlight);
    EXPECT_EQ(tr.to, ball::kFlight);
    EXPECT_DOUBLE_EQ(tr.guard(0.0, vec({0, 1, 0.5, -5})), 1.0);
    EXPECT_EQ(tr.reset(0.0, vec({0, 0, 0.5, -5})), vec({0, 0, 0.5, 4}));
    EXPECT_EQ(m.measurement.h(vec({0.3, 0.7, 1, 2})), vec({0.3, 0.7}));
    EXPECT_EQ(m.measurement.m, 2);
    Matrix H = Matrix::Zero(2, 4);
    H(0, 0) = H(1, 1) = 1.0;
    EXPECT_EQ(m.measurement.H(vec({0.3, 0.7, 1, 2})), H);
}

TEST(Ball, ImpactRemovesKineticEnergyOfVerticalMotion)
{
    const HybridModel m = make_ball();
    const HybridTrajectory tr = run(m, {ball::kFlight, ball_default_initial_state(), 0.0}, 0.01, 100);
    ASSERT_EQ(tr.events.size(), 1u);
    const EventRecord &e = tr.events[0];
    EXPECT_NEAR(0.5 * e.x_plus(ball::VY) * e.x_plus(ball::VY), 0.64 * 0.5 * e.x_minus(ball::VY) * e.x_minus(ball::VY),
                1e-10);
    EXPECT_EQ(e.x_plus(ball::VX), e.x_minus(ball::VX));
    // energy after the impact stays constant again
    const double e_after = ball_energy(tr.samples[static_cast<std::size_t>(e.step_index) + 1].x);
    for (std::size_t i = static_cast<std::size_t>(e.step_index) + 1; i < tr.samples.size(); ++i)
        EXPECT_NEAR(ball_energy(tr.samples[i].x), e_after, 1e-8);
}

TEST(Ball, RejectsBadParameters)
{
    EXPECT_THROW(make_ball({1.5, 9.8}), Error);
    EXPECT_THROW(make_ball({0.8, -1.0}), Error);
}

TEST(Aslip, DefaultsAndInitialGuard)
{
    const AslipParams p;
    EXPECT_EQ(p.body_mass, 1.0);
    EXPECT_EQ(p.gravity, 9.8);
    EXPECT_EQ(p.hip_offset, 0.5);
    EXPECT_EQ(p.body_inertia, 1.0);
    EXPECT_EQ(p.hip_stiffness, 100.0);
    EXPECT_EQ(p.leg_stiffness, 100.0);
    EXPECT_EQ(p.leg_rest_length, 1.0);
    EXPECT_EQ(p.hip_rest_angle, 0.0);

    const HybridModel m = make_aslip();
    const Vector q0 = aslip_default_initial_state();
    EXPECT_EQ(q0, vec({0, 2.5, 0, 0, 1, 0, 0, 0}));
    for (std::size_t idx : m.system->outgoing(aslip::kFlight))
    {
        const Transition &tr = m.system->transitions()[idx];
        EXPECT_EQ(tr.name, "touchdown");
        EXPECT_DOUBLE_EQ(tr.guard(0.0, q0), 1.0);
    }
    EXPECT_NEAR(aslip_leg_length(q0, p), p.leg_rest_length, 1e-15);
    EXPECT_EQ(m.measurement.h(q0), q0.head(5));
}

TEST(Aslip, StanceAtRestIsGravityOnly)
{
    const AslipParams p;
    // Upright, leg at rest length, zero velocities: only gravity acts on the body.
    Vector q = vec({0, 1.5, 0, 0, 0, 0, 0, 0});
    ASSERT_NEAR(aslip_leg_length(q, p), 1.0, 1e-15);
    const Vector f = aslip_stance_field(q, p);
    EXPECT_NEAR(f(aslip::VYB), -p.gravity, 1e-12);
    EXPECT_NEAR(f(aslip::VXB), 0.0, 1e-12);
    EXPECT_NEAR(f(aslip::OMEGA), 0.0, 1e-12);
    EXPECT_EQ(f(aslip::XT), 0.0);
    EXPECT_EQ(f(aslip::YT), 0.0);
}

TEST(Aslip, FlightIsBallisticWithConstantPitchRate)
{
    const HybridModel m = make_aslip();
    Vector q = aslip_default_initial_state();
    q(aslip::VXB) = 0.3;
    q(aslip::VYB) = 1.0;
    q(aslip::OMEGA) = 0.2;
    const HybridTrajectory tr = run(m, {aslip::kFlight, q, 0.0}, 1e-3, 300);
    ASSERT_TRUE(tr.events.empty());
    for (std::size_t i = 0; i < tr.samples.size(); i += 50)
    {
        const double t = tr.samples[i].t;
        const Vector &x = tr.samples[i].x;
        EXPECT_NEAR(x(aslip::XB), 0.3 * t, 1e-8);
        EXPECT_NEAR(x(aslip::YB), 2.5 + t - 4.9 * t * t, 1e-8);
        EXPECT_NEAR(x(aslip::OMEGA), 0.2, 1e-12);
        EXPECT_NEAR(x(aslip::THETA), 0.2 * t, 1e-8);
        // toe stays at rest length from the hip
        EXPECT_NEAR(aslip_leg_length(x, AslipParams{}), 1.0, 1e-6);
    }
}

TEST(Aslip, StanceConservesEnergy)
{
    const HybridModel m = make_aslip();
    const AslipParams p;
    const HybridTrajectory tr = run(m, oracle::aslip_pre_touchdown_state(), 1e-3, 600);
    ASSERT_GE(tr.events.size(), 2u);
    const int td = tr.events[0].step_index, lo = tr.events[1].step_index;
    ASSERT_EQ(tr.events[0].to, aslip::kStance);
    const double e0 = aslip_energy(tr.samples[static_cast<std::size_t>(td) + 1].x, aslip::kStance, p);
    double worst = 0.0;
    for (int i = td + 1; i <= lo; ++i)
        worst = std::max(worst, std::abs(aslip_energy(tr.samples[static_cast<std::size_t>(i)].x, aslip::kStance, p) - e0));
    EXPECT_LE(worst, 1e-6);
}

TEST(Aslip, EventsKeepMeasurementsContinuousAndAreTransverse)
{
    const HybridModel m = make_aslip();
    const HybridTrajectory tr = run(m, oracle::aslip_pre_touchdown_state(), 1e-3, 600);
    ASSERT_GE(tr.events.size(), 2u);
    for (const EventRecord &e : tr.events)
    {
        EXPECT_LE((m.measurement.h(e.x_minus) - m.measurement.h(e.x_plus)).norm(), 1e-12);
        const Transition &t = m.system->transitions()[e.transition];
        const GuardGradient g = t.guard_gradient(e.t_event, e.x_minus);
        const double rate = g.dt + g.dx.dot(m.system->field(e.from, e.t_event, e.x_minus, Vector()));
        EXPECT_GT(std::abs(rate), 1e-3);
    }
    EXPECT_EQ(tr.events[1].from, aslip::kStance);
    EXPECT_EQ(m.system->transitions()[tr.events[1].transition].name, "liftoff");
    EXPECT_NEAR(aslip_leg_length(tr.events[1].x_minus, AslipParams{}), 1.0, 1e-9);
}

TEST(Aslip, NoiseFreeDropHopsTwiceInTwoAndAHalfSeconds)
{
    const HybridModel m = make_aslip();
    const HybridTrajectory tr = run(m, {aslip::kFlight, aslip_default_initial_state(), 0.0}, 1e-3, 2500);
    ASSERT_EQ(tr.events.size(), 4u);
    EXPECT_EQ(tr.events[0].to, aslip::kStance);
    EXPECT_EQ(tr.events[1].to, aslip::kFlight);
}

TEST(Aslip, RejectsBadParameters)
{
    AslipParams p;
    p.leg_stiffness = -1.0;
    EXPECT_THROW(make_aslip(p), Error);
}
