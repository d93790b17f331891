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

#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "hilqe/skf.hpp"
#include "support.hpp"

using namespace hilqe;

namespace
{
    // Constant drift [1, 1] with a wall at x0 = 1 that flips and halves x1.
    // Flow Jacobians of a constant field are identity, so only the saltation matrix acts.
    std::shared_ptr<const HybridSystem> drift_wall()
    {
        Mode m{ModeId{0}, "drift", [](double, const Vector &, const Vector &) { return Vector(Vector::Ones(2)); }, {}};
        Matrix R(2, 2);
        R << 1, 0, 0, -0.5;
        Transition wall;
        wall.from = wall.to = ModeId{0};
        wall.name = "wall";
        wall.guard = [](double, const Vector &x) { return 1.0 - x(0); };
        wall.guard_gradient = [](double, const Vector &) {
            Vector g(2);
            g << -1.0, 0.0;
            return GuardGradient{0.0, g};
        };
        wall.reset = [R](double, const Vector &x) -> Vector { return R * x; };
        wall.reset_jacobian = [R](double, const Vector &) { return ResetJacobian{Vector::Zero(2), R}; };
        return std::make_shared<const HybridSystem>(2, std::vector<Mode>{m}, std::vector<Transition>{wall});
    }
} // namespace

TEST(SkfPredict, BallFlightUsesBallisticJacobian)
{
    const HybridModel m = make_ball();
    const GaussianBelief b{{ball::kFlight, ball_default_initial_state(), 0.0}, Matrix::Identity(4, 4)};
    const Matrix W = 0.001 * Matrix::Identity(4, 4);
    const PredictResult r = skf_predict(*m.system, b, Vector(), 0.01, W);
    ASSERT_FALSE(r.event);
    Matrix A = Matrix::Identity(4, 4);
    A(0, 2) = A(1, 3) = 0.01;
    EXPECT_LE((r.belief.P - (A * A.transpose() + W)).norm(), 1e-14);
    EXPECT_LE((r.belief.mean.x - analytic_ball_flow(b.mean.x, 0.01)).norm(), 1e-14);
}

TEST(SkfPredict, EventWithIdentityFlowIsSaltationSandwich)
{
    const auto sys = drift_wall();
    Vector x(2);
    x << 0.995, 0.3;
    Matrix P(2, 2);
    P << 1.0, 0.2, 0.2, 0.5;
    const Matrix W = 0.01 * Matrix::Identity(2, 2);
    const PredictResult r = skf_predict(*sys, {{ModeId{0}, x, 0.0}, P}, Vector(), 0.01, W);
    ASSERT_TRUE(r.event);
    Matrix Xi(2, 2);
    Xi << 1.0, 0.0, 1.5, -0.5;
    EXPECT_LE((r.event->salt - Xi).norm(), 1e-12);
    EXPECT_LE((r.belief.P - (Xi * P * Xi.transpose() + W)).norm(), 1e-12);
}

TEST(SkfPredict, NoNoiseIdentityFlowKeepsCovariance)
{
    const auto sys = drift_wall();
    Vector x(2);
    x << -3.0, 0.0;
    Matrix P(2, 2);
    P << 2.0, 0.1, 0.1, 1.0;
    const PredictResult r = skf_predict(*sys, {{ModeId{0}, x, 0.0}, P}, Vector(), 0.01, Matrix::Zero(2, 2));
    EXPECT_FALSE(r.event);
    EXPECT_LE((r.belief.P - P).norm(), 1e-15);
}

TEST(SkfPredict, BallImpactChainsSplitJacobians)
{
    const HybridModel m = make_ball();
    const Vector x = analytic_ball_flow(ball_default_initial_state(), 0.17);
    const GaussianBelief b{{ball::kFlight, x, 0.17}, Matrix::Identity(4, 4)};
    const PredictResult r = skf_predict(*m.system, b, Vector(), 0.01, Matrix::Zero(4, 4));
    ASSERT_TRUE(r.event);
    const double tau = r.event->t_event - 0.17;
    Matrix A1 = Matrix::Identity(4, 4), A2 = Matrix::Identity(4, 4);
    A1(0, 2) = A1(1, 3) = tau;
    A2(0, 2) = A2(1, 3) = 0.01 - tau;
    const Matrix F = A2 * r.event->salt * A1;
    EXPECT_LE((r.belief.P - F * F.transpose()).norm(), 1e-10);
}

TEST(SkfUpdate, ScalarKalmanAlgebra)
{
    MeasurementModel h = oracle::linear_measurement(Matrix::Identity(1, 1));
    const GaussianBelief b{{ModeId{0}, Vector::Zero(1), 0.0}, Matrix::Constant(1, 1, 2.0)};
    const GaussianBelief u = skf_update(b, Vector::Constant(1, 3.0), h, Matrix::Identity(1, 1));
    EXPECT_NEAR(u.mean.x(0), 2.0, 1e-15);
    EXPECT_NEAR(u.P(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(SkfUpdate, SingularInnovationRejected)
{
    MeasurementModel h = oracle::linear_measurement(Matrix::Identity(1, 1));
    const GaussianBelief b{{ModeId{0}, Vector::Zero(1), 0.0}, Matrix::Zero(1, 1)};
    try
    {
        skf_update(b, Vector::Zero(1), h, Matrix::Zero(1, 1));
        FAIL() << "expected SingularInnovationCovariance";
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::SingularInnovationCovariance);
    }
}

TEST(RunSkf, MatchesTextbookKalmanOnLinearChain)
{
    const EstimationProblem p = oracle::lq_chain_problem(100);
    const Matrix V = p.P_v.inverse(), W = p.P_w.inverse(), P0 = p.P_x.inverse();
    const SkfRun run = run_skf(p, V, W, P0);
    const auto kf = oracle::textbook_kalman(p, V, W, P0);
    ASSERT_EQ(run.beliefs.size(), kf.size());
    for (std::size_t i = 0; i < kf.size(); ++i)
    {
        EXPECT_LE((run.beliefs[i].mean.x - kf[i].mean).lpNorm<Eigen::Infinity>(), 1e-10);
        EXPECT_LE((run.beliefs[i].P - kf[i].P).lpNorm<Eigen::Infinity>(), 1e-10);
        EXPECT_LE((run.beliefs[i].P - run.beliefs[i].P.transpose()).norm(), 0.0);
    }
    EXPECT_EQ(run.trajectory(p.dt).samples.size(), kf.size());
}

TEST(RunSkf, BeliefCsvHasCovarianceColumns)
{
    const EstimationProblem p = oracle::lq_chain_problem(3);
    const SkfRun run = run_skf(p, p.P_v.inverse(), p.P_w.inverse(), p.P_x.inverse());
    std::ostringstream with, without;
    write_beliefs_csv(with, run.beliefs);
    write_beliefs_csv(without, run.beliefs, false);
    const std::string h1 = with.str().substr(0, with.str().find('\n'));
    const std::string h2 = without.str().substr(0, without.str().find('\n'));
    EXPECT_EQ(std::count(h1.begin(), h1.end(), ','), 2 + 4 + 16 - 1);
    EXPECT_EQ(std::count(h2.begin(), h2.end(), ','), 2 + 4 - 1);
}
