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

// Shared oracles for the unit and acceptance tests.

#ifndef HILQE_TESTS_SUPPORT_HPP
#define HILQE_TESTS_SUPPORT_HPP

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hilqe/estimator.hpp"
#include "hilqe/hybrid_system.hpp"
#include "hilqe/models.hpp"
#include "hilqe/skf.hpp"

namespace hilqe::oracle
{
    /// One mode, no transitions, xdot = Ac x.
    inline std::shared_ptr<const HybridSystem> linear_system(const Matrix &Ac)
    {
        Mode m;
        m.id = ModeId{0};
        m.name = "linear";
        m.field = [Ac](double, const Vector &x, const Vector &) -> Vector { return Ac * x; };
        m.jacobian = [Ac](double, const Vector &, const Vector &) -> Matrix { return Ac; };
        return std::make_shared<const HybridSystem>(static_cast<int>(Ac.rows()), std::vector<Mode>{m},
                                                    std::vector<Transition>{});
    }

    inline MeasurementModel linear_measurement(const Matrix &H)
    {
        return {static_cast<int>(H.rows()), [H](const Vector &x) -> Vector { return H * x; },
                [H](const Vector &) -> Matrix { return H; }};
    }

    /// Discrete step matrix of a linear single-mode system.
    inline Matrix step_matrix(const HybridSystem &sys, double dt)
    {
        return rk4_step_jacobian(sys, ModeId{0}, 0.0, Vector::Zero(sys.dim()), Vector(), dt);
    }

    /// Two damped oscillators observed through their positions; N steps of noisy data.
    inline EstimationProblem lq_chain_problem(int N, unsigned seed = 3)
    {
        Matrix Ac(4, 4);
        Ac << 0, 0, 1, 0, 0, 0, 0, 1, -1, 0, -0.1, 0, 0, -2, 0, -0.1;
        Matrix H = Matrix::Zero(2, 4);
        H(0, 0) = 1;
        H(1, 1) = 1;
        EstimationProblem p;
        p.sys = linear_system(Ac);
        p.meas = linear_measurement(H);
        p.dt = 0.05;
        p.P_v = Matrix::Identity(2, 2) * 4.0;
        p.P_w = Matrix::Identity(4, 4) * 10.0;
        p.P_x = Matrix::Identity(4, 4) * 100.0;
        p.x0_prior = Vector::Zero(4);
        p.x0_prior << 1.0, -0.5, 0.2, 0.3;
        p.mode0 = ModeId{0};

        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        const Matrix Phi = step_matrix(*p.sys, p.dt);
        Vector x = p.x0_prior;
        for (int i = 0; i < N; ++i)
        {
            Vector w(4);
            for (int j = 0; j < 4; ++j)
                w(j) = std::sqrt(0.1) * nd(rng);
            x = Phi * x + w;
            Vector y = H * x;
            for (int j = 0; j < 2; ++j)
                y(j) += 0.5 * nd(rng);
            p.Y.push_back(y);
        }
        return p;
    }

    /// Minimizer of the batch cost for a linear single-mode problem, solved as
    /// one dense set of normal equations in the stacked states.
    inline std::vector<Vector> normal_equations_states(const EstimationProblem &p)
    {
        const int n = p.sys->dim();
        const int N = p.horizon();
        const Matrix Phi = step_matrix(*p.sys, p.dt);
        const Matrix H = p.meas.H(Vector::Zero(n));
        const int dim = n * (N + 1);
        Matrix G = Matrix::Zero(dim, dim);
        Vector b = Vector::Zero(dim);
        G.block(0, 0, n, n) += p.P_x;
        b.segment(0, n) += p.P_x * p.x0_prior;
        for (int i = 1; i <= N; ++i)
        {
            G.block(n * i, n * i, n, n) += H.transpose() * p.P_v * H;
            b.segment(n * i, n) += H.transpose() * p.P_v * p.Y[static_cast<std::size_t>(i - 1)];
        }
        for (int i = 0; i < N; ++i)
        {
            // r = x_{i+1} - Phi x_i
            Matrix D = Matrix::Zero(n, dim);
            D.block(0, n * i, n, n) = -Phi;
            D.block(0, n * (i + 1), n, n) = Matrix::Identity(n, n);
            G += D.transpose() * p.P_w * D;
        }
        const Vector z = G.ldlt().solve(b);
        std::vector<Vector> X;
        for (int i = 0; i <= N; ++i)
            X.push_back(z.segment(n * i, n));
        return X;
    }

    struct KfBelief
    {
        Vector mean;
        Matrix P;
    };

    /// Plain Kalman filter in the standard (non-Joseph) form.
    inline std::vector<KfBelief> textbook_kalman(const EstimationProblem &p, const Matrix &V, const Matrix &W,
                                                       const Matrix &P0)
    {
        const int n = p.sys->dim();
        const Matrix Phi = step_matrix(*p.sys, p.dt);
        const Matrix H = p.meas.H(Vector::Zero(n));
        std::vector<KfBelief> out;
        KfBelief b{p.x0_prior, P0};
        out.push_back(b);
        for (const Vector &y : p.Y)
        {
            b.mean = Phi * b.mean;
            b.P = Phi * b.P * Phi.transpose() + W;
            const Matrix S = H * b.P * H.transpose() + V;
            const Matrix K = b.P * H.transpose() * S.inverse();
            b.mean += K * (y - H * b.mean);
            b.P = (Matrix::Identity(n, n) - K * H) * b.P;
            out.push_back(b);
        }
        return out;
    }

    struct OrderFit
    {
        double order = 0.0;
        std::vector<double> scales;
        std::vector<double> residuals;
        int events = 0;
    };

    /// Noise-free flow over `steps` samples and its first-order linearization
    /// chained through pre-event flow, the saltation matrix and post-event flow.
    inline HybridTrajectory through_event_flow(const HybridSystem &sys, const HybridState &s, double dt, int steps,
                                               Matrix *jacobian = nullptr)
    {
        const std::vector<Vector> W(static_cast<std::size_t>(steps), Vector::Zero(sys.dim()));
        HybridTrajectory tr = simulate(sys, s, {}, W, dt, steps);
        if (jacobian)
        {
            Matrix J = Matrix::Identity(sys.dim(), sys.dim());
            for (int i = 0; i < steps; ++i)
            {
                const HybridState &si = tr.samples[static_cast<std::size_t>(i)];
                if (const EventRecord *ev = tr.event_at_step(i))
                {
                    const double tau = ev->t_event - si.t;
                    Matrix pre = Matrix::Identity(sys.dim(), sys.dim());
                    if (tau > 0.0)
                        pre = rk4_step_jacobian(sys, ev->from, si.t, si.x, Vector(), tau);
                    Matrix post = Matrix::Identity(sys.dim(), sys.dim());
                    if (dt - tau > 0.0)
                        post = rk4_step_jacobian(sys, ev->to, ev->t_event, ev->x_plus, Vector(), dt - tau);
                    J = post * ev->salt * pre * J;
                }
                else
                {
                    J = rk4_step_jacobian(sys, si.mode, si.t, si.x, Vector(), dt) * J;
                }
            }
            *jacobian = J;
        }
        return tr;
    }

    /// Slope of log residual against log perturbation size for |delta| in `scales`.
    inline OrderFit saltation_order(const HybridSystem &sys, const HybridState &s, double dt, int steps,
                                    const Vector &direction, const std::vector<double> &scales = {1e-4, 1e-5, 1e-6})
    {
        OrderFit fit;
        Matrix J;
        const HybridTrajectory base = through_event_flow(sys, s, dt, steps, &J);
        fit.events = static_cast<int>(base.events.size());
        const Vector d = direction.normalized();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (double h : scales)
        {
            HybridState p = s;
            p.x += h * d;
            const HybridTrajectory pert = through_event_flow(sys, p, dt, steps);
            const double r = (pert.samples.back().x - base.samples.back().x - J * (h * d)).norm();
            fit.scales.push_back(h);
            fit.residuals.push_back(r);
            const double lx = std::log(h), ly = std::log(r);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double k = static_cast<double>(scales.size());
        fit.order = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        return fit;
    }

    /// Ball state shortly before its first impact and a generic perturbation direction.
    inline HybridState ball_pre_impact_state() { return {ball::kFlight, ball_default_initial_state(), 0.0}; }

    /// Hopper in flight with some forward and pitch velocity, ~50 ms above touchdown.
    inline HybridState aslip_pre_touchdown_state()
    {
        const HybridModel model = make_aslip();
        Vector x = aslip_default_initial_state();
        x(aslip::VXB) = 0.2;
        x(aslip::OMEGA) = 0.1;
        const std::vector<Vector> W(400, Vector::Zero(aslip::kDim));
        const HybridTrajectory tr = simulate(*model.system, {aslip::kFlight, x, 0.0}, {}, W, 1e-3, 400);
        return tr.samples.back();
    }

    inline Vector generic_direction(int n, unsigned seed = 11)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.5, 1.0);
        Vector d(n);
        for (int i = 0; i < n; ++i)
            d(i) = (i % 2 ? -1.0 : 1.0) * u(rng);
        return d;
    }
} // namespace hilqe::oracle

#endif // HILQE_TESTS_SUPPORT_HPP
