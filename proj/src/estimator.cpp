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

#include "hilqe/estimator.hpp"
#include "hilqe/trajectory_io.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace hilqe
{
    namespace
    {
        bool is_spd(const Matrix &m)
        {
            if (m.rows() != m.cols() || m.rows() == 0)
                return false;
            if (!m.isApprox(m.transpose(), 1e-12))
                return false;
            Eigen::LLT<Matrix> llt(m);
            return llt.info() == Eigen::Success;
        }

        double weighted_sq(const Vector &v, const Matrix &P) { return v.dot(P * v); }
    } // namespace

    void EstimationProblem::validate() const
    {
        if (!sys)
            throw Error(ErrorCode::ParameterError, "estimation problem has no system");
        const int n = sys->dim();
        if (Y.empty())
            throw Error(ErrorCode::ParameterError, "need at least one measurement");
        if (!(dt > 0.0))
            throw Error(ErrorCode::ParameterError, "dt must be positive");
        if (!U.empty() && U.size() < Y.size())
            throw Error(ErrorCode::ParameterError, "input sequence shorter than the horizon");
        if (x0_prior.size() != n)
            throw Error(ErrorCode::ParameterError, "prior mean has wrong dimension");
        for (const Vector &y : Y)
            if (y.size() != meas.m)
                throw Error(ErrorCode::ParameterError, "measurement has wrong dimension");
        if (P_v.rows() != meas.m || !is_spd(P_v))
            throw Error(ErrorCode::ParameterError, "P_v must be symmetric positive definite of size m");
        if (P_w.rows() != n || !is_spd(P_w))
            throw Error(ErrorCode::ParameterError, "P_w must be symmetric positive definite of size n");
        if (P_x.rows() != n || !is_spd(P_x))
            throw Error(ErrorCode::ParameterError, "P_x must be symmetric positive definite of size n");
        if (!sys->has_mode(mode0))
            throw Error(ErrorCode::ParameterError, "initial mode is not a mode of the system");
    }

    double total_cost(const EstimationProblem &prob, const std::vector<Vector> &X, const std::vector<Vector> &W)
    {
        const int N = prob.horizon();
        if (static_cast<int>(X.size()) != N + 1 || static_cast<int>(W.size()) != N)
            throw Error(ErrorCode::ParameterError, "X must hold N+1 states and W must hold N noises");

        double J = 0.5 * weighted_sq(X[0] - prob.x0_prior, prob.P_x);
        for (int i = 1; i <= N; ++i)
        {
            const Vector r = prob.meas.h(X[i]) - prob.Y[i - 1];
            J += 0.5 * weighted_sq(r, prob.P_v) + 0.5 * weighted_sq(W[i - 1], prob.P_w);
        }
        return J;
    }

    double total_cost(const EstimationProblem &prob, const SolverIterate &it)
    {
        std::vector<Vector> X;
        X.reserve(it.traj.samples.size());
        for (const HybridState &s : it.traj.samples)
            X.push_back(s.x);
        return total_cost(prob, X, it.W);
    }

    CostGradients stage_grad(const EstimationProblem &prob, const Vector &x, const Vector &w, const Vector &y)
    {
        const int n = static_cast<int>(x.size());
        const Matrix H = prob.meas.H(x);
        const Vector r = prob.meas.h(x) - y;
        CostGradients g;
        // Gauss-Newton: curvature of h is dropped.
        g.l_x = H.transpose() * prob.P_v * r;
        g.l_xx = H.transpose() * prob.P_v * H;
        g.l_w = prob.P_w * w;
        g.l_ww = prob.P_w;
        g.l_xw = Matrix::Zero(n, n);
        return g;
    }

    CostGradients init_grad(const EstimationProblem &prob, const Vector &x0, const Vector &w0)
    {
        const int n = static_cast<int>(x0.size());
        CostGradients g;
        g.l_x = prob.P_x * (x0 - prob.x0_prior);
        g.l_xx = prob.P_x;
        g.l_w = prob.P_w * w0;
        g.l_ww = prob.P_w;
        g.l_xw = Matrix::Zero(n, n);
        return g;
    }

    CostGradients term_grad(const EstimationProblem &prob, const Vector &xN, const Vector &yN)
    {
        const Matrix H = prob.meas.H(xN);
        CostGradients g;
        g.l_x = H.transpose() * prob.P_v * (prob.meas.h(xN) - yN);
        g.l_xx = H.transpose() * prob.P_v * H;
        return g;
    }

    SolverIterate rollout(const EstimationProblem &prob, const Vector &x0, std::vector<Vector> W,
                          const IntegratorOptions &opts)
    {
        SolverIterate it;
        it.traj = simulate(*prob.sys, HybridState{prob.mode0, x0, prob.t0}, prob.U, W, prob.dt, prob.horizon(), opts);
        it.W = std::move(W);
        it.cost = total_cost(prob, it);
        return it;
    }

    SolverIterate initial_iterate(const EstimationProblem &prob, const IntegratorOptions &opts)
    {
        prob.validate();
        const int n = prob.sys->dim();
        return rollout(prob, prob.x0_prior, std::vector<Vector>(static_cast<std::size_t>(prob.horizon()), Vector::Zero(n)),
                       opts);
    }

    BackwardPassResult backward_pass(const EstimationProblem &prob, const SolverIterate &it, const SolverConfig &cfg)
    {
        const HybridSystem &sys = *prob.sys;
        const int N = prob.horizon();
        const int n = sys.dim();
        const Matrix I = Matrix::Identity(n, n);

        BackwardPassResult out;
        ValueExpansion &V = out.value;
        GainSchedule &G = out.gains;
        V.Vx.resize(static_cast<std::size_t>(N) + 1);
        V.Vxx.resize(static_cast<std::size_t>(N) + 1);
        G.K.resize(static_cast<std::size_t>(N));
        G.k.resize(static_cast<std::size_t>(N));

        const CostGradients terminal = term_grad(prob, it.x(N), prob.Y[static_cast<std::size_t>(N) - 1]);
        V.Vx[N] = terminal.l_x;
        V.Vxx[N] = terminal.l_xx;

        double expected = 0.0;
        for (int i = N - 1; i >= 0; --i)
        {
            const HybridState &s = it.traj.samples[static_cast<std::size_t>(i)];
            const Vector &w = it.W[static_cast<std::size_t>(i)];
            const CostGradients l = (i == 0) ? init_grad(prob, s.x, w)
                                             : stage_grad(prob, s.x, w, prob.Y[static_cast<std::size_t>(i) - 1]);
            const Vector &u = control_at(prob.U, i);

            // Flow of the pre-event mode over the whole step; an event is treated
            // as happening at the end of the step and composed after the flow.
            const Matrix A = rk4_step_jacobian(sys, s.mode, s.t, s.x, u, prob.dt);
            Matrix A_bar = A;
            Matrix B_bar = I;
            if (const EventRecord *ev = it.traj.event_at_step(i))
            {
                const Transition &tr = sys.transitions()[ev->transition];
                const Matrix M = cfg.use_saltation
                                     ? saltation(sys, tr, ev->t_event, ev->x_minus, u, cfg.integrator.eps_trans)
                                     : tr.reset_jacobian(ev->t_event, ev->x_minus).dx;
                A_bar = M * A;
                B_bar = M;
            }

            const Vector &Vx_next = V.Vx[static_cast<std::size_t>(i) + 1];
            const Matrix &Vxx_next = V.Vxx[static_cast<std::size_t>(i) + 1];
            const Vector Q_x = l.l_x + A_bar.transpose() * Vx_next;
            const Vector Q_w = l.l_w + B_bar.transpose() * Vx_next;
            const Matrix Q_xx = l.l_xx + A_bar.transpose() * Vxx_next * A_bar;
            const Matrix Q_ww = symmetrized(l.l_ww + B_bar.transpose() * Vxx_next * B_bar);
            const Matrix Q_xw = l.l_xw + A_bar.transpose() * Vxx_next * B_bar;

            Eigen::LLT<Matrix> llt(Q_ww);
            double mu = 0.0;
            while (llt.info() != Eigen::Success)
            {
                mu = (mu == 0.0) ? cfg.mu_min : mu * cfg.mu_scale;
                if (mu > cfg.mu_max)
                    throw Error(ErrorCode::NonPositiveQww, "Q_ww not positive definite at step " + std::to_string(i));
                llt.compute(Q_ww + mu * I);
            }

            Vector k = llt.solve(Q_w);
            Matrix K = llt.solve(Q_xw.transpose());
            V.Vx[static_cast<std::size_t>(i)] = Q_x - Q_xw * k;
            V.Vxx[static_cast<std::size_t>(i)] = symmetrized(Q_xx - Q_xw * K);
            expected += Q_w.dot(k);
            G.k[static_cast<std::size_t>(i)] = std::move(k);
            G.K[static_cast<std::size_t>(i)] = std::move(K);
        }

        G.dx0 = initial_point_update(V.Vx[0], V.Vxx[0], 1.0);
        expected -= V.Vx[0].dot(G.dx0);
        G.expected_decrease = expected;
        return out;
    }

    Vector initial_point_update(const Vector &Vx0, const Matrix &Vxx0, double alpha)
    {
        Eigen::LLT<Matrix> llt(symmetrized(Vxx0));
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::SingularValueHessian, "value Hessian at the initial node is not positive definite");
        return -alpha * llt.solve(Vx0);
    }

    Vector reference_extension(const HybridSystem &sys, const HybridTrajectory &reference, const HybridState &rollout,
                               int i, int rollout_events, std::span<const Vector> controls,
                               const IntegratorOptions &opts)
    {
        (void)opts;
        const HybridState &ref = reference.samples[static_cast<std::size_t>(i)];
        const int ref_events = reference.events_before(i);

        if (rollout_events == ref_events)
        {
            if (rollout.mode != ref.mode)
                throw Error(ErrorCode::NoEventFound, "mode mismatch without a bracketing event at sample " +
                                                         std::to_string(i));
            return rollout.x - ref.x;
        }

        if (rollout_events == ref_events + 1)
        {
            // The rollout has already crossed; map the reference's pre-impact
            // displacement into the new mode with the saltation matrix.
            if (ref_events >= static_cast<int>(reference.events.size()))
                throw Error(ErrorCode::NoEventFound, "reference never reaches the event crossed at sample " +
                                                         std::to_string(i));
            const EventRecord &ev = reference.events[static_cast<std::size_t>(ref_events)];
            if (ev.to != rollout.mode)
                throw Error(ErrorCode::NoEventFound, "reference event leads to a different mode at sample " +
                                                         std::to_string(i));
            return rollout.x - ev.x_plus + ev.salt * (ev.x_minus - ref.x);
        }

        if (ref_events == rollout_events + 1)
        {
            // The reference has crossed but the rollout has not: restart the
            // reference from its impact point under the pre-impact dynamics.
            const EventRecord &ev = reference.events[static_cast<std::size_t>(ref_events) - 1];
            if (ev.from != rollout.mode)
                throw Error(ErrorCode::NoEventFound, "reference event starts in a different mode at sample " +
                                                         std::to_string(i));
            const double span = ref.t - ev.t_event;
            Vector extended = ev.x_minus;
            if (span > 0.0)
            {
                const int pieces = std::max(1, static_cast<int>(std::ceil(span / reference.dt - 1e-9)));
                const double h = span / pieces;
                const Vector &u = control_at(controls, ev.step_index);
                for (int p = 0; p < pieces; ++p)
                    extended = rk4_step(sys, ev.from, ev.t_event + p * h, extended, u, h);
            }
            return rollout.x - extended;
        }

        throw Error(ErrorCode::NoEventFound, "rollout and reference differ by more than one event at sample " +
                                                 std::to_string(i));
    }

    SolverIterate forward_pass(const EstimationProblem &prob, const SolverIterate &prev, const GainSchedule &gains,
                               double alpha, const SolverConfig &cfg)
    {
        const HybridSystem &sys = *prob.sys;
        const int N = prob.horizon();

        SolverIterate next;
        next.traj.dt = prob.dt;
        next.traj.samples.reserve(static_cast<std::size_t>(N) + 1);
        next.traj.samples.push_back({prob.mode0, prev.x(0) + alpha * gains.dx0, prob.t0});
        next.W.resize(static_cast<std::size_t>(N));

        for (int i = 0; i < N; ++i)
        {
            const std::size_t si = static_cast<std::size_t>(i);
            const HybridState &cur = next.traj.samples.back();
            const Vector dx = reference_extension(sys, prev.traj, cur, i, static_cast<int>(next.traj.events.size()),
                                                  prob.U, cfg.integrator);
            next.W[si] = prev.W[si] - alpha * gains.k[si] - gains.K[si] * dx;

            StepResult r = step(sys, cur, control_at(prob.U, i), next.W[si], prob.dt, cfg.integrator, i);
            if (!r.state.x.allFinite() || r.state.x.lpNorm<Eigen::Infinity>() > cfg.divergence_bound)
                throw Error(ErrorCode::RolloutDiverged, "state left the divergence bound at step " + std::to_string(i));
            next.traj.samples.push_back(std::move(r.state));
            if (r.event)
                next.traj.events.push_back(std::move(*r.event));
        }
        next.cost = total_cost(prob, next);
        return next;
    }

    SolveResult solve(const EstimationProblem &prob, const SolverIterate &init, const SolverConfig &cfg)
    {
        prob.validate();
        SolveResult res{init, {}};
        SolveStats &stats = res.stats;
        double J = init.cost;
        stats.accepted_costs.push_back(J);

        for (int iter = 0; iter < cfg.max_outer_iters; ++iter)
        {
            const BackwardPassResult bp = backward_pass(prob, res.iterate, cfg);
            ++stats.iterations;

            IterationLog entry;
            entry.iteration = iter;
            entry.expected_decrease = bp.gains.expected_decrease;
            entry.cost = J;
            entry.event_count = static_cast<int>(res.iterate.traj.events.size());

            if (bp.gains.expected_decrease < cfg.cost_decrease_tol)
            {
                stats.converged = true;
                stats.log.push_back(entry);
                break;
            }

            double alpha = cfg.alpha_initial;
            std::optional<SolverIterate> accepted;
            for (int ls = 0; ls <= cfg.max_line_search_iters; ++ls, alpha *= cfg.alpha_factor)
            {
                try
                {
                    SolverIterate cand = forward_pass(prob, res.iterate, bp.gains, alpha, cfg);
                    if (cand.cost < J)
                    {
                        accepted = std::move(cand);
                        break;
                    }
                }
                catch (const Error &)
                {
                    // A failed rollout counts as a rejected step size.
                }
            }

            if (!accepted)
            {
                stats.log.push_back(entry);
                break;
            }

            const double decrease = J - accepted->cost;
            res.iterate = std::move(*accepted);
            J = res.iterate.cost;
            ++stats.accepted_steps;
            stats.accepted_costs.push_back(J);
            entry.cost = J;
            entry.alpha = alpha;
            entry.accepted = true;
            entry.event_count = static_cast<int>(res.iterate.traj.events.size());
            stats.log.push_back(entry);

            if (decrease < cfg.cost_decrease_tol)
            {
                stats.converged = true;
                break;
            }
        }
        return res;
    }

    void write_solver_log_csv(std::ostream &os, const SolveStats &stats)
    {
        os << "iteration,cost,expected_decrease,alpha,event_count,accepted\n";
        for (const IterationLog &l : stats.log)
            os << l.iteration << ',' << format_double(l.cost) << ',' << format_double(l.expected_decrease) << ','
               << format_double(l.alpha) << ',' << l.event_count << ',' << (l.accepted ? 1 : 0) << '\n';
    }

} // namespace hilqe
