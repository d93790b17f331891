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

#ifndef HILQE_ESTIMATOR_HPP
#define HILQE_ESTIMATOR_HPP

#include <memory>
#include <ostream>
#include <vector>

#include "hilqe/hybrid_system.hpp"
#include "hilqe/models.hpp"

namespace hilqe
{
    /**
     * Batch estimation problem over states x_0..x_N and process noises w_0..w_{N-1}:
     *
     *   J = 1/2 |x_0 - xbar_0|^2_{P_x} + sum_{i=1}^{N} ( 1/2 |h(x_i) - y_i|^2_{P_v} + 1/2 |w_{i-1}|^2_{P_w} )
     *   s.t. x_{i+1} = step(x_i, u_i) + w_i
     *
     * The P matrices are inverse covariances. Y[i-1] holds y_i.
     */
    struct EstimationProblem
    {
        std::shared_ptr<const HybridSystem> sys;
        MeasurementModel meas;
        std::vector<Vector> Y;
        std::vector<Vector> U; // empty when the system has no input
        double dt = 0.0;
        double t0 = 0.0;
        Matrix P_v;
        Matrix P_w;
        Matrix P_x;
        Vector x0_prior;
        ModeId mode0;

        int horizon() const { return static_cast<int>(Y.size()); }
        void validate() const;
    };

    /// Dynamically feasible iterate: traj is the rollout of (x_0, W).
    struct SolverIterate
    {
        HybridTrajectory traj;
        std::vector<Vector> W;
        double cost = 0.0;

        const Vector &x(int i) const { return traj.samples[static_cast<std::size_t>(i)].x; }
    };

    struct ValueExpansion
    {
        std::vector<Vector> Vx;
        std::vector<Matrix> Vxx;
    };

    struct GainSchedule
    {
        std::vector<Matrix> K;
        std::vector<Vector> k;
        Vector dx0; // full initial-point step -V_xx0^{-1} V_x0
        double expected_decrease = 0.0;
    };

    struct CostGradients
    {
        Vector l_x;
        Matrix l_xx;
        Vector l_w;
        Matrix l_ww;
        Matrix l_xw;
    };

    struct SolverConfig
    {
        int max_outer_iters = 100;
        int max_line_search_iters = 16;
        double alpha_initial = 1.0;
        double alpha_factor = 0.5;
        double cost_decrease_tol = 1e-8;
        double mu_min = 1e-8;
        double mu_max = 1e4;
        double mu_scale = 10.0;
        double divergence_bound = 1e6;
        // When false, event steps use the reset Jacobian instead of the saltation matrix (ablation).
        bool use_saltation = true;
        IntegratorOptions integrator;
    };

    struct IterationLog
    {
        int iteration = 0;
        double cost = 0.0;
        double expected_decrease = 0.0;
        double alpha = 0.0; // 0 when no step was accepted
        int event_count = 0;
        bool accepted = false;
    };

    struct SolveStats
    {
        int iterations = 0;
        int accepted_steps = 0;
        bool converged = false;
        std::vector<IterationLog> log;
        std::vector<double> accepted_costs; // starts with the initial cost
    };

    double total_cost(const EstimationProblem &prob, const std::vector<Vector> &X, const std::vector<Vector> &W);
    double total_cost(const EstimationProblem &prob, const SolverIterate &it);

    /// Gradients of the stage term at node i >= 1: measurement on x_i plus the noise w_i leaving it.
    CostGradients stage_grad(const EstimationProblem &prob, const Vector &x, const Vector &w, const Vector &y);
    /// Node 0: arrival cost on x_0 plus the noise w_0.
    CostGradients init_grad(const EstimationProblem &prob, const Vector &x0, const Vector &w0);
    /// Node N: measurement only.
    CostGradients term_grad(const EstimationProblem &prob, const Vector &xN, const Vector &yN);

    /// x_0 = xbar_0, W = 0, rolled out through the hybrid dynamics.
    SolverIterate initial_iterate(const EstimationProblem &prob, const IntegratorOptions &opts = {});
    /// Replays (x_0, W) through the dynamics and evaluates the cost.
    SolverIterate rollout(const EstimationProblem &prob, const Vector &x0, std::vector<Vector> W,
                          const IntegratorOptions &opts = {});

    struct BackwardPassResult
    {
        ValueExpansion value;
        GainSchedule gains;
    };

    BackwardPassResult backward_pass(const EstimationProblem &prob, const SolverIterate &it, const SolverConfig &cfg);

    /// delta x_0 = -alpha V_xx0^{-1} V_x0.
    Vector initial_point_update(const Vector &Vx0, const Matrix &Vxx0, double alpha);

    /**
     * State difference used by the feedback term when the rollout and the reference
     * may sit on opposite sides of an event at sample i.
     *
     * `rollout_events` are the events of the new rollout recorded before sample i.
     */
    Vector reference_extension(const HybridSystem &sys, const HybridTrajectory &reference, const HybridState &rollout,
                               int i, int rollout_events, std::span<const Vector> controls,
                               const IntegratorOptions &opts = {});

    SolverIterate forward_pass(const EstimationProblem &prob, const SolverIterate &prev, const GainSchedule &gains,
                               double alpha, const SolverConfig &cfg);

    struct SolveResult
    {
        SolverIterate iterate;
        SolveStats stats;
    };

    SolveResult solve(const EstimationProblem &prob, const SolverIterate &init, const SolverConfig &cfg = {});

    /// Columns: iteration, cost, expected_decrease, alpha, event_count, accepted.
    void write_solver_log_csv(std::ostream &os, const SolveStats &stats);

} // namespace hilqe

#endif // HILQE_ESTIMATOR_HPP
