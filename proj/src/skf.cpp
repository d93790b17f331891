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

#include "hilqe/skf.hpp"

#include <ostream>

#include "hilqe/trajectory_io.hpp"

namespace hilqe
{
    PredictResult skf_predict(const HybridSystem &sys, const GaussianBelief &b, const Vector &u, double dt,
                              const Matrix &W_cov, const IntegratorOptions &opts, int step_index)
    {
        const int n = sys.dim();
        StepResult r = step(sys, b.mean, u, Vector(), dt, opts, step_index);

        Matrix F;
        if (!r.event)
        {
            F = rk4_step_jacobian(sys, b.mean.mode, b.mean.t, b.mean.x, u, dt);
        }
        else
        {
            const EventRecord &ev = *r.event;
            const double before = ev.t_event - b.mean.t;
            const double after = b.mean.t + dt - ev.t_event;
            const Matrix A_pre = before > 0.0 ? rk4_step_jacobian(sys, ev.from, b.mean.t, b.mean.x, u, before)
                                              : Matrix::Identity(n, n);
            const Matrix A_post = after > 0.0 ? rk4_step_jacobian(sys, ev.to, ev.t_event, ev.x_plus, u, after)
                                              : Matrix::Identity(n, n);
            F = A_post * ev.salt * A_pre;
        }

        PredictResult out;
        out.belief.mean = std::move(r.state);
        out.belief.P = symmetrized(F * b.P * F.transpose() + W_cov);
        out.event = std::move(r.event);
        return out;
    }

    GaussianBelief skf_update(const GaussianBelief &b, const Vector &y, const MeasurementModel &meas,
                              const Matrix &V_cov)
    {
        const int n = static_cast<int>(b.mean.x.size());
        const Matrix H = meas.H(b.mean.x);
        const Vector innovation = y - meas.h(b.mean.x);
        const Matrix S = symmetrized(H * b.P * H.transpose() + V_cov);

        Eigen::LLT<Matrix> llt(S);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::SingularInnovationCovariance, "innovation covariance is not positive definite");

        // K = P H^T S^{-1}
        const Matrix K = llt.solve(H * b.P.transpose()).transpose();
        const Matrix IKH = Matrix::Identity(n, n) - K * H;

        GaussianBelief out;
        out.mean = b.mean;
        out.mean.x = b.mean.x + K * innovation;
        out.P = symmetrized(IKH * b.P * IKH.transpose() + K * V_cov * K.transpose());
        return out;
    }

    HybridTrajectory SkfRun::trajectory(double dt) const
    {
        HybridTrajectory traj;
        traj.dt = dt;
        traj.samples.reserve(beliefs.size());
        for (const GaussianBelief &b : beliefs)
            traj.samples.push_back(b.mean);
        traj.events = events;
        return traj;
    }

    SkfRun run_skf(const EstimationProblem &prob, const Matrix &V_cov, const Matrix &W_cov, const Matrix &P0,
                   const IntegratorOptions &opts)
    {
        const int n = prob.sys->dim();
        if (W_cov.rows() != n || W_cov.cols() != n || P0.rows() != n || P0.cols() != n)
            throw Error(ErrorCode::ParameterError, "W_cov and P0 must be n x n");
        if (V_cov.rows() != prob.meas.m || V_cov.cols() != prob.meas.m)
            throw Error(ErrorCode::ParameterError, "V_cov must be m x m");

        SkfRun run;
        run.beliefs.reserve(static_cast<std::size_t>(prob.horizon()) + 1);
        run.beliefs.push_back({HybridState{prob.mode0, prob.x0_prior, prob.t0}, P0});
        for (int i = 0; i < prob.horizon(); ++i)
        {
            PredictResult pred = skf_predict(*prob.sys, run.beliefs.back(), control_at(prob.U, i), prob.dt, W_cov, opts, i);
            if (pred.event)
                run.events.push_back(std::move(*pred.event));
            run.beliefs.push_back(skf_update(pred.belief, prob.Y[static_cast<std::size_t>(i)], prob.meas, V_cov));
        }
        return run;
    }

    void write_beliefs_csv(std::ostream &os, const std::vector<GaussianBelief> &beliefs, bool include_covariance)
    {
        const int n = beliefs.empty() ? 0 : static_cast<int>(beliefs.front().mean.x.size());
        os << "t,mode";
        for (int j = 0; j < n; ++j)
            os << ",mean_" << j;
        if (include_covariance)
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    os << ",P_" << r << '_' << c;
        os << '\n';
        for (const GaussianBelief &b : beliefs)
        {
            os << format_double(b.mean.t) << ',' << b.mean.mode.value;
            for (int j = 0; j < n; ++j)
                os << ',' << format_double(b.mean.x(j));
            if (include_covariance)
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c)
                        os << ',' << format_double(b.P(r, c));
            os << '\n';
        }
    }

} // namespace hilqe
