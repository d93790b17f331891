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

#ifndef HILQE_SKF_HPP
#define HILQE_SKF_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "hilqe/estimator.hpp"

namespace hilqe
{
    struct GaussianBelief
    {
        HybridState mean;
        Matrix P;
    };

    struct PredictResult
    {
        GaussianBelief belief;
        std::optional<EventRecord> event;
    };

    /// Salted Kalman filter time update. At an event the covariance is pushed
    /// through A_post * Xi * A_pre, split at the event time.
    PredictResult skf_predict(const HybridSystem &sys, const GaussianBelief &b, const Vector &u, double dt,
                              const Matrix &W_cov, const IntegratorOptions &opts = {}, int step_index = 0);

    /// EKF correction with a Joseph-form covariance update.
    GaussianBelief skf_update(const GaussianBelief &b, const Vector &y, const MeasurementModel &meas,
                              const Matrix &V_cov);

    struct SkfRun
    {
        std::vector<GaussianBelief> beliefs; // N + 1 entries, index 0 is the prior
        std::vector<EventRecord> events;

        /// Filtered means as a trajectory (events included).
        HybridTrajectory trajectory(double dt) const;
    };

    SkfRun run_skf(const EstimationProblem &prob, const Matrix &V_cov, const Matrix &W_cov, const Matrix &P0,
                   const IntegratorOptions &opts = {});

    /// Columns: t, mode, mean_*, and P_r_c row-major unless include_covariance is false.
    void write_beliefs_csv(std::ostream &os, const std::vector<GaussianBelief> &beliefs, bool include_covariance = true);

} // namespace hilqe

#endif // HILQE_SKF_HPP
