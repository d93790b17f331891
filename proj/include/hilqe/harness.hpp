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

#ifndef HILQE_HARNESS_HPP
#define HILQE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hilqe/estimator.hpp"
#include "hilqe/models.hpp"
#include "hilqe/skf.hpp"

namespace hilqe
{
    enum class SystemKind
    {
        Ball,
        Aslip,
    };

    std::string to_string(SystemKind kind);
    SystemKind system_kind_from_string(const std::string &name);

    /// How a configured process-noise matrix maps to the covariance of one sample interval:
    /// as is, times dt (white-noise intensity), or times dt^2 (noise on the state rate held over a step).
    enum class NoiseUnits
    {
        PerStep,
        PerSecond,
        PerSecondSquared
    };

    std::string to_string(NoiseUnits u);
    NoiseUnits noise_units_from_string(const std::string &s);
    /// Ball: per_second. Hopper: per_second_squared.
    NoiseUnits default_noise_units(SystemKind k);
    Matrix per_step_noise(const Matrix &W, NoiseUnits u, double dt);

    /// Everything that determines a Monte-Carlo comparison. Covariances are per sample interval.
    struct TrialSpec
    {
        SystemKind system = SystemKind::Ball;
        std::uint64_t seed = 7;
        double duration = 1.0;
        double dt = 0.01;
        int trials = 100;
        Matrix W_cov;
        Matrix V_cov;
        Matrix P_0;
        Vector x0_mean;
        BallParams ball;
        AslipParams aslip;
        // Added to P_0 before inversion so the arrival weight stays finite.
        double p0_floor = 1e-12;
        // Half width of the window around true events used for mode accuracy [s].
        double mode_window = 0.05;
        SolverConfig solver;
        // Also solve with the reset Jacobian in place of the saltation matrix.
        bool run_ablation = false;

        int steps() const;
        void validate() const;
    };

    /// Defaults for the bouncing ball: 1 s at 100 Hz, x_0 = [0, 1, 0.5, -5],
    /// process noise intensity 0.1 I_4, measurement covariance I_2.
    TrialSpec ball_defaults();
    /// Defaults for the hopper: 1 kHz, y_b = 2.5, y_t = 1, P_0 = 1e-5 I_8,
    /// process noise 0.1 I_8 on the state rate, measurement covariance I_5.
    /// Desk scale is 10 trials of 2.5 s; full scale is 100 trials of 5 s.
    TrialSpec aslip_defaults(bool full_scale = false);

    HybridModel make_model(const TrialSpec &spec);

    enum class StreamRole : std::uint64_t
    {
        Init = 1,
        Process = 2,
        Measurement = 3,
    };

    /// Seed of the generator for one (seed, trial, role) triple.
    std::uint64_t stream_key(std::uint64_t seed, int trial, StreamRole role);
    /// Independent generator for one (seed, trial, role) triple.
    std::mt19937_64 make_stream(std::uint64_t seed, int trial, StreamRole role);

    /// Draws from N(0, cov); a zero covariance gives exact zeros.
    class GaussianSampler
    {
    public:
        explicit GaussianSampler(const Matrix &cov);
        Vector operator()(std::mt19937_64 &rng) const;

    private:
        Matrix factor_;
    };

    struct TrialData
    {
        HybridTrajectory truth;
        std::vector<Vector> Y;
    };

    TrialData generate_trial(const TrialSpec &spec, int trial_index);

    EstimationProblem make_problem(const TrialSpec &spec, const HybridModel &model, std::vector<Vector> Y);

    struct TrialResult
    {
        int index = 0;
        bool ok = false;
        std::string failure;

        HybridTrajectory truth;
        std::vector<Vector> Y;
        HybridTrajectory est_hilqe;
        HybridTrajectory est_skf;
        std::vector<double> errors_hilqe; // |xhat_i - x_i|_2, N + 1 entries
        std::vector<double> errors_skf;
        std::vector<Vector> dim_errors_hilqe; // |xhat_i - x_i| per dimension
        std::vector<Vector> dim_errors_skf;
        std::vector<char> mode_match_hilqe;
        std::vector<char> mode_match_skf;
        std::vector<char> in_impact_window;

        SolveStats stats;
        double cost_hilqe = 0.0;
        double cost_skf = 0.0;     // SKF means scored by the batch cost with implied noises
        double cost_ablation = 0.0; // only when spec.run_ablation
        int ablation_accepted_steps = 0;

        double mse_hilqe() const;
        double mse_skf() const;
    };

    TrialResult run_trial(const TrialSpec &spec, int trial_index);

    /// Runs all trials; results are ordered by trial index whatever `jobs` is.
    std::vector<TrialResult> run_comparison(const TrialSpec &spec, int jobs = 1);

    struct MetricsSummary
    {
        int trials = 0;
        int failures = 0;
        int state_dim = 0;
        double dt = 0.0;
        std::vector<double> times;
        std::vector<double> mean_error_hilqe;
        std::vector<double> mean_error_skf;
        std::vector<Vector> mean_dim_error_hilqe; // per timestep
        std::vector<Vector> mean_dim_error_skf;
        std::vector<double> improvement_pct; // per timestep, NaN where the SKF error vanishes
        double median_mse_improvement_pct = 0.0;
        // Alternative reading: improvement of the median MSEs.
        double median_of_mse_improvement_pct = 0.0;
        double peak_timestep_improvement_pct = 0.0;
        double mode_accuracy_hilqe = 1.0;
        double mode_accuracy_skf = 1.0;
        // One-sided 95% bootstrap lower bound on the mean per-trial accuracy difference.
        double mode_accuracy_diff_lower95 = 0.0;
        int monotonicity_violations = 0;
    };

    double improvement_pct(double e_skf, double e_hilqe);

    MetricsSummary aggregate_metrics(const std::vector<TrialResult> &results, std::uint64_t bootstrap_seed = 0);

    /// Writes trial_XXXX.csv per successful trial, metrics.csv and manifest.json.
    std::vector<std::filesystem::path> export_results(const TrialSpec &spec, const std::vector<TrialResult> &results,
                                                      const MetricsSummary &summary,
                                                      const std::filesystem::path &out_dir, double runtime_seconds);

    void write_metrics_csv(std::ostream &os, const MetricsSummary &summary);
    /// Restores the curve part of a summary from metrics.csv.
    MetricsSummary read_metrics_csv(std::istream &is);

} // namespace hilqe

#endif // HILQE_HARNESS_HPP
