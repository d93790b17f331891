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

#include "hilqe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hilqe/config.hpp"
#include "hilqe/trajectory_io.hpp"

namespace hilqe
{
    std::string to_string(SystemKind kind) { return kind == SystemKind::Ball ? "ball" : "aslip"; }

    SystemKind system_kind_from_string(const std::string &name)
    {
        if (name == "ball")
            return SystemKind::Ball;
        if (name == "aslip")
            return SystemKind::Aslip;
        throw Error(ErrorCode::ConfigError, "system: expected 'ball' or 'aslip', got '" + name + "'");
    }

    int TrialSpec::steps() const { return static_cast<int>(std::llround(duration / dt)); }

    void TrialSpec::validate() const
    {
        const int n = system == SystemKind::Ball ? 4 : aslip::kDim;
        const int m = system == SystemKind::Ball ? 2 : 5;
        if (!(dt > 0.0) || !(duration > 0.0))
            throw Error(ErrorCode::ConfigError, "duration and dt must be positive");
        if (std::abs(duration / dt - steps()) > 1e-6)
            throw Error(ErrorCode::ConfigError, "duration must be an integer multiple of dt");
        if (trials < 0)
            throw Error(ErrorCode::ConfigError, "trials must be non-negative");
        auto check = [](const Matrix &M, int size, const char *name, bool allow_singular) {
            if (M.rows() != size || M.cols() != size)
                throw Error(ErrorCode::ConfigError, std::string(name) + " has the wrong size");
            if (!M.isApprox(M.transpose(), 1e-12) && !M.isZero())
                throw Error(ErrorCode::ConfigError, std::string(name) + " must be symmetric");
            Eigen::SelfAdjointEigenSolver<Matrix> es(M);
            const double lo = es.eigenvalues().minCoeff();
            if (allow_singular ? lo < 0.0 : lo <= 0.0)
                throw Error(ErrorCode::ConfigError, std::string(name) + " must be positive definite");
        };
        check(W_cov, n, "W_cov", false);
        check(V_cov, m, "V_cov", false);
        check(P_0, n, "P_0", true);
        if (x0_mean.size() != n)
            throw Error(ErrorCode::ConfigError, "x0_mean has the wrong size");
        if (!(mode_window >= 0.0))
            throw Error(ErrorCode::ConfigError, "mode_window must be non-negative");
    }

    std::string to_string(NoiseUnits u)
    {
        switch (u)
        {
        case NoiseUnits::PerStep:
            return "per_step";
        case NoiseUnits::PerSecond:
            return "per_second";
        case NoiseUnits::PerSecondSquared:
            return "per_second_squared";
        }
        return "?";
    }

    NoiseUnits noise_units_from_string(const std::string &s)
    {
        if (s == "per_step")
            return NoiseUnits::PerStep;
        if (s == "per_second")
            return NoiseUnits::PerSecond;
        if (s == "per_second_squared")
            return NoiseUnits::PerSecondSquared;
        throw Error(ErrorCode::ConfigError, "unknown process noise units '" + s + "'");
    }

    NoiseUnits default_noise_units(SystemKind k)
    {
        return k == SystemKind::Ball ? NoiseUnits::PerSecond : NoiseUnits::PerSecondSquared;
    }

    Matrix per_step_noise(const Matrix &W, NoiseUnits u, double dt)
    {
        switch (u)
        {
        case NoiseUnits::PerSecond:
            return W * dt;
        case NoiseUnits::PerSecondSquared:
            return W * (dt * dt);
        case NoiseUnits::PerStep:
            break;
        }
        return W;
    }

    TrialSpec ball_defaults()
    {
        TrialSpec s;
        s.system = SystemKind::Ball;
        s.duration = 1.0;
        s.dt = 0.01;
        s.trials = 100;
        s.W_cov = per_step_noise(0.1 * Matrix::Identity(4, 4), default_noise_units(s.system), s.dt);
        s.V_cov = Matrix::Identity(2, 2);
        s.P_0 = 1e-6 * Matrix::Identity(4, 4);
        s.x0_mean = ball_default_initial_state();
        return s;
    }

    TrialSpec aslip_defaults(bool full_scale)
    {
        TrialSpec s;
        s.system = SystemKind::Aslip;
        s.duration = full_scale ? 5.0 : 2.5;
        s.dt = 0.001;
        s.trials = full_scale ? 100 : 10;
        s.W_cov = per_step_noise(0.1 * Matrix::Identity(aslip::kDim, aslip::kDim), default_noise_units(s.system), s.dt);
        s.V_cov = Matrix::Identity(5, 5);
        s.P_0 = 1e-5 * Matrix::Identity(aslip::kDim, aslip::kDim);
        s.x0_mean = aslip_default_initial_state();
        return s;
    }

    HybridModel make_model(const TrialSpec &spec)
    {
        return spec.system == SystemKind::Ball ? make_ball(spec.ball) : make_aslip(spec.aslip);
    }

    namespace
    {
        std::uint64_t splitmix64(std::uint64_t z)
        {
            z += 0x9E3779B97F4A7C15ULL;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }
    } // namespace

    std::uint64_t stream_key(std::uint64_t seed, int trial, StreamRole role)
    {
        std::uint64_t key = splitmix64(seed);
        key = splitmix64(key ^ static_cast<std::uint64_t>(trial));
        return splitmix64(key ^ static_cast<std::uint64_t>(role));
    }

    std::mt19937_64 make_stream(std::uint64_t seed, int trial, StreamRole role)
    {
        return std::mt19937_64(stream_key(seed, trial, role));
    }

    GaussianSampler::GaussianSampler(const Matrix &cov)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(cov));
        const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        factor_ = es.eigenvectors() * root.asDiagonal();
    }

    Vector GaussianSampler::operator()(std::mt19937_64 &rng) const
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector z(factor_.cols());
        for (Eigen::Index j = 0; j < z.size(); ++j)
            z(j) = normal(rng);
        return factor_ * z;
    }

    TrialData generate_trial(const TrialSpec &spec, int trial_index)
    {
        const HybridModel model = make_model(spec);
        const int N = spec.steps();

        auto init_rng = make_stream(spec.seed, trial_index, StreamRole::Init);
        auto process_rng = make_stream(spec.seed, trial_index, StreamRole::Process);
        auto meas_rng = make_stream(spec.seed, trial_index, StreamRole::Measurement);

        const Vector x0 = spec.x0_mean + GaussianSampler(spec.P_0)(init_rng);
        const GaussianSampler process(spec.W_cov);
        std::vector<Vector> noise;
        noise.reserve(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i)
            noise.push_back(process(process_rng));

        TrialData data;
        data.truth = simulate(*model.system, HybridState{model.initial_mode, x0, 0.0}, {}, noise, spec.dt, N,
                              spec.solver.integrator);
        const GaussianSampler measurement(spec.V_cov);
        data.Y.reserve(static_cast<std::size_t>(N));
        for (int i = 1; i <= N; ++i)
            data.Y.push_back(model.measurement.h(data.truth.samples[static_cast<std::size_t>(i)].x) +
                             measurement(meas_rng));
        return data;
    }

    EstimationProblem make_problem(const TrialSpec &spec, const HybridModel &model, std::vector<Vector> Y)
    {
        const int n = model.system->dim();
        EstimationProblem prob;
        prob.sys = model.system;
        prob.meas = model.measurement;
        prob.Y = std::move(Y);
        prob.dt = spec.dt;
        prob.P_v = symmetrized(spec.V_cov.inverse());
        prob.P_w = symmetrized(spec.W_cov.inverse());
        prob.P_x = symmetrized((spec.P_0 + spec.p0_floor * Matrix::Identity(n, n)).inverse());
        prob.x0_prior = spec.x0_mean;
        prob.mode0 = model.initial_mode;
        return prob;
    }

    namespace
    {
        int recent_events(const HybridTrajectory &tr, int i, int lookback)
        {
            int c = 0;
            for (const EventRecord &e : tr.events)
                if (e.step_index < i && e.step_index >= i - lookback)
                    ++c;
            return c;
        }

        // Discrete phase of sample i: the active mode and the events seen over the last `lookback` steps.
        // A purely local count keeps one missed bounce from mislabeling every later sample.
        bool same_phase(const HybridTrajectory &a, const HybridTrajectory &b, int i, int lookback)
        {
            const auto si = static_cast<std::size_t>(i);
            return a.samples[si].mode == b.samples[si].mode &&
                   recent_events(a, i, lookback) == recent_events(b, i, lookback);
        }

        // Batch cost of a state sequence that was not produced by a rollout:
        // the noises are whatever closes each step.
        double implied_cost(const EstimationProblem &prob, const HybridTrajectory &traj, const IntegratorOptions &opts)
        {
            const int N = prob.horizon();
            std::vector<Vector> X, W;
            for (const HybridState &s : traj.samples)
                X.push_back(s.x);
            for (int i = 0; i < N; ++i)
            {
                const HybridState &s = traj.samples[static_cast<std::size_t>(i)];
                const StepResult r = step(*prob.sys, s, control_at(prob.U, i), Vector(), prob.dt, opts, i);
                W.push_back(X[static_cast<std::size_t>(i) + 1] - r.state.x);
            }
            return total_cost(prob, X, W);
        }
    } // namespace

    double TrialResult::mse_hilqe() const
    {
        double s = 0.0;
        for (double e : errors_hilqe)
            s += e * e;
        return errors_hilqe.empty() ? 0.0 : s / static_cast<double>(errors_hilqe.size());
    }

    double TrialResult::mse_skf() const
    {
        double s = 0.0;
        for (double e : errors_skf)
            s += e * e;
        return errors_skf.empty() ? 0.0 : s / static_cast<double>(errors_skf.size());
    }

    TrialResult run_trial(const TrialSpec &spec, int trial_index)
    {
        TrialResult res;
        res.index = trial_index;
        try
        {
            const HybridModel model = make_model(spec);
            TrialData data = generate_trial(spec, trial_index);
            res.truth = std::move(data.truth);
            res.Y = data.Y;
            const EstimationProblem prob = make_problem(spec, model, std::move(data.Y));

            const SkfRun skf = run_skf(prob, spec.V_cov, spec.W_cov, spec.P_0, spec.solver.integrator);
            res.est_skf = skf.trajectory(spec.dt);

            const SolverIterate init = initial_iterate(prob, spec.solver.integrator);
            SolveResult sol = solve(prob, init, spec.solver);
            res.est_hilqe = std::move(sol.iterate.traj);
            res.cost_hilqe = sol.iterate.cost;
            res.stats = std::move(sol.stats);
            res.cost_skf = implied_cost(prob, res.est_skf, spec.solver.integrator);

            if (spec.run_ablation)
            {
                SolverConfig ablated = spec.solver;
                ablated.use_saltation = false;
                const SolveResult abl = solve(prob, init, ablated);
                res.cost_ablation = abl.iterate.cost;
                res.ablation_accepted_steps = abl.stats.accepted_steps;
            }

            const int N = spec.steps();
            const int lookback = static_cast<int>(std::ceil(2.0 * spec.mode_window / spec.dt - 1e-9));
            for (int i = 0; i <= N; ++i)
            {
                const auto si = static_cast<std::size_t>(i);
                const Vector &x = res.truth.samples[si].x;
                const Vector eh = res.est_hilqe.samples[si].x - x;
                const Vector es = res.est_skf.samples[si].x - x;
                res.errors_hilqe.push_back(eh.norm());
                res.errors_skf.push_back(es.norm());
                res.dim_errors_hilqe.push_back(eh.cwiseAbs());
                res.dim_errors_skf.push_back(es.cwiseAbs());
                res.mode_match_hilqe.push_back(same_phase(res.est_hilqe, res.truth, i, lookback));
                res.mode_match_skf.push_back(same_phase(res.est_skf, res.truth, i, lookback));
                const double t = res.truth.samples[si].t;
                const bool near = std::any_of(res.truth.events.begin(), res.truth.events.end(), [&](const EventRecord &e) {
                    return std::abs(t - e.t_event) <= spec.mode_window + 1e-12;
                });
                res.in_impact_window.push_back(near);
            }
            res.ok = true;
        }
        catch (const std::exception &e)
        {
            res.ok = false;
            res.failure = e.what();
        }
        return res;
    }

    std::vector<TrialResult> run_comparison(const TrialSpec &spec, int jobs)
    {
        spec.validate();
        std::vector<TrialResult> results(static_cast<std::size_t>(spec.trials));
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (int k = next++; k < spec.trials; k = next++)
                results[static_cast<std::size_t>(k)] = run_trial(spec, k);
        };
        const int workers = std::max(1, std::min(jobs, spec.trials));
        if (workers == 1)
        {
            worker();
            return results;
        }
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
        return results;
    }

    double improvement_pct(double e_skf, double e_hilqe) { return 100.0 * (e_skf - e_hilqe) / e_skf; }

    namespace
    {
        double median(std::vector<double> v)
        {
            if (v.empty())
                return std::numeric_limits<double>::quiet_NaN();
            std::sort(v.begin(), v.end());
            const std::size_t mid = v.size() / 2;
            return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
        }
    } // namespace

    MetricsSummary aggregate_metrics(const std::vector<TrialResult> &results, std::uint64_t bootstrap_seed)
    {
        MetricsSummary s;
        std::vector<const TrialResult *> ok;
        for (const TrialResult &r : results)
        {
            if (r.ok)
                ok.push_back(&r);
            else
                ++s.failures;
        }
        s.trials = static_cast<int>(ok.size());
        if (ok.empty())
            return s;

        const TrialResult &first = *ok.front();
        const std::size_t T = first.errors_hilqe.size();
        s.state_dim = static_cast<int>(first.truth.samples.front().x.size());
        s.dt = first.truth.dt;
        for (const HybridState &x : first.truth.samples)
            s.times.push_back(x.t);

        s.mean_error_hilqe.assign(T, 0.0);
        s.mean_error_skf.assign(T, 0.0);
        s.mean_dim_error_hilqe.assign(T, Vector::Zero(s.state_dim));
        s.mean_dim_error_skf.assign(T, Vector::Zero(s.state_dim));
        const double inv = 1.0 / static_cast<double>(ok.size());

        std::vector<double> mse_h, mse_s, per_trial_impr;
        long window_total = 0, window_h = 0, window_s = 0;
        std::vector<double> acc_diff;
        for (const TrialResult *r : ok)
        {
            for (std::size_t i = 0; i < T; ++i)
            {
                s.mean_error_hilqe[i] += inv * r->errors_hilqe[i];
                s.mean_error_skf[i] += inv * r->errors_skf[i];
                s.mean_dim_error_hilqe[i] += inv * r->dim_errors_hilqe[i];
                s.mean_dim_error_skf[i] += inv * r->dim_errors_skf[i];
            }
            mse_h.push_back(r->mse_hilqe());
            mse_s.push_back(r->mse_skf());
            if (r->mse_skf() > 0.0)
                per_trial_impr.push_back(improvement_pct(r->mse_skf(), r->mse_hilqe()));
            else
                per_trial_impr.push_back(0.0);

            long cnt = 0, mh = 0, ms = 0;
            for (std::size_t i = 0; i < T; ++i)
            {
                if (!r->in_impact_window[i])
                    continue;
                ++cnt;
                mh += r->mode_match_hilqe[i];
                ms += r->mode_match_skf[i];
            }
            window_total += cnt;
            window_h += mh;
            window_s += ms;
            if (cnt > 0)
                acc_diff.push_back(static_cast<double>(mh - ms) / static_cast<double>(cnt));

            const auto &costs = r->stats.accepted_costs;
            for (std::size_t k = 1; k < costs.size(); ++k)
                if (!(costs[k] < costs[k - 1]))
                    ++s.monotonicity_violations;
        }

        s.improvement_pct.resize(T);
        s.peak_timestep_improvement_pct = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < T; ++i)
        {
            if (s.mean_error_skf[i] < 1e-12)
            {
                s.improvement_pct[i] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            s.improvement_pct[i] = improvement_pct(s.mean_error_skf[i], s.mean_error_hilqe[i]);
            s.peak_timestep_improvement_pct = std::max(s.peak_timestep_improvement_pct, s.improvement_pct[i]);
        }
        if (!std::isfinite(s.peak_timestep_improvement_pct))
            s.peak_timestep_improvement_pct = 0.0;

        s.median_mse_improvement_pct = median(per_trial_impr);
        const double med_s = median(mse_s);
        s.median_of_mse_improvement_pct = med_s > 0.0 ? improvement_pct(med_s, median(mse_h)) : 0.0;

        if (window_total > 0)
        {
            s.mode_accuracy_hilqe = static_cast<double>(window_h) / static_cast<double>(window_total);
            s.mode_accuracy_skf = static_cast<double>(window_s) / static_cast<double>(window_total);
        }

        // Percentile bootstrap of the mean per-trial accuracy difference.
        if (!acc_diff.empty())
        {
            std::mt19937_64 rng(bootstrap_seed ^ 0xB0075712ULL);
            std::uniform_int_distribution<std::size_t> pick(0, acc_diff.size() - 1);
            constexpr int kResamples = 2000;
            std::vector<double> means;
            means.reserve(kResamples);
            for (int b = 0; b < kResamples; ++b)
            {
                double sum = 0.0;
                for (std::size_t j = 0; j < acc_diff.size(); ++j)
                    sum += acc_diff[pick(rng)];
                means.push_back(sum / static_cast<double>(acc_diff.size()));
            }
            std::sort(means.begin(), means.end());
            s.mode_accuracy_diff_lower95 = means[static_cast<std::size_t>(0.05 * kResamples)];
        }
        return s;
    }

    void write_metrics_csv(std::ostream &os, const MetricsSummary &s)
    {
        os << "timestep,t,mean_err_hilqe,mean_err_skf,improvement_pct";
        for (int j = 0; j < s.state_dim; ++j)
            os << ",err_hilqe_d" << j;
        for (int j = 0; j < s.state_dim; ++j)
            os << ",err_skf_d" << j;
        os << '\n';
        for (std::size_t i = 0; i < s.times.size(); ++i)
        {
            os << i << ',' << format_double(s.times[i]) << ',' << format_double(s.mean_error_hilqe[i]) << ','
               << format_double(s.mean_error_skf[i]) << ',';
            if (std::isfinite(s.improvement_pct[i]))
                os << format_double(s.improvement_pct[i]);
            for (int j = 0; j < s.state_dim; ++j)
                os << ',' << format_double(s.mean_dim_error_hilqe[i](j));
            for (int j = 0; j < s.state_dim; ++j)
                os << ',' << format_double(s.mean_dim_error_skf[i](j));
            os << '\n';
        }
    }

    MetricsSummary read_metrics_csv(std::istream &is)
    {
        MetricsSummary s;
        std::string line;
        if (!std::getline(is, line))
            throw Error(ErrorCode::IoError, "empty metrics file");
        const auto header = split_csv_line(line);
        if (header.size() < 5 || header[0] != "timestep" || header[2] != "mean_err_hilqe")
            throw Error(ErrorCode::IoError, "not a metrics.csv header");
        if ((header.size() - 5) % 2 != 0)
            throw Error(ErrorCode::IoError, "metrics.csv has an odd number of per-dimension columns");
        s.state_dim = static_cast<int>((header.size() - 5) / 2);
        auto num = [](const std::string &c) {
            return c.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(c);
        };
        while (std::getline(is, line))
        {
            if (line.empty())
                continue;
            const auto c = split_csv_line(line);
            if (c.size() != header.size())
                throw Error(ErrorCode::IoError, "ragged metrics row: " + line);
            s.times.push_back(num(c[1]));
            s.mean_error_hilqe.push_back(num(c[2]));
            s.mean_error_skf.push_back(num(c[3]));
            s.improvement_pct.push_back(num(c[4]));
            Vector dh(s.state_dim), ds(s.state_dim);
            for (int j = 0; j < s.state_dim; ++j)
            {
                dh(j) = num(c[5 + static_cast<std::size_t>(j)]);
                ds(j) = num(c[5 + static_cast<std::size_t>(s.state_dim + j)]);
            }
            s.mean_dim_error_hilqe.push_back(dh);
            s.mean_dim_error_skf.push_back(ds);
        }
        if (s.times.size() > 1)
            s.dt = s.times[1] - s.times[0];
        return s;
    }

    namespace
    {
        void write_trial_csv(std::ostream &os, const TrialResult &r)
        {
            const int n = static_cast<int>(r.truth.samples.front().x.size());
            os << "timestep,t,mode_true,mode_hilqe,mode_skf,err_hilqe,err_skf";
            for (const char *who : {"true", "hilqe", "skf"})
                for (int j = 0; j < n; ++j)
                    os << ",x_" << who << "_d" << j;
            os << '\n';
            for (std::size_t i = 0; i < r.truth.samples.size(); ++i)
            {
                os << i << ',' << format_double(r.truth.samples[i].t) << ',' << r.truth.samples[i].mode.value << ','
                   << r.est_hilqe.samples[i].mode.value << ',' << r.est_skf.samples[i].mode.value << ','
                   << format_double(r.errors_hilqe[i]) << ',' << format_double(r.errors_skf[i]);
                for (const HybridTrajectory *tr : {&r.truth, &r.est_hilqe, &r.est_skf})
                    for (int j = 0; j < n; ++j)
                        os << ',' << format_double(tr->samples[i].x(j));
                os << '\n';
            }
        }

        std::ofstream open_out(const std::filesystem::path &p)
        {
            std::ofstream f(p);
            if (!f)
                throw Error(ErrorCode::IoError, "cannot write " + p.string());
            return f;
        }
    } // namespace

    std::vector<std::filesystem::path> export_results(const TrialSpec &spec, const std::vector<TrialResult> &results,
                                                      const MetricsSummary &summary,
                                                      const std::filesystem::path &out_dir, double runtime_seconds)
    {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

        std::vector<std::filesystem::path> written;
        nlohmann::json seeds = nlohmann::json::array();
        nlohmann::json failures = nlohmann::json::array();
        for (const TrialResult &r : results)
        {
            seeds.push_back({{"trial", r.index},
                             {"init", stream_key(spec.seed, r.index, StreamRole::Init)},
                             {"process", stream_key(spec.seed, r.index, StreamRole::Process)},
                             {"measurement", stream_key(spec.seed, r.index, StreamRole::Measurement)}});
            if (!r.ok)
            {
                failures.push_back({{"trial", r.index}, {"error", r.failure}});
                continue;
            }
            char name[32];
            std::snprintf(name, sizeof(name), "trial_%04d.csv", r.index);
            const auto path = out_dir / name;
            auto f = open_out(path);
            write_trial_csv(f, r);
            written.push_back(path);
        }

        if (!results.empty() && summary.trials > 0)
        {
            const auto path = out_dir / "metrics.csv";
            auto f = open_out(path);
            write_metrics_csv(f, summary);
            written.push_back(path);
        }

        const nlohmann::json spec_json = trial_spec_to_json(spec);
        nlohmann::json manifest;
        manifest["spec"] = spec_json;
        manifest["content_hash"] = git_blob_hash(spec_json.dump());
        manifest["seeds"] = seeds;
        manifest["trials"] = results.size();
        manifest["failures"] = failures;
        manifest["failure_count"] = failures.size();
        manifest["runtime_seconds"] = runtime_seconds;
        if (summary.trials > 0)
        {
            manifest["summary"] = {
                {"trials", summary.trials},
                {"median_mse_improvement_pct", summary.median_mse_improvement_pct},
                {"median_of_mse_improvement_pct", summary.median_of_mse_improvement_pct},
                {"peak_timestep_improvement_pct", summary.peak_timestep_improvement_pct},
                {"mode_accuracy_hilqe", summary.mode_accuracy_hilqe},
                {"mode_accuracy_skf", summary.mode_accuracy_skf},
                {"mode_accuracy_diff_lower95", summary.mode_accuracy_diff_lower95},
                {"monotonicity_violations", summary.monotonicity_violations},
            };
        }
        const auto path = out_dir / "manifest.json";
        auto f = open_out(path);
        f << manifest.dump(2) << '\n';
        written.push_back(path);
        return written;
    }

} // namespace hilqe
