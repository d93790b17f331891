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

// hilqe: command-line front end (simulate | estimate | bench | plot).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hilqe/config.hpp"
#include "hilqe/estimator.hpp"
#include "hilqe/harness.hpp"
#include "hilqe/plot.hpp"
#include "hilqe/skf.hpp"
#include "hilqe/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
    struct Flags
    {
        std::optional<std::string> system, config, out, preset, estimator, input;
        std::optional<std::uint64_t> seed;
        std::optional<int> trials, jobs;
        std::optional<double> duration, dt, mode_window_ms;
        bool ablation = false;
        int verbose = 0;
        int trial = 0;
    };

    void add_common(CLI::App *cmd, Flags &f)
    {
        cmd->add_option("--system", f.system, "System to run: ball or aslip")->check(CLI::IsMember({"ball", "aslip"}));
        cmd->add_option("--config", f.config, "JSON config file; flags override its values");
        cmd->add_option("--seed", f.seed, "Base seed for all random streams");
        cmd->add_option("--duration", f.duration, "Trial length [s]");
        cmd->add_option("--dt", f.dt, "Sample interval [s]");
        cmd->add_option("--out", f.out, "Output directory (default $HILQE_OUT_ROOT/<system> or runs/<system>)");
        cmd->add_option("--preset", f.preset, "desk (default) or paper scale")->check(CLI::IsMember({"desk", "paper"}));
        cmd->add_option("--mode-window-ms", f.mode_window_ms, "Half width of the mode-accuracy window [ms]");
        cmd->add_flag("-v,--verbose", f.verbose, "More console output");
    }

    json flags_to_json(const Flags &f)
    {
        json j = json::object();
        if (f.system)
            j["system"] = *f.system;
        if (f.seed)
            j["seed"] = *f.seed;
        if (f.trials)
            j["trials"] = *f.trials;
        if (f.duration)
            j["duration"] = *f.duration;
        if (f.dt)
            j["dt"] = *f.dt;
        if (f.out)
            j["out"] = *f.out;
        if (f.jobs)
            j["jobs"] = *f.jobs;
        if (f.preset)
            j["preset"] = *f.preset;
        if (f.estimator)
            j["estimator"] = *f.estimator;
        if (f.mode_window_ms)
            j["mode_window_ms"] = *f.mode_window_ms;
        if (f.ablation)
            j["ablation"] = true;
        if (f.verbose)
            j["verbosity"] = f.verbose;
        return j;
    }

    hilqe::RunConfig resolve(const Flags &f)
    {
        const json file = f.config ? hilqe::load_json_file(*f.config) : json::object();
        return hilqe::parse_config(file, flags_to_json(f));
    }

    std::ofstream open_out(const fs::path &p)
    {
        std::ofstream os(p);
        if (!os)
            throw hilqe::Error(hilqe::ErrorCode::IoError, "cannot write " + p.string());
        return os;
    }

    void write_measurements(const fs::path &p, const hilqe::HybridTrajectory &truth, const std::vector<hilqe::Vector> &Y)
    {
        std::ofstream os = open_out(p);
        os << "t";
        if (!Y.empty())
            for (Eigen::Index j = 0; j < Y.front().size(); ++j)
                os << ",y_" << j;
        os << '\n';
        for (std::size_t i = 0; i < Y.size(); ++i)
        {
            os << hilqe::format_double(truth.samples[i + 1].t);
            for (Eigen::Index j = 0; j < Y[i].size(); ++j)
                os << ',' << hilqe::format_double(Y[i](j));
            os << '\n';
        }
    }

    int state_dim(const hilqe::TrialSpec &s) { return static_cast<int>(s.x0_mean.size()); }

    int cmd_simulate(const Flags &f)
    {
        const hilqe::RunConfig cfg = resolve(f);
        fs::create_directories(cfg.out_dir);
        const hilqe::TrialData d = hilqe::generate_trial(cfg.spec, f.trial);
        hilqe::save_trajectory(cfg.out_dir / "truth", d.truth, state_dim(cfg.spec));
        write_measurements(cfg.out_dir / "measurements.csv", d.truth, d.Y);
        std::cout << "simulated " << d.truth.steps() << " steps, " << d.truth.events.size() << " events -> "
                  << cfg.out_dir.string() << '\n';
        return 0;
    }

    int cmd_estimate(const Flags &f)
    {
        const hilqe::RunConfig cfg = resolve(f);
        const hilqe::TrialSpec &spec = cfg.spec;
        fs::create_directories(cfg.out_dir);
        const hilqe::HybridModel model = hilqe::make_model(spec);
        hilqe::TrialData d = hilqe::generate_trial(spec, f.trial);
        hilqe::save_trajectory(cfg.out_dir / "truth", d.truth, state_dim(spec));
        write_measurements(cfg.out_dir / "measurements.csv", d.truth, d.Y);
        const hilqe::EstimationProblem prob = hilqe::make_problem(spec, model, d.Y);

        if (cfg.estimator != hilqe::EstimatorChoice::Skf)
        {
            const hilqe::SolveResult r = hilqe::solve(prob, hilqe::initial_iterate(prob, spec.solver.integrator), spec.solver);
            hilqe::save_trajectory(cfg.out_dir / "hilqe", r.iterate.traj, state_dim(spec));
            std::ofstream log = open_out(cfg.out_dir / "solver_log.csv");
            hilqe::write_solver_log_csv(log, r.stats);
            std::cout << "hilqe: J = " << r.iterate.cost << " after " << r.stats.accepted_steps << " accepted steps ("
                      << (r.stats.converged ? "converged" : "stopped") << "), " << r.iterate.traj.events.size()
                      << " events\n";
        }
        if (cfg.estimator != hilqe::EstimatorChoice::Hilqe)
        {
            const hilqe::SkfRun run = hilqe::run_skf(prob, spec.V_cov, spec.W_cov, spec.P_0, spec.solver.integrator);
            hilqe::save_trajectory(cfg.out_dir / "skf", run.trajectory(spec.dt), state_dim(spec));
            std::ofstream os = open_out(cfg.out_dir / "skf_beliefs.csv");
            hilqe::write_beliefs_csv(os, run.beliefs);
            std::cout << "skf: " << run.events.size() << " events\n";
        }
        return 0;
    }

    int cmd_bench(const Flags &f)
    {
        const hilqe::RunConfig cfg = resolve(f);
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<hilqe::TrialResult> results = hilqe::run_comparison(cfg.spec, cfg.jobs);
        const hilqe::MetricsSummary m = hilqe::aggregate_metrics(results, cfg.spec.seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        hilqe::export_results(cfg.spec, results, m, cfg.out_dir, secs);
        hilqe::render_plots(m, cfg.out_dir, hilqe::make_model(cfg.spec).state_names);

        std::cout << "trials " << m.trials << ", failures " << m.failures << '\n'
                  << "median MSE improvement " << m.median_mse_improvement_pct << " %\n"
                  << "peak timestep improvement " << m.peak_timestep_improvement_pct << " %\n"
                  << "mode accuracy near impacts: hilqe " << m.mode_accuracy_hilqe << ", skf " << m.mode_accuracy_skf
                  << '\n'
                  << "results in " << cfg.out_dir.string() << '\n';
        if (cfg.verbosity > 0)
            for (const hilqe::TrialResult &r : results)
                if (!r.ok)
                    std::cerr << "trial " << r.index << ": " << r.failure << '\n';
        if (m.failures > 0)
        {
            std::cerr << "error: " << m.failures << " trial(s) failed\n";
            return 1;
        }
        return 0;
    }

    int cmd_plot(const Flags &f)
    {
        if (!f.input)
            throw hilqe::Error(hilqe::ErrorCode::ConfigError, "plot needs --in <metrics.csv>");
        std::ifstream is(*f.input);
        if (!is)
            throw hilqe::Error(hilqe::ErrorCode::IoError, "cannot open " + *f.input);
        const hilqe::MetricsSummary m = hilqe::read_metrics_csv(is);
        const fs::path out = f.out ? fs::path(*f.out) : fs::path(*f.input).parent_path();
        std::vector<std::string> names;
        if (m.state_dim == 4)
            names = hilqe::make_ball().state_names;
        else if (m.state_dim == hilqe::aslip::kDim)
            names = hilqe::make_aslip().state_names;
        for (const fs::path &p : hilqe::render_plots(m, out.empty() ? fs::path(".") : out, names))
            std::cout << p.string() << '\n';
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Hybrid iterative linear-quadratic estimation and salted Kalman filtering"};
    app.require_subcommand(1);
    Flags f;

    CLI::App *simulate = app.add_subcommand("simulate", "Simulate one noisy trial: truth and measurement CSVs");
    add_common(simulate, f);
    simulate->add_option("--trial", f.trial, "Trial index within the seed")->check(CLI::NonNegativeNumber);

    CLI::App *estimate = app.add_subcommand("estimate", "Estimate one simulated trial with HiLQE and/or the SKF");
    add_common(estimate, f);
    estimate->add_option("--trial", f.trial, "Trial index within the seed")->check(CLI::NonNegativeNumber);
    estimate->add_option("--estimator", f.estimator, "hilqe, skf or both")->check(CLI::IsMember({"hilqe", "skf", "both"}));

    CLI::App *bench = app.add_subcommand("bench", "Monte-Carlo comparison with metrics and plots");
    add_common(bench, f);
    bench->add_option("--trials", f.trials, "Number of trials");
    bench->add_option("--jobs", f.jobs, "Worker threads");
    bench->add_flag("--ablation", f.ablation, "Also solve with the reset Jacobian in place of the saltation matrix");

    CLI::App *plot = app.add_subcommand("plot", "Re-render charts from an existing metrics.csv");
    plot->add_option("--in", f.input, "metrics.csv to render")->required();
    plot->add_option("--out", f.out, "Output directory (default: next to the input)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try
    {
        if (simulate->parsed())
            return cmd_simulate(f);
        if (estimate->parsed())
            return cmd_estimate(f);
        if (bench->parsed())
            return cmd_bench(f);
        return cmd_plot(f);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
