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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-hilqe-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "hilqe/estimator.hpp"
#include "hilqe/harness.hpp"
#include "hilqe/models.hpp"
#include "hilqe/skf.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace hilqe;
using namespace hilqe::oracle;

namespace
{
    int failures = 0;

    void report(int id, const std::string &name, bool pass, const std::string &detail)
    {
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
        if (!pass)
            ++failures;
    }

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string fmt(double v)
    {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    }

    void saltation_criterion()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const HybridModel ball = make_ball();
        const OrderFit fb = saltation_order(*ball.system, ball_pre_impact_state(), 0.01, 30, generic_direction(4));
        const HybridModel hop = make_aslip();
        const OrderFit fa =
            saltation_order(*hop.system, aslip_pre_touchdown_state(), 1e-3, 100, generic_direction(aslip::kDim));

        Vector xm(4);
        xm << 0.0, 0.0, 0.5, -5.0;
        const Matrix S = saltation(*ball.system, ball.system->transitions()[0], 0.0, xm, Vector());
        const double e_diag = std::abs(S(ball::VY, ball::VY) + 0.8);
        const double e_cross = std::abs(S(ball::VY, ball::Y) - 3.528);
        const double secs = seconds_since(t0);
        const bool pass = fb.events == 1 && fa.events == 1 && fb.order >= 1.9 && fa.order >= 1.9 && e_diag <= 1e-9 &&
                          e_cross <= 1e-9 && secs < 10.0;
        report(1, "saltation", pass,
               "order ball " + fmt(fb.order) + ", aslip touchdown " + fmt(fa.order) + "; |Xi_vy,vy + 0.8| = " +
                   fmt(e_diag) + ", |Xi_vy,y - 3.528| = " + fmt(e_cross) + "; " + fmt(secs) + " s");
    }

    void lq_criterion()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const EstimationProblem p = lq_chain_problem(100);
        const SolveResult r = solve(p, initial_iterate(p));
        const std::vector<Vector> X = normal_equations_states(p);
        double err = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i)
            err = std::max(err, (r.iterate.traj.samples[i].x - X[i]).lpNorm<Eigen::Infinity>());

        const Matrix V = p.P_v.inverse(), W = p.P_w.inverse(), P0 = p.P_x.inverse();
        const SkfRun skf = run_skf(p, V, W, P0);
        const std::vector<KfBelief> kf = textbook_kalman(p, V, W, P0);
        double kf_err = 0.0;
        for (std::size_t i = 0; i < kf.size(); ++i)
        {
            kf_err = std::max(kf_err, (skf.beliefs[i].mean.x - kf[i].mean).lpNorm<Eigen::Infinity>());
            kf_err = std::max(kf_err, (skf.beliefs[i].P - kf[i].P).lpNorm<Eigen::Infinity>());
        }
        const double secs = seconds_since(t0);
        const bool pass = r.stats.accepted_steps == 1 && err <= 1e-8 && kf_err <= 1e-10 && secs < 5.0;
        report(2, "LQ exactness", pass,
               "accepted steps " + std::to_string(r.stats.accepted_steps) + ", max |x - x_normal| = " + fmt(err) +
                   ", max SKF-KF gap = " + fmt(kf_err) + "; " + fmt(secs) + " s");
    }

    // Fraction of timesteps near any true event where the mean HiLQE error is at most the SKF's.
    double near_impact_dominance(const std::vector<TrialResult> &results, const MetricsSummary &m, double window)
    {
        std::vector<char> near(m.times.size(), 0);
        for (const TrialResult &r : results)
        {
            if (!r.ok)
                continue;
            for (const EventRecord &e : r.truth.events)
                for (std::size_t i = 0; i < m.times.size(); ++i)
                    if (std::abs(m.times[i] - e.t_event) <= window + 1e-12)
                        near[i] = 1;
        }
        int total = 0, good = 0;
        for (std::size_t i = 0; i < near.size(); ++i)
            if (near[i])
            {
                ++total;
                good += m.mean_error_hilqe[i] <= m.mean_error_skf[i];
            }
        return total ? static_cast<double>(good) / total : 0.0;
    }

    bool same_bytes(const fs::path &a, const fs::path &b)
    {
        std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
        if (!fa || !fb)
            return false;
        const std::string sa((std::istreambuf_iterator<char>(fa)), {});
        const std::string sb((std::istreambuf_iterator<char>(fb)), {});
        return sa == sb;
    }
} // namespace

int main(int argc, char **argv)
{
    if (argc < 3)
    {
        std::cerr << "usage: acceptance <hilqe-cli> <scratch-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    fs::create_directories(scratch);

    saltation_criterion();
    lq_criterion();

    // Ball desk scale, with the ablation solve on the same data.
    TrialSpec ball = ball_defaults();
    ball.run_ablation = true;
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<TrialResult> ball_res = run_comparison(ball, 2);
    const MetricsSummary bm = aggregate_metrics(ball_res, ball.seed);
    const double ball_secs = seconds_since(t0);

    TrialSpec hop = aslip_defaults(false);
    t0 = std::chrono::steady_clock::now();
    const std::vector<TrialResult> hop_res = run_comparison(hop, 2);
    const MetricsSummary am = aggregate_metrics(hop_res, hop.seed);
    const double hop_secs = seconds_since(t0);

    report(3, "cost monotonicity", bm.monotonicity_violations + am.monotonicity_violations == 0,
           std::to_string(bm.monotonicity_violations + am.monotonicity_violations) + " violations over " +
               std::to_string(bm.trials + am.trials) + " trials");

    {
        const double med = bm.median_mse_improvement_pct, peak = bm.peak_timestep_improvement_pct;
        const bool pass = bm.failures == 0 && med > 0.0 && std::abs(med - 30.48) <= 15.0 && peak >= 30.0 &&
                          ball_secs < 300.0;
        report(4, "ball improvement", pass,
               "median " + fmt(med) + " % (band 15.48..45.48), peak " + fmt(peak) + " %, failures " +
                   std::to_string(bm.failures) + "; " + fmt(ball_secs) + " s");
    }
    {
        const double frac = near_impact_dominance(hop_res, am, 0.05);
        const bool pass =
            am.failures == 0 && frac >= 0.9 && am.median_mse_improvement_pct >= 30.0 && hop_secs < 1800.0;
        report(5, "aslip improvement", pass,
               "HiLQE <= SKF at " + fmt(100 * frac) + " % of near-impact steps, median " +
                   fmt(am.median_mse_improvement_pct) + " %, peak " + fmt(am.peak_timestep_improvement_pct) +
                   " %, failures " + std::to_string(am.failures) + "; " + fmt(hop_secs) + " s");
    }
    report(6, "ball mode accuracy", bm.mode_accuracy_diff_lower95 > 0.0,
           "hilqe " + fmt(bm.mode_accuracy_hilqe) + ", skf " + fmt(bm.mode_accuracy_skf) +
               ", 95% lower bound of difference " + fmt(bm.mode_accuracy_diff_lower95));
    {
        int worse = 0, ok = 0;
        for (const TrialResult &r : ball_res)
            if (r.ok)
            {
                ++ok;
                worse += r.cost_ablation > r.cost_hilqe;
            }
        const double frac = ok ? static_cast<double>(worse) / ok : 0.0;
        report(7, "ablation", frac >= 0.8,
               "reset-Jacobian cost higher in " + std::to_string(worse) + " of " + std::to_string(ok) + " trials");
    }
    {
        const HybridModel m = make_ball();
        const HybridSystem &sys = *m.system;
        HybridTrajectory ref;
        ref.dt = 0.01;
        Vector before(4), after(4);
        before << 0.0, 0.0, 0.0, -10.1;
        after << 0.0, 0.0, 0.0, 8.0;
        ref.samples = {{ball::kFlight, before, 0.0}, {ball::kFlight, before, 0.01}};
        EventRecord ev;
        ev.step_index = 1;
        ev.from = ev.to = ball::kFlight;
        ev.t_event = 0.01;
        ev.x_minus = before;
        ev.x_plus = sys.transitions()[0].reset(0.01, before);
        ev.salt = saltation(sys, sys.transitions()[0], 0.01, before, Vector());
        ref.events = {ev};
        const Vector d = reference_extension(sys, ref, {ball::kFlight, after, 0.01}, 1, 1, {});
        const double naive = after(ball::VY) - before(ball::VY);
        report(8, "reference extension", std::abs(d(ball::VY) + 0.08) <= 1e-12,
               "delta ydot = " + fmt(d(ball::VY)) + " (naive " + fmt(naive) + ")");
    }
    {
        const fs::path a = scratch / "det_a", b = scratch / "det_b";
        fs::remove_all(a);
        fs::remove_all(b);
        const std::string base = "\"" + cli + "\" bench --system ball --trials 10 --seed 7 --jobs 2 --out ";
        const int ra = std::system((base + "\"" + a.string() + "\" > /dev/null").c_str());
        const int rb = std::system((base + "\"" + b.string() + "\" > /dev/null").c_str());
        bool same = ra == 0 && rb == 0;
        int files = 0;
        if (same)
            for (const auto &e : fs::directory_iterator(a))
            {
                const std::string name = e.path().filename().string();
                if (name == "manifest.json")
                    continue; // carries wall-clock time
                ++files;
                same = same && same_bytes(e.path(), b / name);
            }
        report(9, "determinism", same && files > 0,
               std::to_string(files) + " output files compared (metrics.csv, trial CSVs, plots)");
    }

    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criterion/criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
