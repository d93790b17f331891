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

#include "hilqe/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace hilqe
{
    using nlohmann::json;

    namespace
    {
        [[noreturn]] void fail(const std::string &path, const std::string &msg)
        {
            throw Error(ErrorCode::ConfigError, path + ": " + msg);
        }

        double as_number(const json &v, const std::string &path)
        {
            if (!v.is_number())
                fail(path, "expected a number");
            return v.get<double>();
        }

        int as_int(const json &v, const std::string &path)
        {
            if (!v.is_number_integer())
                fail(path, "expected an integer");
            return v.get<int>();
        }

        Matrix as_matrix(const json &v, int size, const std::string &path)
        {
            if (v.is_number())
                return v.get<double>() * Matrix::Identity(size, size);
            if (!v.is_array() || static_cast<int>(v.size()) != size)
                fail(path, "expected a number or a " + std::to_string(size) + "x" + std::to_string(size) + " array");
            Matrix M(size, size);
            for (int r = 0; r < size; ++r)
            {
                const json &row = v[static_cast<std::size_t>(r)];
                if (!row.is_array() || static_cast<int>(row.size()) != size)
                    fail(path + "[" + std::to_string(r) + "]", "expected " + std::to_string(size) + " entries");
                for (int c = 0; c < size; ++c)
                    M(r, c) = as_number(row[static_cast<std::size_t>(c)], path);
            }
            return M;
        }

        Vector as_vector(const json &v, int size, const std::string &path)
        {
            if (!v.is_array() || static_cast<int>(v.size()) != size)
                fail(path, "expected " + std::to_string(size) + " entries");
            Vector x(size);
            for (int j = 0; j < size; ++j)
                x(j) = as_number(v[static_cast<std::size_t>(j)], path);
            return x;
        }

        json matrix_json(const Matrix &M)
        {
            json rows = json::array();
            for (Eigen::Index r = 0; r < M.rows(); ++r)
            {
                json row = json::array();
                for (Eigen::Index c = 0; c < M.cols(); ++c)
                    row.push_back(M(r, c));
                rows.push_back(row);
            }
            return rows;
        }

        json vector_json(const Vector &v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

        const std::vector<std::string> kTopLevelKeys = {
            "system", "seed", "trials", "duration", "dt", "W_cov", "V_cov", "P_0", "x0_mean", "p0_floor",
            "mode_window_ms", "process_noise_units", "ball", "aslip", "solver", "out", "input", "jobs",
            "verbosity", "estimator", "preset", "ablation"};

        void reject_unknown(const json &obj, const std::vector<std::string> &known, const std::string &path)
        {
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (std::find(known.begin(), known.end(), it.key()) == known.end())
                    fail(path + it.key(), "unknown key");
        }

        void apply_ball(BallParams &p, const json &v)
        {
            reject_unknown(v, {"restitution", "gravity"}, "ball.");
            if (v.contains("restitution"))
                p.restitution = as_number(v["restitution"], "ball.restitution");
            if (v.contains("gravity"))
                p.gravity = as_number(v["gravity"], "ball.gravity");
        }

        void apply_aslip(AslipParams &p, const json &v)
        {
            const std::vector<std::pair<std::string, double *>> fields = {
                {"body_mass", &p.body_mass},         {"gravity", &p.gravity},
                {"hip_offset", &p.hip_offset},       {"body_inertia", &p.body_inertia},
                {"hip_stiffness", &p.hip_stiffness}, {"leg_stiffness", &p.leg_stiffness},
                {"leg_rest_length", &p.leg_rest_length}, {"hip_rest_angle", &p.hip_rest_angle}};
            std::vector<std::string> known;
            for (const auto &f : fields)
                known.push_back(f.first);
            reject_unknown(v, known, "aslip.");
            for (const auto &[key, dst] : fields)
                if (v.contains(key))
                    *dst = as_number(v[key], "aslip." + key);
        }

        void apply_solver(SolverConfig &c, const json &v)
        {
            reject_unknown(v,
                           {"max_outer_iters", "max_line_search_iters", "alpha_initial", "alpha_factor",
                            "cost_decrease_tol", "mu_min", "mu_max", "mu_scale", "divergence_bound", "use_saltation",
                            "tol_g", "max_bisections", "eps_trans"},
                           "solver.");
            auto num = [&](const char *k, double &dst) {
                if (v.contains(k))
                    dst = as_number(v[k], std::string("solver.") + k);
            };
            auto integer = [&](const char *k, int &dst) {
                if (v.contains(k))
                    dst = as_int(v[k], std::string("solver.") + k);
            };
            integer("max_outer_iters", c.max_outer_iters);
            integer("max_line_search_iters", c.max_line_search_iters);
            num("alpha_initial", c.alpha_initial);
            num("alpha_factor", c.alpha_factor);
            num("cost_decrease_tol", c.cost_decrease_tol);
            num("mu_min", c.mu_min);
            num("mu_max", c.mu_max);
            num("mu_scale", c.mu_scale);
            num("divergence_bound", c.divergence_bound);
            num("tol_g", c.integrator.tol_g);
            integer("max_bisections", c.integrator.max_bisections);
            num("eps_trans", c.integrator.eps_trans);
            if (v.contains("use_saltation"))
            {
                if (!v["use_saltation"].is_boolean())
                    fail("solver.use_saltation", "expected a boolean");
                c.use_saltation = v["use_saltation"].get<bool>();
            }
            if (c.max_outer_iters <= 0 || c.max_line_search_iters < 0)
                fail("solver", "iteration limits must be positive");
            if (!(c.alpha_initial > 0.0 && c.alpha_initial <= 1.0) || !(c.alpha_factor > 0.0 && c.alpha_factor < 1.0))
                fail("solver", "alpha_initial must lie in (0, 1] and alpha_factor in (0, 1)");
            if (!(c.mu_min > 0.0 && c.mu_max > c.mu_min && c.mu_scale > 1.0))
                fail("solver", "regularization needs 0 < mu_min < mu_max and mu_scale > 1");
        }
    } // namespace

    json load_json_file(const std::filesystem::path &path)
    {
        std::ifstream f(path);
        if (!f)
            throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
        try
        {
            return json::parse(f);
        }
        catch (const json::parse_error &e)
        {
            throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
        }
    }

    RunConfig parse_config(const json &file_values, const json &flag_values)
    {
        json merged = file_values.is_null() ? json::object() : file_values;
        if (!merged.is_object())
            fail("config", "top level must be an object");
        reject_unknown(merged, kTopLevelKeys, "");
        if (!flag_values.is_null())
        {
            reject_unknown(flag_values, kTopLevelKeys, "");
            for (auto it = flag_values.begin(); it != flag_values.end(); ++it)
            {
                if (it->is_object() && merged.contains(it.key()) && merged[it.key()].is_object())
                    merged[it.key()].update(*it);
                else
                    merged[it.key()] = *it;
            }
        }

        if (!merged.contains("system"))
            fail("system", "required field is missing (ball or aslip)");
        if (!merged["system"].is_string())
            fail("system", "expected a string");
        const SystemKind kind = system_kind_from_string(merged["system"].get<std::string>());

        RunConfig cfg;
        if (merged.contains("preset"))
        {
            cfg.preset = merged["preset"].get<std::string>();
            if (cfg.preset != "desk" && cfg.preset != "paper")
                fail("preset", "expected 'desk' or 'paper'");
        }
        const bool paper = cfg.preset == "paper";
        TrialSpec &s = cfg.spec;
        if (kind == SystemKind::Ball)
        {
            s = ball_defaults();
            if (paper)
                s.trials = 1000;
        }
        else
        {
            s = aslip_defaults(paper);
        }
        const int n = s.system == SystemKind::Ball ? 4 : aslip::kDim;
        const int m = s.system == SystemKind::Ball ? 2 : 5;

        if (merged.contains("ball"))
            apply_ball(s.ball, merged["ball"]);
        if (merged.contains("aslip"))
            apply_aslip(s.aslip, merged["aslip"]);
        if (merged.contains("solver"))
            apply_solver(s.solver, merged["solver"]);
        if (merged.contains("seed"))
        {
            if (!merged["seed"].is_number_unsigned() && !merged["seed"].is_number_integer())
                fail("seed", "expected a non-negative integer");
            s.seed = merged["seed"].get<std::uint64_t>();
        }
        if (merged.contains("trials"))
            s.trials = as_int(merged["trials"], "trials");
        if (merged.contains("duration"))
            s.duration = as_number(merged["duration"], "duration");
        if (merged.contains("dt"))
            s.dt = as_number(merged["dt"], "dt");
        if (!(s.dt > 0.0))
            fail("dt", "must be positive");

        NoiseUnits units = default_noise_units(s.system);
        if (merged.contains("process_noise_units"))
        {
            if (!merged["process_noise_units"].is_string())
                fail("process_noise_units", "expected a string");
            try
            {
                units = noise_units_from_string(merged["process_noise_units"].get<std::string>());
            }
            catch (const Error &)
            {
                fail("process_noise_units", "expected 'per_step', 'per_second' or 'per_second_squared'");
            }
        }
        if (merged.contains("W_cov"))
            s.W_cov = per_step_noise(as_matrix(merged["W_cov"], n, "W_cov"), units, s.dt);
        else
            s.W_cov = per_step_noise(0.1 * Matrix::Identity(n, n), units, s.dt);
        if (merged.contains("V_cov"))
            s.V_cov = as_matrix(merged["V_cov"], m, "V_cov");
        if (merged.contains("P_0"))
            s.P_0 = as_matrix(merged["P_0"], n, "P_0");
        if (merged.contains("x0_mean"))
            s.x0_mean = as_vector(merged["x0_mean"], n, "x0_mean");
        if (merged.contains("p0_floor"))
            s.p0_floor = as_number(merged["p0_floor"], "p0_floor");
        if (merged.contains("mode_window_ms"))
            s.mode_window = 1e-3 * as_number(merged["mode_window_ms"], "mode_window_ms");
        if (merged.contains("ablation"))
            s.run_ablation = merged["ablation"].get<bool>();

        if (merged.contains("jobs"))
        {
            cfg.jobs = as_int(merged["jobs"], "jobs");
            if (cfg.jobs < 1)
                fail("jobs", "must be at least 1");
        }
        if (merged.contains("verbosity"))
            cfg.verbosity = as_int(merged["verbosity"], "verbosity");
        if (merged.contains("estimator"))
        {
            const std::string e = merged["estimator"].get<std::string>();
            if (e == "hilqe")
                cfg.estimator = EstimatorChoice::Hilqe;
            else if (e == "skf")
                cfg.estimator = EstimatorChoice::Skf;
            else if (e == "both")
                cfg.estimator = EstimatorChoice::Both;
            else
                fail("estimator", "expected hilqe, skf or both");
        }
        cfg.out_dir = merged.contains("out") ? std::filesystem::path(merged["out"].get<std::string>())
                                             : default_output_root() / to_string(kind);
        if (merged.contains("input"))
            cfg.input = merged["input"].get<std::string>();

        try
        {
            validate(s.ball);
            validate(s.aslip);
            s.validate();
        }
        catch (const Error &e)
        {
            throw Error(ErrorCode::ConfigError, e.what());
        }
        return cfg;
    }

    json trial_spec_to_json(const TrialSpec &s)
    {
        json j;
        j["system"] = to_string(s.system);
        j["seed"] = s.seed;
        j["trials"] = s.trials;
        j["duration"] = s.duration;
        j["dt"] = s.dt;
        j["process_noise_units"] = "per_step";
        j["W_cov"] = matrix_json(s.W_cov);
        j["V_cov"] = matrix_json(s.V_cov);
        j["P_0"] = matrix_json(s.P_0);
        j["x0_mean"] = vector_json(s.x0_mean);
        j["p0_floor"] = s.p0_floor;
        j["mode_window_ms"] = 1e3 * s.mode_window;
        j["ablation"] = s.run_ablation;
        if (s.system == SystemKind::Ball)
            j["ball"] = {{"restitution", s.ball.restitution}, {"gravity", s.ball.gravity}};
        else
            j["aslip"] = {{"body_mass", s.aslip.body_mass},
                          {"gravity", s.aslip.gravity},
                          {"hip_offset", s.aslip.hip_offset},
                          {"body_inertia", s.aslip.body_inertia},
                          {"hip_stiffness", s.aslip.hip_stiffness},
                          {"leg_stiffness", s.aslip.leg_stiffness},
                          {"leg_rest_length", s.aslip.leg_rest_length},
                          {"hip_rest_angle", s.aslip.hip_rest_angle}};
        const SolverConfig &c = s.solver;
        j["solver"] = {{"max_outer_iters", c.max_outer_iters},
                       {"max_line_search_iters", c.max_line_search_iters},
                       {"alpha_initial", c.alpha_initial},
                       {"alpha_factor", c.alpha_factor},
                       {"cost_decrease_tol", c.cost_decrease_tol},
                       {"mu_min", c.mu_min},
                       {"mu_max", c.mu_max},
                       {"mu_scale", c.mu_scale},
                       {"divergence_bound", c.divergence_bound},
                       {"use_saltation", c.use_saltation},
                       {"tol_g", c.integrator.tol_g},
                       {"max_bisections", c.integrator.max_bisections},
                       {"eps_trans", c.integrator.eps_trans}};
        return j;
    }

    std::string git_blob_hash(const std::string &content)
    {
        const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr);
        std::ostringstream os;
        for (unsigned int i = 0; i < len; ++i)
            os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
        return os.str();
    }

    std::filesystem::path default_output_root()
    {
        if (const char *root = std::getenv("HILQE_OUT_ROOT"); root && *root)
            return root;
        return "runs";
    }

} // namespace hilqe
