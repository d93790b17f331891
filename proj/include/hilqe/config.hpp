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

#ifndef HILQE_CONFIG_HPP
#define HILQE_CONFIG_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hilqe/harness.hpp"

namespace hilqe
{
    enum class EstimatorChoice
    {
        Hilqe,
        Skf,
        Both,
    };

    struct RunConfig
    {
        TrialSpec spec;
        std::string preset = "desk";
        std::filesystem::path out_dir;
        std::filesystem::path input; // plot: metrics.csv to re-render
        int jobs = 1;
        int verbosity = 0;
        EstimatorChoice estimator = EstimatorChoice::Both;
    };

    /// Reads a JSON config file; errors name the file.
    nlohmann::json load_json_file(const std::filesystem::path &path);

    /**
     * Merges system defaults, file values and flag values (flags win) into a
     * validated RunConfig. Both inputs use the same keys, e.g. "system",
     * "trials", "seed", "W_cov", "solver": {"max_outer_iters": ...}.
     * Covariances accept a scalar (times identity) or a nested array.
     * "W_cov" is converted to a per-step covariance according to "process_noise_units"
     * (default depends on the system, see default_noise_units).
     */
    RunConfig parse_config(const nlohmann::json &file_values, const nlohmann::json &flag_values);

    nlohmann::json trial_spec_to_json(const TrialSpec &spec);

    /// SHA-1 over "blob <size>\0<content>", hex encoded.
    std::string git_blob_hash(const std::string &content);

    /// Default output root: $HILQE_OUT_ROOT or "runs".
    std::filesystem::path default_output_root();

} // namespace hilqe

#endif // HILQE_CONFIG_HPP
