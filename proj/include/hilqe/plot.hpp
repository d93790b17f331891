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

#ifndef HILQE_PLOT_HPP
#define HILQE_PLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "hilqe/harness.hpp"

namespace hilqe
{
    struct Series
    {
        std::vector<double> y;
        std::string label;
        std::string color;
        bool dashed = false;
    };

    /// Minimal SVG line chart.
    std::string svg_line_chart(const std::vector<double> &x, const std::vector<Series> &series, const std::string &title,
                               const std::string &x_label, const std::string &y_label, double width = 640,
                               double height = 400);

    /// error_magnitude.svg (total error) and error_per_dimension.svg (one panel per state).
    std::vector<std::filesystem::path> render_plots(const MetricsSummary &summary, const std::filesystem::path &out_dir,
                                                    const std::vector<std::string> &state_names = {});

} // namespace hilqe

#endif // HILQE_PLOT_HPP
