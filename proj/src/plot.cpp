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

#include "hilqe/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hilqe
{
    namespace
    {
        constexpr const char *kHilqeColor = "#1f4e9c";
        constexpr const char *kSkfColor = "#c0392b";

        std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            return buf;
        }

        std::string tick_label(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%g", std::abs(v) < 1e-12 ? 0.0 : v);
            return buf;
        }

        double nice_step(double span)
        {
            if (!(span > 0.0) || !std::isfinite(span))
                return 1.0;
            const double raw = span / 5.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            const double r = raw / mag;
            return mag * (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0);
        }

        std::string escape(const std::string &s)
        {
            std::string out;
            for (char c : s)
            {
                if (c == '<')
                    out += "&lt;";
                else if (c == '>')
                    out += "&gt;";
                else if (c == '&')
                    out += "&amp;";
                else
                    out += c;
            }
            return out;
        }

        // Draws one chart into `os` inside the box (ox, oy, w, h).
        void draw_panel(std::ostringstream &os, double ox, double oy, double w, double h, const std::vector<double> &x,
                        const std::vector<Series> &series, const std::string &title, const std::string &x_label,
                        const std::string &y_label, bool legend)
        {
            const double left = ox + 64, right = ox + w - 16, top = oy + 28, bottom = oy + h - 44;

            double x_min = x.empty() ? 0.0 : x.front();
            double x_max = x.empty() ? 1.0 : x.back();
            if (!(x_max > x_min))
                x_max = x_min + 1.0;
            double y_max = 0.0;
            for (const Series &s : series)
                for (double v : s.y)
                    if (std::isfinite(v))
                        y_max = std::max(y_max, v);
            const double y_step = nice_step(y_max);
            y_max = y_step * std::max(1.0, std::ceil(y_max / y_step));
            const double x_step = nice_step(x_max - x_min);

            auto px = [&](double v) { return left + (v - x_min) / (x_max - x_min) * (right - left); };
            auto py = [&](double v) { return bottom - v / y_max * (bottom - top); };

            os << "<text x=\"" << num(ox + w / 2) << "\" y=\"" << num(oy + 18)
               << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
            for (double v = 0.0; v <= y_max + 1e-9 * y_max; v += y_step)
            {
                os << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(right) << "\" y2=\""
                   << num(py(v)) << "\" stroke=\"#e0e0e0\"/>\n";
                os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4)
                   << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(v) << "</text>\n";
            }
            for (double v = std::ceil(x_min / x_step) * x_step; v <= x_max + 1e-9; v += x_step)
            {
                os << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px(v)) << "\" y2=\""
                   << num(bottom + 4) << "\" stroke=\"black\"/>\n";
                os << "<text x=\"" << num(px(v)) << "\" y=\"" << num(bottom + 16)
                   << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(v) << "</text>\n";
            }
            os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
               << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"black\"/>\n";
            os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(oy + h - 8)
               << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
            os << "<text transform=\"translate(" << num(ox + 16) << "," << num((top + bottom) / 2)
               << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(y_label) << "</text>\n";

            for (const Series &s : series)
            {
                os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
                if (s.dashed)
                    os << " stroke-dasharray=\"6,4\"";
                os << " points=\"";
                const std::size_t count = std::min(x.size(), s.y.size());
                for (std::size_t i = 0; i < count; ++i)
                {
                    const double v = std::isfinite(s.y[i]) ? s.y[i] : 0.0;
                    os << num(px(x[i])) << ',' << num(py(v)) << (i + 1 < count ? " " : "");
                }
                os << "\"/>\n";
            }

            if (legend)
            {
                double ly = top + 14;
                for (const Series &s : series)
                {
                    os << "<line x1=\"" << num(right - 130) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(right - 100)
                       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
                       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
                    os << "<text x=\"" << num(right - 94) << "\" y=\"" << num(ly) << "\" font-size=\"11\">"
                       << escape(s.label) << "</text>\n";
                    ly += 16;
                }
            }
        }

        std::string svg_open(double width, double height)
        {
            std::ostringstream os;
            os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
               << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n"
               << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
            return os.str();
        }

        void write_file(const std::filesystem::path &path, const std::string &content)
        {
            std::ofstream f(path);
            if (!f)
                throw Error(ErrorCode::IoError, "cannot write " + path.string());
            f << content;
        }
    } // namespace

    std::string svg_line_chart(const std::vector<double> &x, const std::vector<Series> &series, const std::string &title,
                               const std::string &x_label, const std::string &y_label, double width, double height)
    {
        std::ostringstream os;
        os << svg_open(width, height);
        draw_panel(os, 0, 0, width, height, x, series, title, x_label, y_label, true);
        os << "</svg>\n";
        return os.str();
    }

    std::vector<std::filesystem::path> render_plots(const MetricsSummary &summary, const std::filesystem::path &out_dir,
                                                    const std::vector<std::string> &state_names)
    {
        if (summary.times.empty())
            throw Error(ErrorCode::ParameterError, "nothing to plot: summary has no timesteps");
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);

        std::vector<std::filesystem::path> out;
        const auto magnitude = out_dir / "error_magnitude.svg";
        write_file(magnitude,
                   svg_line_chart(summary.times,
                                  {{summary.mean_error_hilqe, "HiLQE", kHilqeColor, false},
                                   {summary.mean_error_skf, "SKF", kSkfColor, true}},
                                  "Average error magnitude", "time [s]", "error magnitude"));
        out.push_back(magnitude);

        const int n = summary.state_dim;
        if (n > 0)
        {
            const int cols = n <= 4 ? 2 : 4;
            const int rows = (n + cols - 1) / cols;
            const double pw = 360, ph = 260;
            std::ostringstream os;
            os << svg_open(cols * pw, rows * ph);
            for (int j = 0; j < n; ++j)
            {
                std::vector<double> h, s;
                for (std::size_t i = 0; i < summary.times.size(); ++i)
                {
                    h.push_back(summary.mean_dim_error_hilqe[i](j));
                    s.push_back(summary.mean_dim_error_skf[i](j));
                }
                const std::string name =
                    j < static_cast<int>(state_names.size()) ? state_names[static_cast<std::size_t>(j)]
                                                             : "x_" + std::to_string(j);
                draw_panel(os, (j % cols) * pw, (j / cols) * ph, pw, ph, summary.times,
                           {{h, "HiLQE", kHilqeColor, false}, {s, "SKF", kSkfColor, true}}, name, "time [s]",
                           "error magnitude", j == 0);
            }
            os << "</svg>\n";
            const auto grid = out_dir / "error_per_dimension.svg";
            write_file(grid, os.str());
            out.push_back(grid);
        }
        return out;
    }

} // namespace hilqe
