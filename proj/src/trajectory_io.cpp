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

#include "hilqe/trajectory_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hilqe
{
    std::string format_double(double v)
    {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    std::vector<std::string> split_csv_line(const std::string &line)
    {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ','))
            out.push_back(cell);
        if (!line.empty() && line.back() == ',')
            out.emplace_back();
        return out;
    }

    namespace
    {
        double parse_double(const std::string &s)
        {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc())
                throw Error(ErrorCode::IoError, "cannot parse number '" + s + "'");
            return v;
        }

        int parse_int(const std::string &s) { return static_cast<int>(parse_double(s)); }
    } // namespace

    void write_trajectory_csv(std::ostream &os, const HybridTrajectory &traj)
    {
        const int n = traj.samples.empty() ? 0 : static_cast<int>(traj.samples.front().x.size());
        os << "t,mode";
        for (int j = 0; j < n; ++j)
            os << ",x_" << j;
        os << '\n';
        for (const HybridState &s : traj.samples)
        {
            os << format_double(s.t) << ',' << s.mode.value;
            for (int j = 0; j < n; ++j)
                os << ',' << format_double(s.x(j));
            os << '\n';
        }
    }

    void write_events_csv(std::ostream &os, const std::vector<EventRecord> &events, int n)
    {
        os << "step_index,from,to,t_event";
        for (int j = 0; j < n; ++j)
            os << ",x_minus_" << j;
        for (int j = 0; j < n; ++j)
            os << ",x_plus_" << j;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                os << ",salt_" << r << '_' << c;
        os << '\n';
        for (const EventRecord &e : events)
        {
            os << e.step_index << ',' << e.from.value << ',' << e.to.value << ',' << format_double(e.t_event);
            for (int j = 0; j < n; ++j)
                os << ',' << format_double(e.x_minus(j));
            for (int j = 0; j < n; ++j)
                os << ',' << format_double(e.x_plus(j));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    os << ',' << format_double(e.salt(r, c));
            os << '\n';
        }
    }

    HybridTrajectory read_trajectory_csv(std::istream &is)
    {
        HybridTrajectory traj;
        std::string line;
        if (!std::getline(is, line))
            throw Error(ErrorCode::IoError, "empty trajectory file");
        const auto header = split_csv_line(line);
        if (header.size() < 2 || header[0] != "t" || header[1] != "mode")
            throw Error(ErrorCode::IoError, "trajectory header must start with t,mode");
        const int n = static_cast<int>(header.size()) - 2;
        while (std::getline(is, line))
        {
            if (line.empty())
                continue;
            const auto cells = split_csv_line(line);
            if (static_cast<int>(cells.size()) != n + 2)
                throw Error(ErrorCode::IoError, "ragged trajectory row: " + line);
            HybridState s;
            s.t = parse_double(cells[0]);
            s.mode = ModeId(parse_int(cells[1]));
            s.x.resize(n);
            for (int j = 0; j < n; ++j)
                s.x(j) = parse_double(cells[static_cast<std::size_t>(j) + 2]);
            traj.samples.push_back(std::move(s));
        }
        if (traj.samples.size() > 1)
            traj.dt = traj.samples[1].t - traj.samples[0].t;
        return traj;
    }

    std::vector<EventRecord> read_events_csv(std::istream &is)
    {
        std::vector<EventRecord> events;
        std::string line;
        if (!std::getline(is, line))
            throw Error(ErrorCode::IoError, "empty events file");
        const auto header = split_csv_line(line);
        // 4 + 2n + n^2 columns
        const int extra = static_cast<int>(header.size()) - 4;
        int n = 0;
        while (2 * n + n * n < extra)
            ++n;
        if (extra < 0 || 2 * n + n * n != extra)
            throw Error(ErrorCode::IoError, "malformed events header");
        while (std::getline(is, line))
        {
            if (line.empty())
                continue;
            const auto c = split_csv_line(line);
            if (c.size() != header.size())
                throw Error(ErrorCode::IoError, "ragged events row: " + line);
            EventRecord e;
            e.step_index = parse_int(c[0]);
            e.from = ModeId(parse_int(c[1]));
            e.to = ModeId(parse_int(c[2]));
            e.t_event = parse_double(c[3]);
            e.x_minus.resize(n);
            e.x_plus.resize(n);
            e.salt.resize(n, n);
            std::size_t k = 4;
            for (int j = 0; j < n; ++j)
                e.x_minus(j) = parse_double(c[k++]);
            for (int j = 0; j < n; ++j)
                e.x_plus(j) = parse_double(c[k++]);
            for (int r = 0; r < n; ++r)
                for (int col = 0; col < n; ++col)
                    e.salt(r, col) = parse_double(c[k++]);
            events.push_back(std::move(e));
        }
        return events;
    }

    std::vector<std::filesystem::path> save_trajectory(const std::filesystem::path &stem, const HybridTrajectory &traj,
                                                       int state_dim)
    {
        std::filesystem::path samples = stem;
        samples += ".csv";
        std::filesystem::path events = stem;
        events += "_events.csv";
        std::ofstream a(samples);
        if (!a)
            throw Error(ErrorCode::IoError, "cannot open " + samples.string());
        write_trajectory_csv(a, traj);
        std::ofstream b(events);
        if (!b)
            throw Error(ErrorCode::IoError, "cannot open " + events.string());
        write_events_csv(b, traj.events, state_dim);
        return {samples, events};
    }

} // namespace hilqe
