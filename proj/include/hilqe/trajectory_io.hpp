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

#ifndef HILQE_TRAJECTORY_IO_HPP
#define HILQE_TRAJECTORY_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hilqe/hybrid_system.hpp"

namespace hilqe
{
    /// Shortest text form that round-trips a double exactly.
    std::string format_double(double v);
    std::vector<std::string> split_csv_line(const std::string &line);

    // Columns: t, mode, x_0 .. x_{n-1}
    void write_trajectory_csv(std::ostream &os, const HybridTrajectory &traj);
    // Columns: step_index, from, to, t_event, x_minus_*, x_plus_*, salt_* (row-major)
    void write_events_csv(std::ostream &os, const std::vector<EventRecord> &events, int state_dim);

    HybridTrajectory read_trajectory_csv(std::istream &is);
    std::vector<EventRecord> read_events_csv(std::istream &is);

    /// Writes `<stem>.csv` and `<stem>_events.csv`; returns both paths.
    std::vector<std::filesystem::path> save_trajectory(const std::filesystem::path &stem, const HybridTrajectory &traj,
                                                       int state_dim);

} // namespace hilqe

#endif // HILQE_TRAJECTORY_IO_HPP
