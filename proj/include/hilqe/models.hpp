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

#ifndef HILQE_MODELS_HPP
#define HILQE_MODELS_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hilqe/hybrid_system.hpp"

namespace hilqe
{
    struct MeasurementModel
    {
        int m = 0;
        std::function<Vector(const Vector &x)> h;
        std::function<Matrix(const Vector &x)> H;
    };

    /// System plus its paired measurement model.
    struct HybridModel
    {
        std::shared_ptr<const HybridSystem> system;
        MeasurementModel measurement;
        std::vector<std::string> state_names;
        ModeId initial_mode;
    };

    // ---------------------------------------------------------------- ball

    struct BallParams
    {
        double restitution = 0.8;
        double gravity = 9.8;
    };

    namespace ball
    {
        inline constexpr ModeId kFlight{0};
        enum Index { X = 0, Y = 1, VX = 2, VY = 3 };
    } // namespace ball

    /// Planar bouncing ball, state [x, y, xdot, ydot], one mode with a self-loop at y = 0.
    /// Measures position only.
    HybridModel make_ball(const BallParams &p = {});

    /// Closed-form ballistic flight (no impact) used as an oracle.
    Vector analytic_ball_flow(const Vector &q0, double t, const BallParams &p = {});

    double ball_energy(const Vector &q, const BallParams &p = {});

    Vector ball_default_initial_state();

    // ---------------------------------------------------------------- ASLIP

    struct AslipParams
    {
        double body_mass = 1.0;       // m_b [kg]
        double gravity = 9.8;         // a_g [m/s^2]
        double hip_offset = 0.5;      // l_b [m], hip sits this far below the CoM along the body axis
        double body_inertia = 1.0;    // I_b [kg m^2]
        double hip_stiffness = 100.0; // k_h [N m/rad]
        double leg_stiffness = 100.0; // k_l [N/m]
        double leg_rest_length = 1.0; // l_0 [m]
        double hip_rest_angle = 0.0;  // phi_0 [rad]
    };

    namespace aslip
    {
        inline constexpr ModeId kFlight{0};
        inline constexpr ModeId kStance{1};
        enum Index { XB = 0, YB = 1, THETA = 2, XT = 3, YT = 4, VXB = 5, VYB = 6, OMEGA = 7 };
        inline constexpr int kDim = 8;
    } // namespace aslip

    /// ASLIP hopper with state [x_b, y_b, theta_b, x_t, y_t, xdot_b, ydot_b, thetadot_b].
    /// Flight: ballistic body, toe carried rigidly with the body. Stance: toe pinned,
    /// Lagrangian body dynamics with leg and hip springs. Measures the five positions.
    HybridModel make_aslip(const AslipParams &p = {});

    Vector aslip_default_initial_state();

    /// Hip attachment point in the world frame.
    Eigen::Vector2d aslip_hip(const Vector &q, const AslipParams &p);
    /// Distance from hip to toe.
    double aslip_leg_length(const Vector &q, const AslipParams &p);
    /// Total mechanical energy; spring potentials only count in stance.
    double aslip_energy(const Vector &q, ModeId mode, const AslipParams &p);
    /// Stance vector field (exposed for tests).
    Vector aslip_stance_field(const Vector &q, const AslipParams &p);
    Vector aslip_flight_field(const Vector &q, const AslipParams &p);

    void validate(const BallParams &p);
    void validate(const AslipParams &p);

} // namespace hilqe

#endif // HILQE_MODELS_HPP
