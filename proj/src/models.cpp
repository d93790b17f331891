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

#include "hilqe/models.hpp"

#include <cmath>
#include <numbers>

namespace hilqe
{
    namespace
    {
        MeasurementModel position_selector(int n, int m)
        {
            MeasurementModel meas;
            meas.m = m;
            meas.h = [m](const Vector &x) -> Vector { return x.head(m); };
            meas.H = [n, m](const Vector &) -> Matrix { return Matrix::Identity(m, n); };
            return meas;
        }

        ResetJacobian identity_reset_jacobian(int n)
        {
            return {Vector::Zero(n), Matrix::Identity(n, n)};
        }
    } // namespace

    void validate(const BallParams &p)
    {
        if (!(p.restitution > 0.0 && p.restitution < 1.0))
            throw Error(ErrorCode::ParameterError, "ball.restitution must lie in (0, 1)");
        if (!(p.gravity > 0.0))
            throw Error(ErrorCode::ParameterError, "ball.gravity must be positive");
    }

    void validate(const AslipParams &p)
    {
        auto positive = [](double v, const char *name) {
            if (!(v > 0.0))
                throw Error(ErrorCode::ParameterError, std::string("aslip.") + name + " must be positive");
        };
        positive(p.body_mass, "body_mass");
        positive(p.body_inertia, "body_inertia");
        positive(p.hip_stiffness, "hip_stiffness");
        positive(p.leg_stiffness, "leg_stiffness");
        positive(p.leg_rest_length, "leg_rest_length");
        positive(p.gravity, "gravity");
        if (!(p.hip_offset >= 0.0))
            throw Error(ErrorCode::ParameterError, "aslip.hip_offset must be non-negative");
    }

    // ---------------------------------------------------------------- ball

    HybridModel make_ball(const BallParams &p)
    {
        validate(p);
        static constexpr int n = 4;
        const double g = p.gravity;
        const double e = p.restitution;

        Mode flight;
        flight.id = ball::kFlight;
        flight.name = "flight";
        flight.field = [g](double, const Vector &q, const Vector &) -> Vector {
            Vector f(n);
            f << q(ball::VX), q(ball::VY), 0.0, -g;
            return f;
        };
        flight.jacobian = [](double, const Vector &, const Vector &) -> Matrix {
            Matrix A = Matrix::Zero(n, n);
            A(ball::X, ball::VX) = 1.0;
            A(ball::Y, ball::VY) = 1.0;
            return A;
        };

        Transition impact;
        impact.from = ball::kFlight;
        impact.to = ball::kFlight;
        impact.name = "impact";
        impact.guard = [](double, const Vector &q) { return q(ball::Y); };
        impact.guard_gradient = [](double, const Vector &) {
            GuardGradient gg{0.0, Vector::Zero(n)};
            gg.dx(ball::Y) = 1.0;
            return gg;
        };
        impact.reset = [e](double, const Vector &q) -> Vector {
            Vector r = q;
            r(ball::VY) = -e * q(ball::VY);
            return r;
        };
        impact.reset_jacobian = [e](double, const Vector &) {
            ResetJacobian J = identity_reset_jacobian(n);
            J.dx(ball::VY, ball::VY) = -e;
            return J;
        };

        HybridModel model;
        model.system = std::make_shared<const HybridSystem>(n, std::vector<Mode>{flight}, std::vector<Transition>{impact});
        model.measurement = position_selector(n, 2);
        model.state_names = {"x", "y", "xdot", "ydot"};
        model.initial_mode = ball::kFlight;
        return model;
    }

    Vector analytic_ball_flow(const Vector &q0, double t, const BallParams &p)
    {
        Vector q(4);
        q << q0(ball::X) + q0(ball::VX) * t,
            q0(ball::Y) + q0(ball::VY) * t - 0.5 * p.gravity * t * t,
            q0(ball::VX),
            q0(ball::VY) - p.gravity * t;
        return q;
    }

    double ball_energy(const Vector &q, const BallParams &p)
    {
        return 0.5 * (q(ball::VX) * q(ball::VX) + q(ball::VY) * q(ball::VY)) + p.gravity * q(ball::Y);
    }

    Vector ball_default_initial_state()
    {
        Vector q(4);
        q << 0.0, 1.0, 0.5, -5.0;
        return q;
    }

    // ---------------------------------------------------------------- ASLIP

    namespace
    {
        using namespace aslip;

        // Leg geometry and the gradients of leg length and relative leg angle
        // with respect to (x_b, y_b, theta_b, x_t, y_t).
        struct LegGeometry
        {
            Eigen::Vector2d d; // toe - hip
            double length = 0.0;
            double angle = 0.0; // leg angle relative to the body axis
            Eigen::Matrix<double, 5, 1> dlength;
            Eigen::Matrix<double, 5, 1> dangle;
        };

        LegGeometry leg_geometry(const Vector &q, const AslipParams &p)
        {
            const double s = std::sin(q(THETA));
            const double c = std::cos(q(THETA));
            const Eigen::Vector2d hip(q(XB) + p.hip_offset * s, q(YB) - p.hip_offset * c);
            const Eigen::Vector2d dhip_dtheta(p.hip_offset * c, p.hip_offset * s);

            LegGeometry lg;
            lg.d = Eigen::Vector2d(q(XT), q(YT)) - hip;
            lg.length = lg.d.norm();
            const double l = lg.length;
            const double l2 = l * l;
            const double dx = lg.d.x();
            const double dy = lg.d.y();

            lg.dlength << -dx / l, -dy / l, -lg.d.dot(dhip_dtheta) / l, dx / l, dy / l;

            // Absolute leg angle from the downward vertical, psi = atan2(dx, -dy).
            const double psi = std::atan2(dx, -dy);
            lg.angle = std::remainder(psi - q(THETA), 2.0 * std::numbers::pi);
            const double dpsi_dtheta = p.hip_offset * (dy * c - dx * s) / l2;
            lg.dangle << dy / l2, -dx / l2, dpsi_dtheta - 1.0, -dy / l2, dx / l2;
            return lg;
        }
    } // namespace

    Eigen::Vector2d aslip_hip(const Vector &q, const AslipParams &p)
    {
        return {q(XB) + p.hip_offset * std::sin(q(THETA)), q(YB) - p.hip_offset * std::cos(q(THETA))};
    }

    double aslip_leg_length(const Vector &q, const AslipParams &p)
    {
        return (Eigen::Vector2d(q(XT), q(YT)) - aslip_hip(q, p)).norm();
    }

    Vector aslip_flight_field(const Vector &q, const AslipParams &p)
    {
        Vector f = Vector::Zero(kDim);
        f(XB) = q(VXB);
        f(YB) = q(VYB);
        f(THETA) = q(OMEGA);
        // toe rides rigidly with the body: v_t = v_b + omega x (toe - com)
        f(XT) = q(VXB) - q(OMEGA) * (q(YT) - q(YB));
        f(YT) = q(VYB) + q(OMEGA) * (q(XT) - q(XB));
        f(VYB) = -p.gravity;
        return f;
    }

    Vector aslip_stance_field(const Vector &q, const AslipParams &p)
    {
        const LegGeometry lg = leg_geometry(q, p);
        const double leg_force = p.leg_stiffness * (lg.length - p.leg_rest_length);
        const double hip_torque = p.hip_stiffness * (lg.angle - p.hip_rest_angle);
        // gradient of the spring potential with respect to (x_b, y_b, theta_b)
        const Eigen::Vector3d dV = leg_force * lg.dlength.head<3>() + hip_torque * lg.dangle.head<3>();

        Vector f = Vector::Zero(kDim);
        f(XB) = q(VXB);
        f(YB) = q(VYB);
        f(THETA) = q(OMEGA);
        f(VXB) = -dV(0) / p.body_mass;
        f(VYB) = -p.gravity - dV(1) / p.body_mass;
        f(OMEGA) = -dV(2) / p.body_inertia;
        return f;
    }

    double aslip_energy(const Vector &q, ModeId mode, const AslipParams &p)
    {
        double e = 0.5 * p.body_mass * (q(VXB) * q(VXB) + q(VYB) * q(VYB)) + 0.5 * p.body_inertia * q(OMEGA) * q(OMEGA) +
                   p.body_mass * p.gravity * q(YB);
        if (mode == kStance)
        {
            const LegGeometry lg = leg_geometry(q, p);
            const double dl = lg.length - p.leg_rest_length;
            const double da = lg.angle - p.hip_rest_angle;
            e += 0.5 * p.leg_stiffness * dl * dl + 0.5 * p.hip_stiffness * da * da;
        }
        return e;
    }

    Vector aslip_default_initial_state()
    {
        Vector q = Vector::Zero(kDim);
        q(YB) = 2.5;
        q(YT) = 1.0;
        return q;
    }

    HybridModel make_aslip(const AslipParams &p)
    {
        validate(p);

        Mode flight;
        flight.id = kFlight;
        flight.name = "flight";
        flight.field = [p](double, const Vector &q, const Vector &) { return aslip_flight_field(q, p); };
        flight.jacobian = [](double, const Vector &q, const Vector &) -> Matrix {
            Matrix A = Matrix::Zero(kDim, kDim);
            A(XB, VXB) = 1.0;
            A(YB, VYB) = 1.0;
            A(THETA, OMEGA) = 1.0;
            A(XT, VXB) = 1.0;
            A(XT, YT) = -q(OMEGA);
            A(XT, YB) = q(OMEGA);
            A(XT, OMEGA) = -(q(YT) - q(YB));
            A(YT, VYB) = 1.0;
            A(YT, XT) = q(OMEGA);
            A(YT, XB) = -q(OMEGA);
            A(YT, OMEGA) = q(XT) - q(XB);
            return A;
        };

        // Stance Jacobian falls back to central differences of the field.
        Mode stance;
        stance.id = kStance;
        stance.name = "stance";
        stance.field = [p](double, const Vector &q, const Vector &) { return aslip_stance_field(q, p); };

        Transition touchdown;
        touchdown.from = kFlight;
        touchdown.to = kStance;
        touchdown.name = "touchdown";
        touchdown.guard = [](double, const Vector &q) { return q(YT); };
        touchdown.guard_gradient = [](double, const Vector &) {
            GuardGradient gg{0.0, Vector::Zero(kDim)};
            gg.dx(YT) = 1.0;
            return gg;
        };
        touchdown.reset = [](double, const Vector &q) -> Vector { return q; };
        touchdown.reset_jacobian = [](double, const Vector &) { return identity_reset_jacobian(kDim); };

        // Positive while the leg is compressed; fires when it extends back to rest length.
        Transition liftoff;
        liftoff.from = kStance;
        liftoff.to = kFlight;
        liftoff.name = "liftoff";
        liftoff.guard = [p](double, const Vector &q) { return p.leg_rest_length - aslip_leg_length(q, p); };
        liftoff.guard_gradient = [p](double, const Vector &q) {
            const LegGeometry lg = leg_geometry(q, p);
            GuardGradient gg{0.0, Vector::Zero(kDim)};
            gg.dx.head<5>() = -lg.dlength;
            return gg;
        };
        liftoff.reset = [](double, const Vector &q) -> Vector { return q; };
        liftoff.reset_jacobian = [](double, const Vector &) { return identity_reset_jacobian(kDim); };

        HybridModel model;
        model.system = std::make_shared<const HybridSystem>(kDim, std::vector<Mode>{flight, stance},
                                                            std::vector<Transition>{touchdown, liftoff});
        model.measurement = position_selector(kDim, 5);
        model.state_names = {"x_b", "y_b", "theta_b", "x_t", "y_t", "xdot_b", "ydot_b", "thetadot_b"};
        model.initial_mode = kFlight;
        return model;
    }

} // namespace hilqe
