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

#ifndef HILQE_HYBRID_SYSTEM_HPP
#define HILQE_HYBRID_SYSTEM_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hilqe/common.hpp"

namespace hilqe
{
    using VectorField = std::function<Vector(double t, const Vector &x, const Vector &u)>;
    using FieldJacobian = std::function<Matrix(double t, const Vector &x, const Vector &u)>;
    using GuardFunction = std::function<double(double t, const Vector &x)>;
    using ResetMap = std::function<Vector(double t, const Vector &x)>;

    struct GuardGradient
    {
        double dt = 0.0; // partial with respect to time
        Vector dx;       // partial with respect to state (row vector stored as column)
    };

    struct ResetJacobian
    {
        Vector dt;
        Matrix dx;
    };

    using GuardGradientFunction = std::function<GuardGradient(double t, const Vector &x)>;
    using ResetJacobianFunction = std::function<ResetJacobian(double t, const Vector &x)>;

    struct Mode
    {
        ModeId id;
        std::string name;
        VectorField field;
        // Optional. When empty the Jacobian is taken by central differences of `field`.
        FieldJacobian jacobian;
    };

    /// A guarded transition between two modes. The transition fires when the
    /// guard goes from positive to non-positive along the flow of `from`.
    struct Transition
    {
        ModeId from;
        ModeId to;
        std::string name;
        GuardFunction guard;
        GuardGradientFunction guard_gradient;
        ResetMap reset;
        ResetJacobianFunction reset_jacobian;
    };

    /// Solver tolerances shared by event location and saltation evaluation.
    struct IntegratorOptions
    {
        double tol_g = 1e-10;
        int max_bisections = 80;
        double eps_trans = 1e-8;
    };

    /// Immutable event-driven hybrid system with a shared state dimension.
    class HybridSystem
    {
    public:
        HybridSystem(int state_dim, std::vector<Mode> modes, std::vector<Transition> transitions);

        int dim() const { return n_; }
        const std::vector<Mode> &modes() const { return modes_; }
        const std::vector<Transition> &transitions() const { return transitions_; }
        const Mode &mode(ModeId id) const;
        bool has_mode(ModeId id) const;

        /// Indices into transitions() of the edges leaving `id`.
        const std::vector<std::size_t> &outgoing(ModeId id) const;

        Vector field(ModeId id, double t, const Vector &x, const Vector &u) const;
        Matrix field_jacobian(ModeId id, double t, const Vector &x, const Vector &u) const;

    private:
        std::size_t index_of(ModeId id) const;

        int n_;
        std::vector<Mode> modes_;
        std::vector<Transition> transitions_;
        std::vector<std::vector<std::size_t>> outgoing_;
    };

    struct HybridState
    {
        ModeId mode;
        Vector x;
        double t = 0.0;
    };

    struct EventRecord
    {
        int step_index = 0;
        ModeId from;
        ModeId to;
        std::size_t transition = 0;
        double t_event = 0.0;
        Vector x_minus;
        Vector x_plus;
        Matrix salt;
    };

    struct HybridTrajectory
    {
        double dt = 0.0;
        std::vector<HybridState> samples;
        std::vector<EventRecord> events;

        int steps() const { return samples.empty() ? 0 : static_cast<int>(samples.size()) - 1; }
        /// Number of events recorded strictly before sample `i`.
        int events_before(int i) const;
        /// The event recorded during step i -> i+1, if any.
        const EventRecord *event_at_step(int i) const;
    };

    /// Saltation matrix of `tr` at the pre-impact point (t, x_minus).
    /// Throws TangentialCrossing when the guard rate magnitude is <= eps_trans.
    Matrix saltation(const HybridSystem &sys, const Transition &tr, double t, const Vector &x_minus,
                     const Vector &u, double eps_trans = IntegratorOptions{}.eps_trans);

    /// Single classical RK4 step of length h in one mode (no guard checks).
    Vector rk4_step(const HybridSystem &sys, ModeId mode, double t, const Vector &x, const Vector &u, double h);

    /// Exact derivative of rk4_step with respect to x.
    Matrix rk4_step_jacobian(const HybridSystem &sys, ModeId mode, double t, const Vector &x, const Vector &u,
                             double h);

    struct LocatedEvent
    {
        double t = 0.0;
        Vector x;
        std::size_t transition = 0;
    };

    /// Earliest guard crossing of `mode` on [t0, t0 + dt], refined by bisection.
    /// Only guards that are strictly positive (> tol_g) at t0 are monitored.
    std::optional<LocatedEvent> locate_event(const HybridSystem &sys, ModeId mode, double t0, const Vector &x0,
                                             const Vector &u, double dt, const IntegratorOptions &opts = {});

    struct StepResult
    {
        HybridState state;
        std::optional<EventRecord> event;
    };

    /// Advances one sample interval, handling at most one event, then adds `w`.
    StepResult step(const HybridSystem &sys, const HybridState &s, const Vector &u, const Vector &w, double dt,
                    const IntegratorOptions &opts = {}, int step_index = 0);

    struct FlowJacobian
    {
        Matrix A;
        Matrix B_w;
    };

    /// Linearization of the discrete step map over [t0, t0 + dt] in `mode`.
    /// With check_events the call throws EventInsideStep if a guard fires inside the step.
    FlowJacobian flow_jacobian(const HybridSystem &sys, ModeId mode, double t0, const Vector &x0, const Vector &u,
                               double dt, const IntegratorOptions &opts = {}, bool check_events = true);

    /// N sequential steps. `controls` may be empty (zero-dimensional input).
    HybridTrajectory simulate(const HybridSystem &sys, const HybridState &x0, std::span<const Vector> controls,
                              std::span<const Vector> noise, double dt, int steps,
                              const IntegratorOptions &opts = {});

    /// Control input for step i, or an empty vector when the system has none.
    inline const Vector &control_at(std::span<const Vector> controls, int i)
    {
        static const Vector empty;
        return controls.empty() ? empty : controls[static_cast<std::size_t>(i)];
    }

} // namespace hilqe

#endif // HILQE_HYBRID_SYSTEM_HPP
