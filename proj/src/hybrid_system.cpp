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

#include "hilqe/hybrid_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hilqe
{
    std::string_view to_string(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::ParameterError: return "ParameterError";
        case ErrorCode::TangentialCrossing: return "TangentialCrossing";
        case ErrorCode::MultipleSimultaneousCrossings: return "MultipleSimultaneousCrossings";
        case ErrorCode::SecondEventInStep: return "SecondEventInStep";
        case ErrorCode::EventInsideStep: return "EventInsideStep";
        case ErrorCode::NonPositiveQww: return "NonPositiveQww";
        case ErrorCode::SingularValueHessian: return "SingularValueHessian";
        case ErrorCode::NoEventFound: return "NoEventFound";
        case ErrorCode::RolloutDiverged: return "RolloutDiverged";
        case ErrorCode::SingularInnovationCovariance: return "SingularInnovationCovariance";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        }
        return "UnknownError";
    }

    HybridSystem::HybridSystem(int state_dim, std::vector<Mode> modes, std::vector<Transition> transitions)
        : n_(state_dim), modes_(std::move(modes)), transitions_(std::move(transitions))
    {
        if (n_ <= 0)
            throw Error(ErrorCode::ParameterError, "state dimension must be positive");
        if (modes_.empty())
            throw Error(ErrorCode::ParameterError, "a hybrid system needs at least one mode");
        for (std::size_t i = 0; i < modes_.size(); ++i)
        {
            if (!modes_[i].field)
                throw Error(ErrorCode::ParameterError, "mode '" + modes_[i].name + "' has no vector field");
            for (std::size_t j = 0; j < i; ++j)
                if (modes_[j].id == modes_[i].id)
                    throw Error(ErrorCode::ParameterError, "duplicate mode id " + std::to_string(modes_[i].id.value));
        }
        outgoing_.resize(modes_.size());
        for (std::size_t k = 0; k < transitions_.size(); ++k)
        {
            const Transition &tr = transitions_[k];
            if (!has_mode(tr.from) || !has_mode(tr.to))
                throw Error(ErrorCode::ParameterError, "transition '" + tr.name + "' references an unknown mode");
            if (!tr.guard || !tr.guard_gradient || !tr.reset || !tr.reset_jacobian)
                throw Error(ErrorCode::ParameterError, "transition '" + tr.name + "' is missing an evaluator");
            outgoing_[index_of(tr.from)].push_back(k);
        }
    }

    bool HybridSystem::has_mode(ModeId id) const
    {
        return std::any_of(modes_.begin(), modes_.end(), [id](const Mode &m) { return m.id == id; });
    }

    std::size_t HybridSystem::index_of(ModeId id) const
    {
        for (std::size_t i = 0; i < modes_.size(); ++i)
            if (modes_[i].id == id)
                return i;
        throw Error(ErrorCode::ParameterError, "unknown mode id " + std::to_string(id.value));
    }

    const Mode &HybridSystem::mode(ModeId id) const { return modes_[index_of(id)]; }

    const std::vector<std::size_t> &HybridSystem::outgoing(ModeId id) const { return outgoing_[index_of(id)]; }

    Vector HybridSystem::field(ModeId id, double t, const Vector &x, const Vector &u) const
    {
        return mode(id).field(t, x, u);
    }

    Matrix HybridSystem::field_jacobian(ModeId id, double t, const Vector &x, const Vector &u) const
    {
        const Mode &m = mode(id);
        if (m.jacobian)
            return m.jacobian(t, x, u);

        Matrix J(n_, n_);
        Vector xp = x;
        for (int j = 0; j < n_; ++j)
        {
            const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
            xp(j) = x(j) + h;
            const Vector fp = m.field(t, xp, u);
            xp(j) = x(j) - h;
            const Vector fm = m.field(t, xp, u);
            xp(j) = x(j);
            J.col(j) = (fp - fm) / (2.0 * h);
        }
        return J;
    }

    int HybridTrajectory::events_before(int i) const
    {
        return static_cast<int>(std::count_if(events.begin(), events.end(),
                                              [i](const EventRecord &e) { return e.step_index < i; }));
    }

    const EventRecord *HybridTrajectory::event_at_step(int i) const
    {
        auto it = std::lower_bound(events.begin(), events.end(), i,
                                   [](const EventRecord &e, int idx) { return e.step_index < idx; });
        return (it != events.end() && it->step_index == i) ? &*it : nullptr;
    }

    Matrix saltation(const HybridSystem &sys, const Transition &tr, double t, const Vector &x_minus, const Vector &u,
                     double eps_trans)
    {
        const Vector f_minus = sys.field(tr.from, t, x_minus, u);
        const Vector x_plus = tr.reset(t, x_minus);
        const Vector f_plus = sys.field(tr.to, t, x_plus, u);
        const ResetJacobian dR = tr.reset_jacobian(t, x_minus);
        const GuardGradient dg = tr.guard_gradient(t, x_minus);

        const double rate = dg.dt + dg.dx.dot(f_minus);
        if (!(std::abs(rate) > eps_trans))
        {
            std::ostringstream os;
            os << "guard '" << tr.name << "' rate " << rate << " at t=" << t;
            throw Error(ErrorCode::TangentialCrossing, os.str());
        }
        const Vector jump = f_plus - dR.dx * f_minus - dR.dt;
        return dR.dx + jump * dg.dx.transpose() / rate;
    }

    Vector rk4_step(const HybridSystem &sys, ModeId mode, double t, const Vector &x, const Vector &u, double h)
    {
        const Mode &m = sys.mode(mode);
        const Vector k1 = m.field(t, x, u);
        const Vector k2 = m.field(t + 0.5 * h, x + 0.5 * h * k1, u);
        const Vector k3 = m.field(t + 0.5 * h, x + 0.5 * h * k2, u);
        const Vector k4 = m.field(t + h, x + h * k3, u);
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    Matrix rk4_step_jacobian(const HybridSystem &sys, ModeId mode, double t, const Vector &x, const Vector &u,
                             double h)
    {
        const int n = sys.dim();
        const Matrix I = Matrix::Identity(n, n);
        const Mode &m = sys.mode(mode);

        const Vector k1 = m.field(t, x, u);
        const Matrix dk1 = sys.field_jacobian(mode, t, x, u);
        const Vector x2 = x + 0.5 * h * k1;
        const Vector k2 = m.field(t + 0.5 * h, x2, u);
        const Matrix dk2 = sys.field_jacobian(mode, t + 0.5 * h, x2, u) * (I + 0.5 * h * dk1);
        const Vector x3 = x + 0.5 * h * k2;
        const Vector k3 = m.field(t + 0.5 * h, x3, u);
        const Matrix dk3 = sys.field_jacobian(mode, t + 0.5 * h, x3, u) * (I + 0.5 * h * dk2);
        const Vector x4 = x + h * k3;
        const Matrix dk4 = sys.field_jacobian(mode, t + h, x4, u) * (I + h * dk3);
        return I + (h / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
    }

    std::optional<LocatedEvent> locate_event(const HybridSystem &sys, ModeId mode, double t0, const Vector &x0,
                                             const Vector &u, double dt, const IntegratorOptions &opts)
    {
        const auto &edges = sys.outgoing(mode);
        if (edges.empty())
            return std::nullopt;

        const Vector x1 = rk4_step(sys, mode, t0, x0, u, dt);
        std::vector<LocatedEvent> hits;
        for (std::size_t idx : edges)
        {
            const Transition &tr = sys.transitions()[idx];
            const double g0 = tr.guard(t0, x0);
            if (!(g0 > opts.tol_g))
                continue;
            const double g1 = tr.guard(t0 + dt, x1);
            if (g1 > 0.0)
                continue;

            // Invariant: g(lo) > 0 >= g(hi). Iterate until the bracket stops shrinking.
            double lo = 0.0, hi = dt, g_lo = g0, g_hi = g1;
            Vector x_hi = x1;
            for (int k = 0; k < opts.max_bisections; ++k)
            {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi)
                    break;
                const Vector xm = rk4_step(sys, mode, t0, x0, u, mid);
                const double gm = tr.guard(t0 + mid, xm);
                if (gm > 0.0)
                {
                    lo = mid;
                    g_lo = gm;
                }
                else
                {
                    hi = mid;
                    g_hi = gm;
                    x_hi = xm;
                }
            }
            if (std::abs(g_lo) < std::abs(g_hi) && lo > 0.0)
                hits.push_back({t0 + lo, rk4_step(sys, mode, t0, x0, u, lo), idx});
            else
                hits.push_back({t0 + hi, x_hi, idx});
        }
        if (hits.empty())
            return std::nullopt;

        std::sort(hits.begin(), hits.end(), [](const LocatedEvent &a, const LocatedEvent &b) { return a.t < b.t; });
        if (hits.size() > 1 && hits[1].t - hits[0].t <= opts.tol_g)
        {
            std::ostringstream os;
            os << "transitions '" << sys.transitions()[hits[0].transition].name << "' and '"
               << sys.transitions()[hits[1].transition].name << "' fire together at t=" << hits[0].t;
            throw Error(ErrorCode::MultipleSimultaneousCrossings, os.str());
        }
        return hits.front();
    }

    namespace
    {
        // A state sitting on or beyond a guard whose flow still points into the
        // guard set transitions at the start of the step.
        std::optional<std::size_t> immediate_transition(const HybridSystem &sys, const HybridState &s, const Vector &u,
                                                        const IntegratorOptions &opts)
        {
            std::optional<std::size_t> found;
            const auto &edges = sys.outgoing(s.mode);
            if (edges.empty())
                return found;
            const Vector f = sys.field(s.mode, s.t, s.x, u);
            for (std::size_t idx : edges)
            {
                const Transition &tr = sys.transitions()[idx];
                if (tr.guard(s.t, s.x) > opts.tol_g)
                    continue;
                const GuardGradient dg = tr.guard_gradient(s.t, s.x);
                if (dg.dt + dg.dx.dot(f) < -opts.eps_trans)
                {
                    if (found)
                        throw Error(ErrorCode::MultipleSimultaneousCrossings,
                                    "more than one guard is violated at t=" + std::to_string(s.t));
                    found = idx;
                }
            }
            return found;
        }
    } // namespace

    StepResult step(const HybridSystem &sys, const HybridState &s, const Vector &u, const Vector &w, double dt,
                    const IntegratorOptions &opts, int step_index)
    {
        if (!(dt > 0.0))
            throw Error(ErrorCode::ParameterError, "step length must be positive");
        if (s.x.size() != sys.dim())
            throw Error(ErrorCode::ParameterError, "state has wrong dimension");

        std::optional<LocatedEvent> hit;
        if (auto idx = immediate_transition(sys, s, u, opts))
            hit = LocatedEvent{s.t, s.x, *idx};
        else
            hit = locate_event(sys, s.mode, s.t, s.x, u, dt, opts);

        const double t_end = s.t + dt;
        StepResult out;
        if (!hit)
        {
            out.state = {s.mode, rk4_step(sys, s.mode, s.t, s.x, u, dt), t_end};
        }
        else
        {
            const Transition &tr = sys.transitions()[hit->transition];
            EventRecord rec;
            rec.step_index = step_index;
            rec.from = tr.from;
            rec.to = tr.to;
            rec.transition = hit->transition;
            rec.t_event = hit->t;
            rec.x_minus = hit->x;
            rec.x_plus = tr.reset(hit->t, hit->x);
            rec.salt = saltation(sys, tr, hit->t, rec.x_minus, u, opts.eps_trans);

            const double remaining = t_end - hit->t;
            Vector x_end = remaining > 0.0 ? rk4_step(sys, tr.to, hit->t, rec.x_plus, u, remaining) : rec.x_plus;
            for (std::size_t idx : sys.outgoing(tr.to))
            {
                const Transition &next = sys.transitions()[idx];
                if (next.guard(hit->t, rec.x_plus) > opts.tol_g && next.guard(t_end, x_end) <= 0.0)
                {
                    std::ostringstream os;
                    os << "'" << next.name << "' fires after '" << tr.name << "' within one step at t=" << s.t;
                    throw Error(ErrorCode::SecondEventInStep, os.str());
                }
            }
            out.state = {tr.to, std::move(x_end), t_end};
            out.event = std::move(rec);
        }
        if (w.size() > 0)
            out.state.x += w;
        return out;
    }

    FlowJacobian flow_jacobian(const HybridSystem &sys, ModeId mode, double t0, const Vector &x0, const Vector &u,
                               double dt, const IntegratorOptions &opts, bool check_events)
    {
        const int n = sys.dim();
        FlowJacobian out{Matrix::Identity(n, n), Matrix::Identity(n, n)};
        if (dt == 0.0)
            return out;
        if (check_events && locate_event(sys, mode, t0, x0, u, dt, opts))
            throw Error(ErrorCode::EventInsideStep, "guard crossed while linearizing at t=" + std::to_string(t0));
        out.A = rk4_step_jacobian(sys, mode, t0, x0, u, dt);
        return out;
    }

    HybridTrajectory simulate(const HybridSystem &sys, const HybridState &x0, std::span<const Vector> controls,
                              std::span<const Vector> noise, double dt, int steps, const IntegratorOptions &opts)
    {
        if (steps < 0 || static_cast<int>(noise.size()) < steps)
            throw Error(ErrorCode::ParameterError, "noise sequence shorter than the number of steps");
        if (!controls.empty() && static_cast<int>(controls.size()) < steps)
            throw Error(ErrorCode::ParameterError, "control sequence shorter than the number of steps");

        HybridTrajectory traj;
        traj.dt = dt;
        traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
        traj.samples.push_back(x0);
        for (int i = 0; i < steps; ++i)
        {
            try
            {
                StepResult r = step(sys, traj.samples.back(), control_at(controls, i), noise[i], dt, opts, i);
                traj.samples.push_back(std::move(r.state));
                if (r.event)
                    traj.events.push_back(std::move(*r.event));
            }
            catch (const Error &e)
            {
                throw Error(e.code(), "step " + std::to_string(i) + ": " + e.what());
            }
        }
        return traj;
    }

} // namespace hilqe
