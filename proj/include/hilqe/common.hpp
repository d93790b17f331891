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

#ifndef HILQE_COMMON_HPP
#define HILQE_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hilqe
{
    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    enum class ErrorCode
    {
        ParameterError,
        TangentialCrossing,
        MultipleSimultaneousCrossings,
        SecondEventInStep,
        EventInsideStep,
        NonPositiveQww,
        SingularValueHessian,
        NoEventFound,
        RolloutDiverged,
        SingularInnovationCovariance,
        DivisionByZero,
        ConfigError,
        IoError,
    };

    std::string_view to_string(ErrorCode code);

    /// Exception type raised by every module; carries a machine-readable code.
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &what)
            : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };

    /// Discrete mode label. Strongly typed so it cannot be mixed up with step indices.
    struct ModeId
    {
        int value = 0;

        constexpr ModeId() = default;
        constexpr explicit ModeId(int v) : value(v) {}
        friend constexpr auto operator<=>(const ModeId &, const ModeId &) = default;
    };

    inline Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

} // namespace hilqe

#endif // HILQE_COMMON_HPP
