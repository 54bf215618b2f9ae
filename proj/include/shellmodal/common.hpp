/** @file common.hpp

    @brief Shared aliases, unit conventions and the error hierarchy.

    Internal units: length nm, force nN, time ps, mass nN*ps^2/nm (1e-24 kg).
    With these, stiffness/mass eigenvalues come out in 1/ps^2 and f = omega/2pi
    in THz. Surface moduli in N/m equal nN/nm, so material constants need no
    conversion.
*/
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>

namespace shellmodal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;

/// Carbon-carbon bond length [nm].
inline constexpr double carbon_bond_length = 0.142;

/// Base class for all errors raised by the library. `module()` names the
/// component that detected the problem so diagnostics can point at it.
class ShellError : public std::runtime_error {
public:
    ShellError(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Current metric lost positive definiteness (inverted or collapsed element).
class DegenerateMetricError : public ShellError {
public:
    explicit DegenerateMetricError(const std::string& what) : ShellError("geometry", what) {}
};

/// Invalid input to a constructor or operation.
class InvalidArgument : public ShellError {
public:
    InvalidArgument(std::string module, const std::string& what) : ShellError(std::move(module), what) {}
};

/// Sheet came closer to the substrate than the contact model allows.
class PenetrationError : public ShellError {
public:
    explicit PenetrationError(const std::string& what) : ShellError("contact", what) {}
};

/// Iterative solver gave up (Newton, eigen iteration, root bracketing).
class ConvergenceError : public ShellError {
public:
    ConvergenceError(std::string module, const std::string& what) : ShellError(std::move(module), what) {}
};

/// Configuration file failed schema validation.
class ConfigError : public ShellError {
public:
    explicit ConfigError(const std::string& what) : ShellError("cli_io", what) {}
};

/// Symmetric 2x2 tensor stored by independent components (11, 12, 22).
template <typename T>
struct Sym2 {
    T c11{}, c12{}, c22{};

    T det() const { return c11 * c22 - c12 * c12; }
    T trace() const { return c11 + c22; }
};

} // namespace shellmodal
