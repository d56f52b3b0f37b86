#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hjnash {

/// A point of the gradient plane (p1, p2), or any other planar quantity.
using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v[0], s * v[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double sup_norm(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

/// Coarse failure classes; the CLI maps them onto exit codes.
enum class ErrorCategory {
    Input,       // malformed files or arguments
    Assumption,  // the game violates a standing assumption or is outside a supported regime
    Numerical,   // an algorithm failed to converge or broke down
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// A cost function produced a non-finite value; `x` is the offending abscissa.
class NonFiniteError : public Error {
public:
    NonFiniteError(double x, const std::string& what)
        : Error(ErrorCategory::Assumption, what), x(x) {}
    double x;
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what) : Error(ErrorCategory::Assumption, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::Assumption, what) {}
};

/// The gradient ODE is singular at p (Delta(p) below the threshold).
class SingularError : public Error {
public:
    SingularError(const Vec2& p, const std::string& what)
        : Error(ErrorCategory::Numerical, what), p(p) {}
    Vec2 p;
};

class InvariantViolation : public Error {
public:
    InvariantViolation(double x, const Vec2& p, const std::string& what)
        : Error(ErrorCategory::Numerical, what), x(x), p(p) {}
    double x;
    Vec2 p;
};

class NoConvergence : public Error {
public:
    NoConvergence(double achieved, const std::string& what)
        : Error(ErrorCategory::Numerical, what), achieved(achieved) {}
    double achieved;
};

class OrbitNotClosed : public Error {
public:
    OrbitNotClosed(double residual, const std::string& what)
        : Error(ErrorCategory::Numerical, what), residual(residual) {}
    double residual;
};

class NumericalBreakdown : public Error {
public:
    NumericalBreakdown(double s, const Vec2& p, const std::string& what)
        : Error(ErrorCategory::Numerical, what), s(s), p(p) {}
    double s;
    Vec2 p;
};

class WindowTooSmall : public Error {
public:
    explicit WindowTooSmall(const std::string& what) : Error(ErrorCategory::Numerical, what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

}  // namespace hjnash
