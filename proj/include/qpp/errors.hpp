// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qpp {

// Configuration / input validation problems. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Wrong parameter-vector length for a model family.
class ArityError : public ConfigError {
public:
    ArityError(const std::string& family, std::size_t expected, std::size_t got)
        : ConfigError(family + " expects " + std::to_string(expected) +
                      " parameters, got " + std::to_string(got)) {}
};

// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Step-size underflow or step budget exhausted while integrating.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double t_fail)
        : NumericalError(what + " at t = " + std::to_string(t_fail) + " ns"),
          t_fail_ns(t_fail) {}
    double t_fail_ns;
};

// Eigenbranch continuation lost the state (no candidate overlaps > 1/sqrt(2)).
class TrackingError : public NumericalError {
public:
    TrackingError(const std::string& what, double t_fail)
        : NumericalError(what + " at t = " + std::to_string(t_fail) + " ns"),
          t_fail_ns(t_fail) {}
    double t_fail_ns;
};

// Detuning has no zero in the pulse window.
class NoCrossingError : public NumericalError {
public:
    explicit NoCrossingError(const std::string& what) : NumericalError(what) {}
};

// Detuning slope vanishes at the crossing; the Landau-Zener velocity is undefined.
class DegenerateVelocityError : public NumericalError {
public:
    explicit DegenerateVelocityError(const std::string& what) : NumericalError(what) {}
};

// Elementary effect undefined because the unperturbed output is zero.
class UndefinedEffectError : public NumericalError {
public:
    explicit UndefinedEffectError(const std::string& what) : NumericalError(what) {}
};

// Elementary effect undefined because the base parameter value is zero.
class ZeroBaseError : public NumericalError {
public:
    explicit ZeroBaseError(const std::string& what) : NumericalError(what) {}
};

// Fewer than two valid elementary effects; summary statistics undefined.
class InsufficientSamplesError : public ConfigError {
public:
    explicit InsufficientSamplesError(const std::string& what) : ConfigError(what) {}
};

} // namespace qpp
