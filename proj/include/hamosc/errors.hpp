#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hamosc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- expression language ---------------------------------------------------

/// Malformed source text. Carries the byte offset of the first bad token and
/// a human-readable list of what would have been accepted there.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, std::string expected, const std::string& what)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

/// Domain violation during evaluation (division by zero, log of a
/// non-positive value, ...). Carries the byte offset of the offending
/// subexpression in the original source.
class EvalError : public Error {
public:
    EvalError(std::size_t offset, const std::string& what) : Error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// --- matrix calculus --------------------------------------------------------

class NotPositiveSemidefinite : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

/// The sampling grid is too coarse to track the unitary eigenvector path.
class GridTooCoarse : public Error {
public:
    GridTooCoarse(double defect, const std::string& what) : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

// --- reductions and criteria ------------------------------------------------

/// The drift factorization has no solution somewhere on the requested grid.
class UnsolvableFactorization : public Error {
public:
    using Error::Error;
};

class NegativeEigenvalue : public Error {
public:
    using Error::Error;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class HypothesisViolated : public Error {
public:
    using Error::Error;
};

// --- integration --------------------------------------------------------------

/// The adaptive integrator could not make progress (stiffness or a
/// singularity of the coefficients). Carries the time that was reached.
class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(double reached, const std::string& what) : Error(what), reached_(reached) {}
    double reached() const noexcept { return reached_; }

private:
    double reached_;
};

// --- system files -------------------------------------------------------------

class SystemParseError : public Error {
public:
    using Error::Error;
};

class HermitianViolation : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace hamosc
