#pragma once

#include <stdexcept>
#include <string>

namespace affine_pr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A square linear system whose numerical rank is below its size.
class SingularSystemError : public Error {
public:
    SingularSystemError(std::size_t rank, std::size_t size, const std::string& context = {})
        : Error((context.empty() ? std::string{} : context + ": ") + "singular system, rank " +
                std::to_string(rank) + " of " + std::to_string(size)),
          rank_(rank), size_(size) {}

    std::size_t rank() const noexcept { return rank_; }
    std::size_t size() const noexcept { return size_; }

private:
    std::size_t rank_;
    std::size_t size_;
};

class EigenConvergenceError : public Error {
public:
    using Error::Error;
};

/// JSON input that does not match the expected schema. `path` names the offending field.
class ParseError : public Error {
public:
    ParseError(const std::string& path, const std::string& what)
        : Error("parse error at " + path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class SchemaVersionError : public Error {
public:
    using Error::Error;
};

class InvalidOffsetsError : public Error {
public:
    using Error::Error;
};

class DegenerateWitnessError : public Error {
public:
    using Error::Error;
};

/// A rank-2 certificate that violates one of its defining conditions.
class CertificateInvalidError : public Error {
public:
    CertificateInvalidError(const std::string& condition, const std::string& detail)
        : Error("certificate invalid (" + condition + "): " + detail), condition_(condition) {}
    const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

/// No zeroable subset of measurements was found for the constructive collision.
class SubsetSearchError : public Error {
public:
    enum class Kind { StructurallyInfeasible, BudgetExhausted };

    SubsetSearchError(Kind kind, const std::string& detail)
        : Error(std::string(kind == Kind::StructurallyInfeasible ? "structurally infeasible"
                                                                 : "budget exhausted") +
                ": " + detail),
          kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace affine_pr
