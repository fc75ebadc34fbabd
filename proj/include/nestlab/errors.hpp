#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nestlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// x outside [0,1], or a map parameter outside its family range.
class DomainError : public Error {
public:
    using Error::Error;
};

// Counts and knobs (grid, scan, horizon, samples) failing validation.
class ParameterError : public Error {
public:
    using Error::Error;
};

// A cross-ratio component is empty at the working tolerance.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class FoldError : public Error {
public:
    FoldError(std::size_t k, const std::string& what) : Error(what), k_(k) {}
    std::size_t k() const noexcept { return k_; }

private:
    std::size_t k_;
};

class SingularityError : public Error {
public:
    using Error::Error;
};

class UnsupportedOrderError : public Error {
public:
    using Error::Error;
};

class NoSignChangeError : public Error {
public:
    using Error::Error;
};

class BracketMissError : public Error {
public:
    using Error::Error;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

// Arithmetic can no longer resolve the requested geometry.
class PrecisionError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace nestlab
