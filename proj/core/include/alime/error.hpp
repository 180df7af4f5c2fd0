#pragma once

#include <stdexcept>
#include <string>

namespace alime {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Shapes or lengths of related arguments disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite input or a numerically singular system.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Every sample weight is zero.
class DegenerateWeightsError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Rejection sampling could not find enough points inside the region.
class EmptyRegionError : public Error {
public:
    using Error::Error;
};

/// Failure talking to an external black-box process. `phase()` names the
/// protocol step that failed (spawn, handshake, request, response, exit).
class AdapterError : public Error {
public:
    AdapterError(std::string phase, const std::string& what)
        : Error("adapter " + phase + ": " + what), phase_(std::move(phase)) {}
    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

class TimeoutError : public AdapterError {
public:
    explicit TimeoutError(const std::string& what) : AdapterError("timeout", what) {}
};

/// A black-box query failed; carries the index of the first sample in the batch.
class BlackBoxError : public Error {
public:
    BlackBoxError(std::size_t sample_index, const std::string& what)
        : Error("black-box failed at sample " + std::to_string(sample_index) + ": " + what),
          sample_index_(sample_index) {}
    std::size_t sample_index() const noexcept { return sample_index_; }

private:
    std::size_t sample_index_;
};

}  // namespace alime
