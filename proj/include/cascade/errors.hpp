#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Invalid parameters or configuration.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A finite instance cannot be built from the requested inputs.
class ConstructionError : public std::runtime_error {
public:
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// An exhaustive computation was asked for on an instance that is too large.
class RefusalError : public std::runtime_error {
public:
    explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cascade
