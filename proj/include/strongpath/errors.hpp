#pragma once

#include <stdexcept>
#include <string>

namespace strongpath {

// Parameter outside the domain where a formula or sampler is defined.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Caller-declared integrality of the dimension disagrees with its value, or an
// algorithm was handed a spec of the wrong kind.
class FlagMismatch : public std::invalid_argument {
public:
    explicit FlagMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Skeleton does not cover the requested (time-changed) horizon.
class HorizonError : public std::out_of_range {
public:
    explicit HorizonError(const std::string& what) : std::out_of_range(what) {}
};

// Bounds can only be transported through a map that is nondecreasing in space.
class MonotonicityError : public std::logic_error {
public:
    explicit MonotonicityError(const std::string& what) : std::logic_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace strongpath
