#pragma once

#include <stdexcept>
#include <string>

namespace memhots {

// Malformed or inconsistent input data (bad file, bad schema, precondition
// violation on caller-supplied values). CLI exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver failed to reach its stopping criterion. CLI exit code 3.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace memhots
