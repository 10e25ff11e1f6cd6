#pragma once

#include <stdexcept>
#include <string>

namespace tvmap {

// Invalid or inconsistent input data (bad files, broken invariants, degenerate y).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergence where convergence is contractual,
// infeasible subproblems that indicate a broken precondition, etc.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tvmap
