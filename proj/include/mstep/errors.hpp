#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mstep {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition or unsupported parameter value.
class domain_error : public error {
public:
    using error::error;
};

/// Mixing values from different rings/universes.
class universe_error : public error {
public:
    using error::error;
};

/// Text input rejected; `offset` is the byte position of the problem.
class parse_error : public error {
public:
    parse_error(const std::string& msg, std::size_t offset)
        : error(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

/// A configured cap (matrix size, enumeration size, memory) was exceeded.
class resource_error : public error {
public:
    using error::error;
};

/// No k with p_B(k) = 0 (or < 1/2) exists in the table.
class no_final_step_error : public error {
public:
    using error::error;
};

/// The final wild-set of a multistep run was nonempty and no solution was found.
class plan_violation_error : public error {
public:
    using error::error;
};

/// Solution extraction failed (underdetermined linear basis, unresolved variable).
class solve_error : public error {
public:
    using error::error;
};

}  // namespace mstep
