#pragma once

#include <stdexcept>
#include <string>

namespace cyclefeed {

// Bad caller-supplied data: malformed files, mismatched list lengths,
// out-of-range parameters. Maps to CLI exit code 1.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A backend (reference or out-of-process) failed mid-operation.
// Maps to CLI exit code 2.
class backend_error : public std::runtime_error {
public:
    explicit backend_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A documented precondition was violated by the caller. Checks are cheap
// and stay on in all build types.
class precondition_violation : public std::logic_error {
public:
    explicit precondition_violation(const std::string& msg) : std::logic_error(msg) {}
};

namespace detail {
inline void require(bool cond, const char* msg) {
    if (!cond) throw precondition_violation(msg);
}
}  // namespace detail

}  // namespace cyclefeed
