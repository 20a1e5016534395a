// SPDX-License-Identifier: MIT
#ifndef SOILRF_ERROR_HPP
#define SOILRF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace soilrf {

// Failure categories. The C API and the CLI map these 1:1 onto status/exit
// codes, so every throw site must pick the category a caller would dispatch on.
enum class ErrorKind {
    config,       // bad parameters, malformed scheme/sample definitions
    load,         // missing or malformed files, manifest/grid mismatches
    numeric,      // domain violations and failed numeric procedures
    calibration,  // trend targets unsatisfiable
    contract,     // broken internal invariants (probability sums, block sizes)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace soilrf

#endif
