#pragma once

#include <stdexcept>
#include <string>

namespace annulus {

enum class ErrorKind {
    Io,           // unreadable or unwritable file
    Schema,       // file content does not follow the documented schema
    Structural,   // a landmark set is missing or duplicates entries
    Input,        // argument violates a precondition
    Degenerate,   // geometry cannot be fitted (collinear, coincident, non-ellipse)
    Data,         // dataset unusable for the requested analysis (e.g. one class)
    Numerical     // linear algebra failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Input: return "input";
    case ErrorKind::Degenerate: return "degenerate-geometry";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

/// CLI exit code for an error category: 2 I/O, 3 schema, 4 data, 5 numerical.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Io: return 2;
    case ErrorKind::Schema:
    case ErrorKind::Structural:
    case ErrorKind::Input: return 3;
    case ErrorKind::Degenerate:
    case ErrorKind::Data: return 4;
    case ErrorKind::Numerical: return 5;
    }
    return 1;
}

} // namespace annulus
