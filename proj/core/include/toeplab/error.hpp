#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toeplab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for malformed manifests; carries the 1-based offending line (0 if unknown).
class ManifestError : public Error {
public:
    ManifestError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Light-cone or empty-band violations: the requested computation would be untrustworthy.
class GuardError : public Error {
public:
    GuardError(const std::string& what, double max_safe_t = 0.0)
        : Error(what), max_safe_t_(max_safe_t) {}
    double max_safe_t() const { return max_safe_t_; }

private:
    double max_safe_t_;
};

}  // namespace toeplab
