#pragma once

#include <stdexcept>
#include <string>

namespace wavepanel {

// Malformed input file: bad header, bad field, bad date. Carries file/line.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input that violates a dataset invariant (range, duplicate, coverage).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Country sets disagree across input files.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Analysis-stage failure: degenerate series, rank deficiency, absorbed exposure, ...
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wavepanel
