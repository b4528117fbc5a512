#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace diffcodec {

inline constexpr double kPi = 3.14159265358979323846;

// S¹: u = θ. T²: (u, v) = (θ₁, θ₂). S²: u = colatitude, v = longitude.
// Graph spaces store the node index in u.
struct Point {
    double u = 0.0;
    double v = 0.0;
};

class SpectrumExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorruptStream : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownNodeSet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace diffcodec
