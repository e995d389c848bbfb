#pragma once

// Helpers shared by the plain-text model readers and writers.

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "hcrf/errors.hpp"

namespace hcrf::detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void expect_line(std::istream& in, const std::string& expected) {
    std::string line;
    if (!std::getline(in, line) || line != expected) {
        throw FormatError("expected '" + expected + "' but found '" + line + "'");
    }
}

inline void expect_token(std::istream& in, const std::string& expected) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw FormatError("expected '" + expected + "' but found '" + token + "'");
    }
}

template <typename T>
T read_value(std::istream& in, const std::string& what) {
    T value{};
    if (!(in >> value)) throw FormatError("missing or malformed " + what);
    return value;
}

template <typename T>
T read_keyed(std::istream& in, const std::string& key) {
    expect_token(in, key);
    return read_value<T>(in, key);
}

// Finishes the current line so a following getline sees the next one.
inline void skip_rest_of_line(std::istream& in) {
    std::string rest;
    std::getline(in, rest);
}

}  // namespace hcrf::detail
