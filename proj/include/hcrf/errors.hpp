#pragma once

#include <stdexcept>
#include <string>

namespace hcrf {

// Unreadable or unwritable file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents, or degenerate image dimensions.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition on an argument.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Internally inconsistent data structure (e.g. a wavelet pyramid with
// mismatched subband sizes).
class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hcrf
