#pragma once

#include <stdexcept>
#include <string>

namespace convnote {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// parse (malformed input files), validation (well-formed but inconsistent
// data), config (bad keys/values), runtime (everything else).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization failed (non-finite loss, divergence); maps to the generic
// runtime exit code.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace convnote
