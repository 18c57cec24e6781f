#pragma once

#include <stdexcept>
#include <string>

namespace lod2rec {

// Base class for all pipeline errors. Stages catch these and turn them
// into per-building failure records instead of aborting a batch.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& what) : Error(what) {}
};

class NoPlanesFound : public Error {
public:
    explicit NoPlanesFound(const std::string& what) : Error(what) {}
};

class EmptySoup : public Error {
public:
    explicit EmptySoup(const std::string& what) : Error(what) {}
};

class InvalidPartition : public Error {
public:
    explicit InvalidPartition(const std::string& what) : Error(what) {}
};

class NonConvergence : public Error {
public:
    explicit NonConvergence(const std::string& what) : Error(what) {}
};

class MissingPlane : public Error {
public:
    explicit MissingPlane(const std::string& what) : Error(what) {}
};

class AssemblyFailure : public Error {
public:
    explicit AssemblyFailure(const std::string& what) : Error(what) {}
};

class ZeroArea : public Error {
public:
    explicit ZeroArea(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class UnsupportedFormat : public Error {
public:
    explicit UnsupportedFormat(const std::string& what) : Error(what) {}
};

} // namespace lod2rec
